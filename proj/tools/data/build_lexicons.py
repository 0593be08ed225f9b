#!/usr/bin/env python3
"""Regenerates the lexicon files under data/lexicon/.

Source: the WordNet 3.0 lemma index and noun exception list as redistributed in
the spacy-lookups-data wheel (en_lemma_index.json.gz, en_lemma_exc.json.gz).

    pip download --no-deps spacy-lookups-data==1.0.5 -d /tmp/pkgs
    python3 tools/data/build_lexicons.py /tmp/pkgs/spacy_lookups_data-1.0.5-py2.py3-none-any.whl data/lexicon

The output is committed; this script only documents how it was produced.
"""
import gzip
import json
import re
import sys
import zipfile
from pathlib import Path

from sklearn.feature_extraction.text import ENGLISH_STOP_WORDS

ALPHA = re.compile(r"^[a-z]{2,}$")

# sklearn's list contains a handful of content nouns; those stay analyzable.
NOT_STOPWORDS = {
    "amount", "bill", "bottom", "cry", "describe", "detail", "empty", "fill",
    "fire", "front", "hundred", "interest", "mill", "name", "part", "serious",
    "side", "sincere", "system", "thick", "thin", "top",
}

EXTRA_STOPWORDS = """
aint arent cant couldnt didnt doesnt dont hadnt hasnt havent im isnt ive
itll itd lets shes shouldnt thats theres theyre theyd youd youll youre youve
wasnt werent wont wouldnt weve hes
ain't aren't can't couldn't didn't doesn't don't hadn't hasn't haven't i'm
isn't i've i'll i'd it's let's she's shouldn't that's there's they're they'd
you'd you'll you're you've wasn't weren't won't wouldn't we've he's
just really got gotta gonna wanna okay ok yeah yep yup nope oh ah uh um hmm
""".split()

CUSTOM_STOPWORDS = """
pic pics picture pictures photo photos photograph photography image images img
imgur snapshot post posts posted posting repost op oc reddit subreddit sub
thread upvote upvotes downvote karma comment comments edit
lol lmao lmfao rofl omg wtf tbh imo imho idk irl til btw fyi smh af
""".split()

# Frequent words that WordNet lists as nouns but which comments almost always
# use as verbs, adjectives, interjections or function words.
NON_NOUN_DOMINANT = """
have be do like can get one think will know make see want go going say need
same use take feel look find great two few try give mean put help come keep
read let old tell looking start show guess buy run change found hope care call
pay stop set must hate watch cool possible thinking working saw hit add check
open taking move wait turn sort kill coming stupid leave three wish win pick
funny lost given favorite build seeing general original normal cut fight crazy
stay felt break die drive living weird current main giving personal perfect
hold simple poor specific fit plan save sell mention stand starting pass
wonder lower telling fat hurt worry throw willing wear bet safe special fix
share sleep offer stick waiting pull fall multiple miss meet ready particular
regular total release following dark reply knowing sitting sent private plus
won natural handle wearing push solid return cold necessary impossible
positive shoot fighting negative annoying laugh smart catch suck born jump
individual remove finish blame switch evil final ride married recent silly
limited reach rich overall join copy draw tough wow ex mine must public super
damn nice good bad best better big small little new young right wrong real
sure high low long short last first next able hard easy clear full free whole
close dead fine pretty beautiful gorgeous lovely amazing awesome incredible
beat lead drop gain notice pick seem happen believe remember understand
consider appear expect suggest require decide continue include allow spend
create learn lose sit walk talked said says made makes gets goes doing did
done being am are is was were an it he me who why or at us may might while
someone somebody nobody anybody everybody getting saying using making talking
means thanks thank yes oh re la de en un se ca nt reading watching asking
posting putting buying eating writing calling happening keeping showing
holding leaving selling spending drinking helping breaking planning letting
listening dating despite folks ha hah haha hahaha wa mo ya yo hey hi hello
bye nah meh eh huh dude bro bruh tho though lots bit kinda sorta maybe
anyway actually literally seriously totally probably definitely basically
""".split()


def main(wheel: str, out_dir: str) -> None:
    z = zipfile.ZipFile(wheel)
    index = json.loads(gzip.decompress(z.read("spacy_lookups_data/data/en_lemma_index.json.gz")))
    exc = json.loads(gzip.decompress(z.read("spacy_lookups_data/data/en_lemma_exc.json.gz")))
    license_text = z.read("spacy_lookups_data/data/en_license.txt").decode()

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    stop = (set(ENGLISH_STOP_WORDS) - NOT_STOPWORDS) | set(EXTRA_STOPWORDS)
    custom = set(CUSTOM_STOPWORDS)
    blocked = set(NON_NOUN_DOMINANT)

    nouns = {w for w in index["noun"] if ALPHA.match(w)}
    adverbs = {w for w in index["adv"] if ALPHA.match(w)}
    nouns = nouns - adverbs - blocked

    wordlist = set()
    for pos in ("noun", "verb", "adj", "adv"):
        wordlist |= {w for w in index[pos] if ALPHA.match(w)}
    wordlist |= {w for w in stop if ALPHA.match(w)}
    wordlist |= custom

    lemma_exc = {}
    for surface, lemmas in exc["noun"].items():
        if ALPHA.match(surface) and lemmas and ALPHA.match(lemmas[0]) and surface != lemmas[0]:
            lemma_exc[surface] = lemmas[0]

    def write_words(name, words):
        (out / name).write_text("".join(w + "\n" for w in sorted(words)), encoding="utf-8")

    write_words("stopwords.txt", stop)
    write_words("custom_stopwords.txt", custom)
    write_words("nouns.txt", nouns)
    write_words("wordlist.txt", wordlist)
    (out / "lemma_exceptions.tsv").write_text(
        "".join(f"{k}\t{v}\n" for k, v in sorted(lemma_exc.items())), encoding="utf-8")
    (out / "LICENSE-wordnet.txt").write_text(license_text, encoding="utf-8")
    print(f"stop={len(stop)} custom={len(custom)} nouns={len(nouns)} "
          f"wordlist={len(wordlist)} exceptions={len(lemma_exc)}")


if __name__ == "__main__":
    main(sys.argv[1], sys.argv[2])
