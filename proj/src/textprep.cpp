#include "viramem/textprep.hpp"

#include <fstream>

#include "viramem/error.hpp"
#include "viramem/utf8.hpp"

namespace viramem::textprep {

namespace {

bool is_url(std::string_view chunk) {
  const std::string lower = utf8::to_lower(chunk);
  return lower.rfind("http://", 0) == 0 || lower.rfind("https://", 0) == 0 || lower.rfind("www.", 0) == 0 ||
         lower.find("://") != std::string::npos;
}

bool is_apostrophe(char32_t cp) { return cp == U'\'' || cp == U'’' || cp == U'ʼ'; }
bool is_hyphen(char32_t cp) { return cp == U'-' || cp == U'‐' || cp == U'‑'; }

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::string lemmatize_once(const std::string& t, const LexiconSet& lex) {
  if (auto it = lex.lemma_exceptions.find(t); it != lex.lemma_exceptions.end()) return it->second;
  if (ends_with(t, "ss") || ends_with(t, "us") || ends_with(t, "is")) return t;
  auto known = [&](const std::string& stem) { return stem.size() >= 3 && lex.english_wordlist.count(stem) > 0; };
  const std::size_t n = t.size();
  if (ends_with(t, "ies")) {
    const std::string stem = t.substr(0, n - 3) + "y";
    if (known(stem)) return stem;
  }
  if (ends_with(t, "ves")) {
    const std::string base = t.substr(0, n - 3);
    if (known(base + "f")) return base + "f";
    if (known(base + "fe")) return base + "fe";
  }
  if (ends_with(t, "es")) {
    const std::string stem = t.substr(0, n - 2);
    if (known(stem)) return stem;
  }
  if (ends_with(t, "s")) {
    const std::string stem = t.substr(0, n - 1);
    if (known(stem)) return stem;
  }
  return t;
}

}  // namespace

LexiconPaths LexiconPaths::defaults(const std::filesystem::path& data_dir) {
  const auto dir = data_dir / "lexicon";
  return {dir / "stopwords.txt", dir / "custom_stopwords.txt", dir / "nouns.txt", dir / "lemma_exceptions.tsv",
          dir / "wordlist.txt"};
}

WordSet load_word_set(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open lexicon file " + path.string());
  WordSet out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto b = line.find_first_not_of(" \t");
    if (b == std::string::npos || line[b] == '#') continue;
    const auto e = line.find_last_not_of(" \t");
    out.insert(utf8::to_lower(line.substr(b, e - b + 1)));
  }
  return out;
}

LexiconSet load_lexicons(const LexiconPaths& paths) {
  LexiconSet lex;
  lex.standard_stopwords = load_word_set(paths.standard_stopwords);
  lex.custom_stopwords = load_word_set(paths.custom_stopwords);
  lex.noun_lexicon = load_word_set(paths.noun_lexicon);
  lex.english_wordlist = load_word_set(paths.english_wordlist);
  for (const char* required : {"pic", "picture", "post", "lol"}) {
    if (!lex.custom_stopwords.count(required)) {
      throw DataError(std::string("custom stopword list lacks required entry '") + required + "'");
    }
  }
  std::ifstream in(paths.lemma_exceptions);
  if (!in) throw DataError("cannot open lemma exceptions " + paths.lemma_exceptions.string());
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size()) {
      throw ParseError("lemma exception needs two tab-separated columns", line_number);
    }
    lex.lemma_exceptions.emplace(utf8::to_lower(line.substr(0, tab)), utf8::to_lower(line.substr(tab + 1)));
  }
  return lex;
}

std::string clean_text(std::string_view raw) {
  std::string out;
  for (const std::string& chunk : utf8::split_whitespace(raw)) {
    if (is_url(chunk)) continue;
    const std::u32string cps = utf8::decode(chunk);
    std::string word;
    auto flush = [&] {
      if (word.empty()) return;
      if (!out.empty()) out.push_back(' ');
      out += word;
      word.clear();
    };
    for (std::size_t i = 0; i < cps.size(); ++i) {
      const char32_t cp = cps[i];
      if (utf8::is_letter(cp)) {
        utf8::append(word, utf8::to_lower(cp));
        continue;
      }
      const bool joiner = is_apostrophe(cp) || is_hyphen(cp);
      const bool between = i > 0 && i + 1 < cps.size() && utf8::is_letter(cps[i - 1]) && utf8::is_letter(cps[i + 1]);
      if (joiner && between) {
        word.push_back(is_apostrophe(cp) ? '\'' : '-');
      } else {
        flush();
      }
    }
    flush();
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view cleaned) {
  std::vector<std::string> out;
  for (std::string token : utf8::split_whitespace(cleaned)) {
    if (ends_with(token, "'s") && token.size() > 2) token.resize(token.size() - 2);
    out.push_back(std::move(token));
  }
  return out;
}

std::vector<std::string> collapse_repeats(const std::vector<std::string>& tokens) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < tokens.size()) {
    std::size_t j = i + 1;
    while (j < tokens.size() && tokens[j] == tokens[i]) ++j;
    const std::size_t run = j - i;
    out.insert(out.end(), run >= 3 ? 1 : run, tokens[i]);
    i = j;
  }
  return out;
}

std::string lemmatize(const std::string& token, const LexiconSet& lex) {
  std::string current = token;
  // Each step shortens the token or stops, so a handful of rounds reaches
  // the fixpoint; the bound only guards against cyclic exception tables.
  for (int round = 0; round < 8; ++round) {
    std::string next = lemmatize_once(current, lex);
    if (next == current) break;
    current = std::move(next);
  }
  return current;
}

TokenList extract_nouns(std::string_view comment, const LexiconSet& lex, const NounOptions& opt) {
  return extract_nouns(std::vector<std::string>{std::string(comment)}, lex, opt);
}

TokenList extract_nouns(const std::vector<std::string>& comments, const LexiconSet& lex, const NounOptions& opt) {
  TokenList out;
  std::unordered_set<std::string> seen;
  for (std::size_t c = 0; c < comments.size(); ++c) {
    for (const std::string& token : collapse_repeats(tokenize(clean_text(comments[c])))) {
      const std::string lemma = lemmatize(token, lex);
      if (!lex.noun_lexicon.count(lemma)) continue;
      if (lex.is_stopword(lemma)) continue;
      if (!lex.english_wordlist.count(lemma)) continue;
      if (opt.dedupe_tokens && !seen.insert(lemma).second) continue;
      out.tokens.push_back(lemma);
      out.source_comment_index.push_back(c);
    }
  }
  return out;
}

std::vector<std::string> unique_labels(const std::vector<std::string>& labels, const LexiconSet& lex) {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (const auto& label : labels) {
    for (const std::string& word : tokenize(clean_text(label))) {
      std::string lemma = lemmatize(word, lex);
      if (seen.insert(lemma).second) out.push_back(std::move(lemma));
    }
  }
  return out;
}

}  // namespace viramem::textprep
