#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace viramem::textprep {

using WordSet = std::unordered_set<std::string>;

struct LexiconSet {
  WordSet standard_stopwords;
  WordSet custom_stopwords;
  WordSet noun_lexicon;
  std::unordered_map<std::string, std::string> lemma_exceptions;
  WordSet english_wordlist;

  bool is_stopword(const std::string& w) const {
    return standard_stopwords.count(w) > 0 || custom_stopwords.count(w) > 0;
  }
};

struct LexiconPaths {
  std::filesystem::path standard_stopwords;
  std::filesystem::path custom_stopwords;
  std::filesystem::path noun_lexicon;
  std::filesystem::path lemma_exceptions;
  std::filesystem::path english_wordlist;

  /// The shipped files under `<dir>/lexicon/`.
  static LexiconPaths defaults(const std::filesystem::path& data_dir);
};

/// One word per line (blank lines and '#' comments skipped), lowercased.
WordSet load_word_set(const std::filesystem::path& path);

/// Throws DataError if a file is missing or a required custom stopword
/// (pic, picture, post, lol) is absent.
LexiconSet load_lexicons(const LexiconPaths& paths);

struct TokenList {
  std::vector<std::string> tokens;
  std::vector<std::size_t> source_comment_index;
};

/// Drops URL chunks, lowercases, keeps Unicode letters plus apostrophes and
/// hyphens that sit between two letters; everything else becomes a space.
/// Whitespace is collapsed and trimmed.
std::string clean_text(std::string_view raw);

/// Splits cleaned text on spaces. A possessive "'s" or trailing apostrophe is
/// cut off ("dog's" -> "dog"); other contractions stay whole.
std::vector<std::string> tokenize(std::string_view cleaned);

/// Runs of three or more identical consecutive tokens shrink to one.
std::vector<std::string> collapse_repeats(const std::vector<std::string>& tokens);

/// Exception table, then -ies>-y, -ves>-f/-fe, -es, -s when the stem is in
/// the wordlist; repeated to a fixpoint.
std::string lemmatize(const std::string& token, const LexiconSet& lex);

struct NounOptions {
  bool dedupe_tokens = false;
};

TokenList extract_nouns(std::string_view comment, const LexiconSet& lex, const NounOptions& opt = {});

/// Nouns of several comments, each token tagged with its comment index.
TokenList extract_nouns(const std::vector<std::string>& comments, const LexiconSet& lex, const NounOptions& opt = {});

/// Lowercased, lemmatized, first-occurrence unique words of the labels.
/// Multi-word labels contribute each word.
std::vector<std::string> unique_labels(const std::vector<std::string>& labels, const LexiconSet& lex);

}  // namespace viramem::textprep
