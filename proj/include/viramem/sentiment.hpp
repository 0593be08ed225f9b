#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace viramem::sentiment {

struct SentimentResult {
  double compound = 0.0;
  double pos = 0.0;
  double neu = 1.0;
  double neg = 0.0;
};

/// Valence lexicon plus every rule constant; nothing is hard-coded in the
/// scorer.
struct SentimentRuleset {
  std::unordered_map<std::string, double> valence_lexicon;
  // Signed increments (booster_increment or booster_decrement).
  std::unordered_map<std::string, double> booster_map;
  std::unordered_set<std::string> negation_set;
  std::unordered_map<std::string, double> idioms;
  std::vector<std::string> punctuation;

  double normalization_alpha = 15.0;
  double booster_increment = 0.293;
  double booster_decrement = -0.293;
  double caps_boost = 0.733;
  double negation_scalar = -0.74;
  std::array<double, 3> booster_distance_decay{1.0, 0.95, 0.9};
  std::array<double, 2> never_so_scalar{1.5, 1.25};
  double but_before = 0.5;
  double but_after = 1.5;
  double exclamation_boost = 0.292;
  int exclamation_max_count = 4;
  double question_boost = 0.18;
  int question_max_count = 3;
  double question_max_boost = 0.96;
};

/// Lexicon: token<TAB>valence[<TAB>...] per line; later duplicates win.
/// Rules: JSON object with the constants above.
SentimentRuleset load_ruleset(const std::filesystem::path& lexicon_tsv, const std::filesystem::path& rules_json);

/// Shipped files under `<dir>/sentiment/`.
SentimentRuleset load_default_ruleset(const std::filesystem::path& data_dir);

SentimentResult score_text(std::string_view text, const SentimentRuleset& rules);

/// Mean compound score; nullopt for an empty list (post excluded).
std::optional<double> average_post_sentiment(const std::vector<double>& compounds);

inline double intensity(double compound) { return compound < 0 ? -compound : compound; }

/// Splits text the way the scorer sees it (whitespace tokens longer than one
/// codepoint, with leading/trailing punctuation marks stripped).
std::vector<std::string> scorer_tokens(std::string_view text, const SentimentRuleset& rules);

}  // namespace viramem::sentiment
