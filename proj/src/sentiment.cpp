#include "viramem/sentiment.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "viramem/error.hpp"
#include "viramem/fsutil.hpp"
#include "viramem/utf8.hpp"

namespace viramem::sentiment {

namespace {

bool is_ascii_punct(char c) {
  return (c >= '!' && c <= '/') || (c >= ':' && c <= '@') || (c >= '[' && c <= '`') || (c >= '{' && c <= '~');
}

// str.isupper(): at least one cased character and none lowercase.
bool all_caps(std::string_view word) {
  bool cased = false;
  for (char32_t cp : utf8::decode(word)) {
    if (utf8::is_lower(cp)) return false;
    cased = cased || utf8::is_upper(cp);
  }
  return cased;
}

std::string strip(std::string_view s) {
  const auto cps = utf8::decode(s);
  std::size_t b = 0;
  std::size_t e = cps.size();
  while (b < e && utf8::is_space(cps[b])) ++b;
  while (e > b && utf8::is_space(cps[e - 1])) --e;
  return utf8::encode(std::u32string_view(cps).substr(b, e - b));
}

class Scorer {
 public:
  Scorer(std::string_view text, const SentimentRuleset& rules) : text_(text), rules_(rules) {
    words_ = scorer_tokens(text, rules);
    lower_.reserve(words_.size());
    for (const auto& w : words_) lower_.push_back(utf8::to_lower(w));
    std::size_t caps = 0;
    for (const auto& w : words_) caps += all_caps(w) ? 1 : 0;
    is_cap_diff_ = caps > 0 && caps < words_.size();
  }

  SentimentResult run() {
    std::vector<double> sentiments;
    sentiments.reserve(words_.size());
    std::unordered_map<std::string, std::size_t> first_index;
    for (std::size_t k = 0; k < words_.size(); ++k) first_index.emplace(words_[k], k);

    for (const auto& item : words_) {
      // A repeated token is scored at the position of its first occurrence.
      const std::size_t i = first_index.at(item);
      const std::string item_lower = utf8::to_lower(item);
      const bool kind_of = i + 1 < words_.size() && item_lower == "kind" && lower_[i + 1] == "of";
      if (kind_of || rules_.booster_map.count(item_lower)) {
        sentiments.push_back(0.0);
        continue;
      }
      sentiments.push_back(valence(item, item_lower, i));
    }
    but_check(sentiments);
    return score_valence(sentiments);
  }

 private:
  bool in_lexicon(const std::string& lower) const { return rules_.valence_lexicon.count(lower) > 0; }

  bool negated(const std::string& word) const {
    const std::string lower = utf8::to_lower(word);
    return rules_.negation_set.count(lower) > 0 || lower.find("n't") != std::string::npos;
  }

  double scalar_inc_dec(const std::string& word, double valence) const {
    const std::string lower = utf8::to_lower(word);
    const auto it = rules_.booster_map.find(lower);
    if (it == rules_.booster_map.end()) return 0.0;
    double scalar = it->second;
    if (valence < 0) scalar = -scalar;
    if (all_caps(word) && is_cap_diff_) scalar += valence > 0 ? rules_.caps_boost : -rules_.caps_boost;
    return scalar;
  }

  double valence(const std::string& item, const std::string& item_lower, std::size_t i) const {
    const auto hit = rules_.valence_lexicon.find(item_lower);
    if (hit == rules_.valence_lexicon.end()) return 0.0;
    double v = hit->second;
    if (all_caps(item) && is_cap_diff_) v += v > 0 ? rules_.caps_boost : -rules_.caps_boost;
    for (std::size_t start = 0; start < 3; ++start) {
      if (i > start && !in_lexicon(lower_[i - (start + 1)])) {
        double s = scalar_inc_dec(words_[i - (start + 1)], v);
        if (s != 0.0) s *= rules_.booster_distance_decay[start];
        v += s;
        v = never_check(v, start, i);
        if (start == 2) v = idioms_check(v, i);
      }
    }
    return least_check(v, i);
  }

  double never_check(double v, std::size_t start, std::size_t i) const {
    auto so_or_this = [&](std::size_t k) { return words_[k] == "so" || words_[k] == "this"; };
    if (start == 0) {
      if (negated(words_[i - 1])) v *= rules_.negation_scalar;
    } else if (start == 1) {
      if (words_[i - 2] == "never" && so_or_this(i - 1)) {
        v *= rules_.never_so_scalar[0];
      } else if (negated(words_[i - 2])) {
        v *= rules_.negation_scalar;
      }
    } else {
      if ((words_[i - 3] == "never" && so_or_this(i - 2)) || so_or_this(i - 1)) {
        v *= rules_.never_so_scalar[1];
      } else if (negated(words_[i - 3])) {
        v *= rules_.negation_scalar;
      }
    }
    return v;
  }

  double idioms_check(double v, std::size_t i) const {
    const auto& w = words_;
    const std::string onezero = w[i - 1] + " " + w[i];
    const std::string twoonezero = w[i - 2] + " " + w[i - 1] + " " + w[i];
    const std::string twoone = w[i - 2] + " " + w[i - 1];
    const std::string threetwoone = w[i - 3] + " " + w[i - 2] + " " + w[i - 1];
    const std::string threetwo = w[i - 3] + " " + w[i - 2];
    for (const std::string* seq : {&onezero, &twoonezero, &twoone, &threetwoone, &threetwo}) {
      if (auto it = rules_.idioms.find(*seq); it != rules_.idioms.end()) {
        v = it->second;
        break;
      }
    }
    if (w.size() - 1 > i) {
      if (auto it = rules_.idioms.find(w[i] + " " + w[i + 1]); it != rules_.idioms.end()) v = it->second;
    }
    if (w.size() - 1 > i + 1) {
      if (auto it = rules_.idioms.find(w[i] + " " + w[i + 1] + " " + w[i + 2]); it != rules_.idioms.end()) {
        v = it->second;
      }
    }
    if (rules_.booster_map.count(threetwo) || rules_.booster_map.count(twoone)) v += rules_.booster_decrement;
    return v;
  }

  double least_check(double v, std::size_t i) const {
    if (i > 1 && !in_lexicon(lower_[i - 1]) && lower_[i - 1] == "least") {
      if (lower_[i - 2] != "at" && lower_[i - 2] != "very") v *= rules_.negation_scalar;
    } else if (i > 0 && !in_lexicon(lower_[i - 1]) && lower_[i - 1] == "least") {
      v *= rules_.negation_scalar;
    }
    return v;
  }

  void but_check(std::vector<double>& sentiments) const {
    const auto it = std::find(lower_.begin(), lower_.end(), "but");
    if (it == lower_.end()) return;
    const auto bi = static_cast<std::size_t>(it - lower_.begin());
    for (std::size_t k = 0; k < sentiments.size(); ++k) {
      if (k < bi) sentiments[k] *= rules_.but_before;
      else if (k > bi) sentiments[k] *= rules_.but_after;
    }
  }

  double punctuation_emphasis() const {
    const auto ep = std::min<std::ptrdiff_t>(std::count(text_.begin(), text_.end(), '!'), rules_.exclamation_max_count);
    const auto qm = std::count(text_.begin(), text_.end(), '?');
    double qm_amp = 0.0;
    if (qm > 1) {
      qm_amp = qm <= rules_.question_max_count ? static_cast<double>(qm) * rules_.question_boost : rules_.question_max_boost;
    }
    return static_cast<double>(ep) * rules_.exclamation_boost + qm_amp;
  }

  SentimentResult score_valence(const std::vector<double>& sentiments) const {
    SentimentResult r;
    if (sentiments.empty()) return r;
    double sum = 0.0;
    for (double s : sentiments) sum += s;
    const double amp = punctuation_emphasis();
    if (sum > 0) sum += amp;
    else if (sum < 0) sum -= amp;
    r.compound = sum / std::sqrt(sum * sum + rules_.normalization_alpha);

    double pos_sum = 0.0;
    double neg_sum = 0.0;
    double neu_count = 0.0;
    for (double s : sentiments) {
      if (s > 0) pos_sum += s + 1.0;
      if (s < 0) neg_sum += s - 1.0;
      if (s == 0) neu_count += 1.0;
    }
    if (pos_sum > std::abs(neg_sum)) pos_sum += amp;
    else if (pos_sum < std::abs(neg_sum)) neg_sum -= amp;
    const double total = pos_sum + std::abs(neg_sum) + neu_count;
    r.pos = std::abs(pos_sum / total);
    r.neg = std::abs(neg_sum / total);
    r.neu = std::abs(neu_count / total);
    return r;
  }

  std::string_view text_;
  const SentimentRuleset& rules_;
  std::vector<std::string> words_;
  std::vector<std::string> lower_;
  bool is_cap_diff_ = false;
};

double number(const nlohmann::json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  const double v = j.at(key).get<double>();
  if (!std::isfinite(v)) throw DataError(std::string("sentiment rule '") + key + "' is not finite");
  return v;
}

}  // namespace

std::vector<std::string> scorer_tokens(std::string_view text, const SentimentRuleset& rules) {
  std::string no_punc;
  no_punc.reserve(text.size());
  for (char c : text) {
    if (!is_ascii_punct(c)) no_punc.push_back(c);
  }
  std::unordered_set<std::string> words_only;
  for (auto& w : utf8::split_whitespace(no_punc)) {
    if (utf8::length(w) > 1) words_only.insert(std::move(w));
  }
  std::unordered_set<std::string> punct(rules.punctuation.begin(), rules.punctuation.end());

  std::vector<std::string> out;
  for (auto& token : utf8::split_whitespace(text)) {
    if (utf8::length(token) <= 1) continue;
    // Words carry no ASCII punctuation, so a token can only be punctuation
    // glued to one side of a word: strip the maximal run and look it up.
    std::size_t tail = token.size();
    while (tail > 0 && is_ascii_punct(token[tail - 1])) --tail;
    std::size_t head = 0;
    while (head < token.size() && is_ascii_punct(token[head])) ++head;
    if (tail < token.size() && head == 0 && punct.count(token.substr(tail)) &&
        words_only.count(token.substr(0, tail))) {
      token.resize(tail);
    } else if (head > 0 && tail == token.size() && punct.count(token.substr(0, head)) &&
               words_only.count(token.substr(head))) {
      token.erase(0, head);
    }
    out.push_back(std::move(token));
  }
  return out;
}

SentimentRuleset load_ruleset(const std::filesystem::path& lexicon_tsv, const std::filesystem::path& rules_json) {
  SentimentRuleset r;
  {
    const std::string text = read_file(lexicon_tsv);
    std::istringstream in(text);
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
      ++line_number;
      const std::string s = strip(line);
      if (s.empty()) continue;
      const auto tab = s.find('\t');
      if (tab == std::string::npos) throw ParseError("valence lexicon line lacks a tab", line_number);
      const auto tab2 = s.find('\t', tab + 1);
      const std::string value = s.substr(tab + 1, tab2 == std::string::npos ? std::string::npos : tab2 - tab - 1);
      double v = 0.0;
      try {
        std::size_t used = 0;
        v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
      } catch (const std::exception&) {
        throw ParseError("bad valence '" + value + "'", line_number);
      }
      r.valence_lexicon[s.substr(0, tab)] = v;
    }
    if (r.valence_lexicon.empty()) throw DataError("valence lexicon " + lexicon_tsv.string() + " is empty");
  }

  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(rules_json));
  } catch (const nlohmann::json::exception& e) {
    throw DataError("sentiment rules " + rules_json.string() + ": " + e.what());
  }
  try {
    r.normalization_alpha = number(j, "normalization_alpha", r.normalization_alpha);
    r.booster_increment = number(j, "booster_increment", r.booster_increment);
    r.booster_decrement = number(j, "booster_decrement", r.booster_decrement);
    r.caps_boost = number(j, "caps_boost", r.caps_boost);
    r.negation_scalar = number(j, "negation_scalar", r.negation_scalar);
    if (j.contains("booster_distance_decay")) {
      const auto d = j.at("booster_distance_decay").get<std::vector<double>>();
      if (d.size() != 3) throw DataError("booster_distance_decay needs 3 entries");
      std::copy(d.begin(), d.end(), r.booster_distance_decay.begin());
    }
    if (j.contains("never_so_scalar")) {
      const auto d = j.at("never_so_scalar").get<std::vector<double>>();
      if (d.size() != 2) throw DataError("never_so_scalar needs 2 entries");
      std::copy(d.begin(), d.end(), r.never_so_scalar.begin());
    }
    if (j.contains("but_weighting")) {
      r.but_before = number(j.at("but_weighting"), "before", r.but_before);
      r.but_after = number(j.at("but_weighting"), "after", r.but_after);
    }
    r.exclamation_boost = number(j, "exclamation_boost", r.exclamation_boost);
    r.exclamation_max_count = static_cast<int>(number(j, "exclamation_max_count", r.exclamation_max_count));
    r.question_boost = number(j, "question_boost", r.question_boost);
    r.question_max_count = static_cast<int>(number(j, "question_max_count", r.question_max_count));
    r.question_max_boost = number(j, "question_max_boost", r.question_max_boost);
    for (const auto& [word, kind] : j.at("boosters").items()) {
      const std::string k = kind.get<std::string>();
      if (k == "increment") r.booster_map[word] = r.booster_increment;
      else if (k == "decrement") r.booster_map[word] = r.booster_decrement;
      else throw DataError("booster '" + word + "' has unknown kind '" + k + "'");
    }
    for (const auto& w : j.at("negations")) r.negation_set.insert(w.get<std::string>());
    for (const auto& [seq, v] : j.at("idioms").items()) r.idioms[seq] = v.get<double>();
    r.punctuation = j.at("punctuation").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError("sentiment rules " + rules_json.string() + ": " + e.what());
  }
  if (!(r.normalization_alpha > 0)) throw DataError("normalization_alpha must be positive");
  return r;
}

SentimentRuleset load_default_ruleset(const std::filesystem::path& data_dir) {
  return load_ruleset(data_dir / "sentiment" / "vader_lexicon.tsv", data_dir / "sentiment" / "rules.json");
}

SentimentResult score_text(std::string_view text, const SentimentRuleset& rules) {
  return Scorer(text, rules).run();
}

std::optional<double> average_post_sentiment(const std::vector<double>& compounds) {
  if (compounds.empty()) return std::nullopt;
  double sum = 0.0;
  for (double c : compounds) sum += c;
  return sum / static_cast<double>(compounds.size());
}

}  // namespace viramem::sentiment
