#include "viramem/config.hpp"

#include <json.hpp>

#include <set>

#include "viramem/error.hpp"
#include "viramem/fsutil.hpp"

namespace viramem {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw DataError("config: unknown key '" + key + "' in " + where);
  }
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return (path.is_absolute() ? path : base / path).lexically_normal();
}

template <typename T>
void read_opt(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void read_path(const json& j, const char* key, const fs::path& base, fs::path& out) {
  if (j.contains(key)) out = resolve(base, j.at(key).get<std::string>());
}

}  // namespace

RunConfig RunConfig::with_defaults(const fs::path& data_dir) {
  RunConfig c;
  c.lexicon_paths = textprep::LexiconPaths::defaults(data_dir);
  c.sentiment_lexicon = data_dir / "sentiment" / "vader_lexicon.tsv";
  c.sentiment_rules = data_dir / "sentiment" / "rules.json";
  return c;
}

RunConfig parse_run_config(const std::string& json_text, const fs::path& base_dir, const fs::path& data_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("config: not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw DataError("config: top level must be an object");
  RunConfig c = RunConfig::with_defaults(data_dir);
  try {
    reject_unknown_keys(j,
                        {"corpus_path", "feature_dir", "embedding_path", "embedding_dimension", "lexicon_paths",
                         "timezone", "reference_time", "outlier_removal", "dedupe_comment_tokens", "output_dir",
                         "analyses", "distance"},
                        "config");
    for (const char* key : {"corpus_path", "feature_dir", "embedding_path", "output_dir"}) {
      if (!j.contains(key)) throw DataError(std::string("config: missing required key '") + key + "'");
    }
    read_path(j, "corpus_path", base_dir, c.corpus_path);
    read_path(j, "feature_dir", base_dir, c.feature_dir);
    read_path(j, "embedding_path", base_dir, c.embedding_path);
    read_path(j, "output_dir", base_dir, c.output_dir);
    read_opt(j, "embedding_dimension", c.embedding_dimension);
    if (c.embedding_dimension < 1) throw DataError("config: embedding_dimension must be positive");
    if (j.contains("lexicon_paths")) {
      const auto& l = j.at("lexicon_paths");
      reject_unknown_keys(l,
                          {"standard_stopwords", "custom_stopwords", "noun_lexicon", "lemma_exceptions",
                           "english_wordlist", "sentiment_lexicon", "sentiment_rules"},
                          "lexicon_paths");
      read_path(l, "standard_stopwords", base_dir, c.lexicon_paths.standard_stopwords);
      read_path(l, "custom_stopwords", base_dir, c.lexicon_paths.custom_stopwords);
      read_path(l, "noun_lexicon", base_dir, c.lexicon_paths.noun_lexicon);
      read_path(l, "lemma_exceptions", base_dir, c.lexicon_paths.lemma_exceptions);
      read_path(l, "english_wordlist", base_dir, c.lexicon_paths.english_wordlist);
      read_path(l, "sentiment_lexicon", base_dir, c.sentiment_lexicon);
      read_path(l, "sentiment_rules", base_dir, c.sentiment_rules);
    }
    if (j.contains("timezone")) c.timezone = UtcOffset::parse(j.at("timezone").get<std::string>());
    if (j.contains("reference_time") && !j.at("reference_time").is_null()) {
      c.reference_time = parse_utc(j.at("reference_time").get<std::string>());
    }
    read_opt(j, "outlier_removal", c.outlier_removal);
    read_opt(j, "dedupe_comment_tokens", c.dedupe_comment_tokens);
    if (j.contains("analyses")) {
      const auto& a = j.at("analyses");
      reject_unknown_keys(a, {"correlations", "partials", "heatmap", "sentiment", "consistency", "layer_models"},
                          "analyses");
      read_opt(a, "correlations", c.analyses.correlations);
      read_opt(a, "partials", c.analyses.partials);
      read_opt(a, "heatmap", c.analyses.heatmap);
      read_opt(a, "sentiment", c.analyses.sentiment);
      read_opt(a, "consistency", c.analyses.consistency);
      read_opt(a, "layer_models", c.analyses.layer_models);
    }
    if (j.contains("distance")) {
      const auto& d = j.at("distance");
      reject_unknown_keys(d, {"tile", "threads", "materialize_cap"}, "distance");
      read_opt(d, "tile", c.distance.distance.tile);
      read_opt(d, "threads", c.distance.distance.threads);
      read_opt(d, "materialize_cap", c.distance.materialize_cap);
      if (c.distance.distance.tile < 1 || c.distance.distance.threads < 1 || c.distance.materialize_cap < 0) {
        throw DataError("config: distance.tile and distance.threads must be positive");
      }
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("config: wrong value type: ") + e.what());
  }
  return c;
}

RunConfig load_run_config(const fs::path& path, const fs::path& data_dir) {
  return parse_run_config(read_file(path), fs::absolute(path).parent_path(), data_dir);
}

std::string run_config_to_json_text(const RunConfig& c) {
  nlohmann::ordered_json j;
  const auto abs = [](const fs::path& p) { return p.empty() ? std::string() : fs::absolute(p).string(); };
  j["corpus_path"] = abs(c.corpus_path);
  j["feature_dir"] = abs(c.feature_dir);
  j["embedding_path"] = abs(c.embedding_path);
  j["embedding_dimension"] = c.embedding_dimension;
  j["lexicon_paths"] = {{"standard_stopwords", abs(c.lexicon_paths.standard_stopwords)},
                        {"custom_stopwords", abs(c.lexicon_paths.custom_stopwords)},
                        {"noun_lexicon", abs(c.lexicon_paths.noun_lexicon)},
                        {"lemma_exceptions", abs(c.lexicon_paths.lemma_exceptions)},
                        {"english_wordlist", abs(c.lexicon_paths.english_wordlist)},
                        {"sentiment_lexicon", abs(c.sentiment_lexicon)},
                        {"sentiment_rules", abs(c.sentiment_rules)}};
  j["timezone"] = c.timezone.to_string();
  j["reference_time"] = c.reference_time ? nlohmann::ordered_json(format_utc(*c.reference_time)) : nullptr;
  j["outlier_removal"] = c.outlier_removal;
  j["dedupe_comment_tokens"] = c.dedupe_comment_tokens;
  j["output_dir"] = abs(c.output_dir);
  j["analyses"] = {{"correlations", c.analyses.correlations}, {"partials", c.analyses.partials},
                   {"heatmap", c.analyses.heatmap},           {"sentiment", c.analyses.sentiment},
                   {"consistency", c.analyses.consistency},   {"layer_models", c.analyses.layer_models}};
  j["distance"] = {{"tile", c.distance.distance.tile},
                   {"threads", c.distance.distance.threads},
                   {"materialize_cap", c.distance.materialize_cap}};
  return j.dump(2) + "\n";
}

std::vector<std::string> missing_inputs(const RunConfig& c) {
  std::vector<std::string> out;
  const auto need = [&](const fs::path& p, const char* what, bool dir) {
    const bool ok = dir ? fs::is_directory(p) : fs::is_regular_file(p);
    if (!ok) out.push_back(std::string(what) + ": " + p.string());
  };
  need(c.corpus_path, "corpus", false);
  need(c.feature_dir, "feature container", true);
  if (c.analyses.consistency) {
    need(c.embedding_path, "embedding table", false);
    need(c.lexicon_paths.standard_stopwords, "standard stopwords", false);
    need(c.lexicon_paths.custom_stopwords, "custom stopwords", false);
    need(c.lexicon_paths.noun_lexicon, "noun lexicon", false);
    need(c.lexicon_paths.lemma_exceptions, "lemma exceptions", false);
    need(c.lexicon_paths.english_wordlist, "english wordlist", false);
  }
  need(c.sentiment_lexicon, "sentiment lexicon", false);
  need(c.sentiment_rules, "sentiment rules", false);
  return out;
}

}  // namespace viramem
