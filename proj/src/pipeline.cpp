#include "viramem/pipeline.hpp"

#include <json.hpp>
#include <unistd.h>

#include <chrono>
#include <functional>
#include <set>
#include <unordered_set>

#include "viramem/error.hpp"
#include "viramem/fsutil.hpp"
#include "viramem/hash.hpp"
#include "viramem/log.hpp"
#include "viramem/report.hpp"

namespace viramem::pipeline {

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

template <typename Fn>
auto run_stage(const std::string& stage, Fn&& fn) -> decltype(fn()) {
  const std::string prefix = "analyze stage '" + stage + "': ";
  try {
    return fn();
  } catch (const NumericError& e) {
    throw NumericError(prefix + e.what());
  } catch (const DataError& e) {
    throw DataError(prefix + e.what());
  } catch (const fs::filesystem_error& e) {
    throw DataError(prefix + e.what());
  } catch (const Error& e) {
    throw DataError(prefix + e.what());
  }
}

// Files land here first and are promoted together.
class Staging {
 public:
  explicit Staging(fs::path out) : out_(std::move(out)), dir_(out_ / (".staging-" + std::to_string(::getpid()))) {
    fs::create_directories(out_);
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  ~Staging() {
    std::error_code ec;
    fs::remove_all(dir_, ec);
  }
  Staging(const Staging&) = delete;
  Staging& operator=(const Staging&) = delete;

  void write(const std::string& name, const std::string& content) {
    write_file_atomic(dir_ / name, content);
    names_.push_back(name);
  }

  std::vector<fs::path> promote() {
    std::vector<fs::path> out;
    for (const auto& name : names_) {
      fs::rename(dir_ / name, out_ / name);
      out.push_back(out_ / name);
    }
    return out;
  }

 private:
  fs::path out_;
  fs::path dir_;
  std::vector<std::string> names_;
};

std::string file_sha256(const fs::path& p) { return sha256_hex(read_file(p)); }

ordered_json selection_json(const analysis::RowSelection& s) {
  return {{"n", s.rows.size()}, {"dropped", s.dropped}};
}

std::string format_percent(double num, double den) {
  if (den <= 0) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f%%", 100.0 * num / den);
  return buf;
}

}  // namespace

std::vector<std::string> expected_outputs(const RunConfig& c) {
  std::vector<std::string> out{"analysis_table.csv"};
  if (c.analyses.correlations) out.push_back(c.outlier_removal ? kCorrelationsCsv : kCorrelationsNoRemovalCsv);
  if (c.analyses.partials) out.push_back("partials.csv");
  if (c.analyses.heatmap) {
    out.push_back(report::kHeatmapCsv);
    out.push_back("heatmap.svg");
  }
  if (c.analyses.sentiment) out.push_back("sentiment.csv");
  if (c.analyses.consistency) out.push_back("consistency.csv");
  if (c.analyses.layer_models) {
    out.push_back(report::kLayerModelsJson);
    out.push_back("coefficients.svg");
  }
  return out;
}

AnalyzeResult cmd_analyze(const RunConfig& config) {
  const auto started = std::chrono::system_clock::now();
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<std::string> warnings;
  const auto previous_sink = set_warning_sink([&](const std::string& msg) { warnings.push_back(msg); });
  struct SinkGuard {
    WarningSink sink;
    ~SinkGuard() { set_warning_sink(sink); }
  } guard{previous_sink};

  ordered_json meta;
  ordered_json counts;
  ordered_json analyses;

  run_stage("config", [&] {
    const auto missing = missing_inputs(config);
    if (!missing.empty()) {
      std::string msg = "missing inputs:";
      for (const auto& m : missing) msg += " [" + m + "]";
      throw DataError(msg);
    }
  });

  const Corpus corpus = run_stage("corpus", [&] {
    const auto raw = load_corpus(config.corpus_path);
    const auto unique = dedup(raw);
    Corpus valid;
    std::map<std::string, std::int64_t> rejected;
    for (const auto& r : unique) {
      const auto d = filter_valid(r);
      if (d.accepted) {
        valid.push_back(r);
      } else {
        ++rejected[to_string(d.reason)];
      }
    }
    counts["corpus_records"] = raw.size();
    counts["duplicates_removed"] = raw.size() - unique.size();
    counts["rejected_by_filter"] = rejected;
    return valid;
  });

  const auto container =
      run_stage("features", [&] { return features::FeatureContainer::open(config.feature_dir); });
  const auto& manifest = container.manifest();
  const auto joined = run_stage("join", [&] {
    auto j = analysis::join_features(corpus, manifest);
    counts["posts_without_features"] = j.without_features;
    return j;
  });

  const auto rules = run_stage("sentiment",
                               [&] { return sentiment::load_ruleset(config.sentiment_lexicon, config.sentiment_rules); });

  std::optional<textprep::LexiconSet> lexicons;
  std::optional<embeddings::EmbeddingTable> table;
  if (config.analyses.consistency) {
    lexicons = run_stage("lexicons", [&] { return textprep::load_lexicons(config.lexicon_paths); });
    table = run_stage("embeddings", [&] {
      const auto vocab = analysis::embedding_vocabulary(joined, manifest, *lexicons, config.dedupe_comment_tokens);
      const std::unordered_set<std::string> wanted(vocab.begin(), vocab.end());
      return embeddings::load_embeddings(config.embedding_path, {config.embedding_dimension, &wanted});
    });
  }

  std::optional<distinct::DistinctivenessProfiles> profiles;
  if (config.analyses.layer_models) {
    profiles = run_stage("distinctiveness", [&] { return distinct::compute_profiles(container, config.distance); });
  }

  auto built = run_stage("table", [&] {
    analysis::TableSources src;
    src.sentiment_rules = &rules;
    src.lexicons = lexicons ? &*lexicons : nullptr;
    src.embeddings = table ? &*table : nullptr;
    src.dedupe_comment_tokens = config.dedupe_comment_tokens;
    src.profiles = profiles ? &*profiles : nullptr;
    src.timezone = config.timezone;
    src.reference_time = config.reference_time;
    return analysis::build_table(joined, manifest, src);
  });
  const auto& t = built.table;
  const auto rows = analysis::analysis_rows(t, config.outlier_removal);
  counts["table_rows"] = t.rows();
  counts["outliers_flagged"] = std::count(t.outlier.begin(), t.outlier.end(), true);
  counts["analysis_rows"] = rows.size();

  Staging staging(config.output_dir);
  run_stage("write", [&] { staging.write("analysis_table.csv", report::analysis_table_csv(t)); });

  if (config.analyses.correlations) {
    const auto corr = run_stage("correlations", [&] { return analysis::engagement_correlations(t); });
    run_stage("write", [&] {
      staging.write(config.outlier_removal ? kCorrelationsCsv : kCorrelationsNoRemovalCsv,
                    report::correlations_csv(corr));
    });
  }
  if (config.analyses.partials) {
    const auto partials = run_stage("partials", [&] { return analysis::partial_correlations(t, rows); });
    ordered_json pj = ordered_json::array();
    for (const auto& p : partials) {
      if (!p.controls.empty()) pj.push_back({{"y", p.y}, {"n", p.n}, {"dropped", p.dropped}});
    }
    analyses["partials"] = pj;
    run_stage("write", [&] { staging.write("partials.csv", report::partials_csv(partials)); });
  }
  if (config.analyses.heatmap) {
    const auto heat = run_stage("heatmap", [&] { return analysis::covariate_heatmap(t, rows); });
    analyses["heatmap"] = {{"n", heat.matrix.n}, {"dropped", heat.dropped}};
    ordered_json degenerate = ordered_json::array();
    for (std::size_t k = 0; k < heat.matrix.names.size(); ++k) {
      if (heat.matrix.degenerate[k]) degenerate.push_back(heat.matrix.names[k]);
    }
    analyses["heatmap"]["constant_columns"] = degenerate;
    run_stage("write", [&] {
      staging.write(report::kHeatmapCsv, report::heatmap_csv(heat.matrix));
      staging.write("heatmap.svg", report::heatmap_svg(heat.matrix));
    });
  }
  if (config.analyses.sentiment) {
    Eigen::Index dropped = 0;
    const auto summary = run_stage("sentiment_summary", [&] { return analysis::sentiment_summary(t, rows, &dropped); });
    analyses["sentiment"] = {{"n", summary.front().n}, {"dropped", dropped}};
    run_stage("write", [&] { staging.write("sentiment.csv", report::sentiment_csv(summary)); });
  }
  if (config.analyses.consistency) {
    analyses["consistency"] = selection_json(analysis::complete_rows(t, rows, {"consistency"}));
    run_stage("write", [&] { staging.write("consistency.csv", report::consistency_csv(t, built.consistency)); });
  }
  if (config.analyses.layer_models) {
    const auto models = run_stage("layer_models", [&] { return analysis::layer_models(t, rows); });
    analyses["layer_models"] = {{"n_design", models.design.X.rows()},
                                {"design_dropped", models.design_dropped},
                                {"n_memorability", models.models.memorability.n},
                                {"n_comments", models.models.comments.n},
                                {"n_sentiment", models.models.sentiment.n}};
    run_stage("write", [&] {
      const auto json = report::layer_models_json(models);
      staging.write(report::kLayerModelsJson, json);
      staging.write("coefficients.svg", report::coefficients_svg(report::coefficient_panels_from_json(json)));
    });
  }

  const auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  meta["started_at"] = format_utc(std::chrono::floor<std::chrono::seconds>(started));
  meta["elapsed_seconds"] = elapsed;
  meta["config"] = ordered_json::parse(run_config_to_json_text(config));
  meta["inputs_sha256"] = {{"corpus", file_sha256(config.corpus_path)},
                           {"manifest", file_sha256(config.feature_dir / "manifest.json")},
                           {"sentiment_lexicon", file_sha256(config.sentiment_lexicon)},
                           {"sentiment_rules", file_sha256(config.sentiment_rules)}};
  meta["counts"] = counts;
  meta["analyses"] = analyses;
  meta["warnings"] = warnings;
  run_stage("write", [&] { staging.write(kRunMetadata, meta.dump(2) + "\n"); });

  AnalyzeResult result;
  run_stage("write", [&] {
    auto paths = staging.promote();
    result.metadata = paths.back();
    paths.pop_back();
    result.outputs = std::move(paths);
  });
  result.table = std::move(built.table);
  return result;
}

bool ValidationReport::ok() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.ok; });
}

std::string ValidationReport::to_text() const {
  std::string out;
  for (const auto& c : checks) out += std::string(c.ok ? "ok    " : "FAIL  ") + c.name + ": " + c.detail + "\n";
  for (const auto& [k, v] : coverage) out += "coverage " + k + ": " + v + "\n";
  return out;
}

ValidationReport cmd_validate(const RunConfig& config) {
  ValidationReport rep;
  const auto check = [&](const std::string& name, const std::function<std::string()>& fn) {
    try {
      rep.checks.push_back({name, true, fn()});
      return true;
    } catch (const std::exception& e) {
      rep.checks.push_back({name, false, e.what()});
      return false;
    }
  };
  const auto previous_sink = set_warning_sink([](const std::string&) {});
  struct SinkGuard {
    WarningSink sink;
    ~SinkGuard() { set_warning_sink(sink); }
  } guard{previous_sink};

  for (const auto& m : missing_inputs(config)) rep.checks.push_back({"input present", false, m});

  Corpus corpus;
  check("corpus schema", [&] {
    corpus = load_corpus(config.corpus_path);
    std::size_t invalid = 0;
    std::string first;
    std::set<std::string> ids;
    std::size_t duplicate_ids = 0;
    for (const auto& r : corpus) {
      duplicate_ids += !ids.insert(r.post_id).second;
      try {
        check_record(r);
      } catch (const ValidationError& e) {
        if (invalid++ == 0) first = e.what();
      }
    }
    if (invalid > 0) throw DataError(std::to_string(invalid) + " invalid records, first: " + first);
    return std::to_string(corpus.size()) + " records, " + std::to_string(duplicate_ids) + " duplicate post ids";
  });

  std::optional<features::FeatureContainer> container;
  check("feature container", [&] {
    const auto issues = features::container_issues(config.feature_dir);
    if (!issues.empty()) {
      std::string msg;
      for (const auto& i : issues) msg += (msg.empty() ? "" : "; ") + i;
      throw DataError(msg);
    }
    container = features::FeatureContainer::open(config.feature_dir);
    return std::to_string(container->image_count()) + " images, " +
           std::to_string(container->manifest().layers.size()) + " layers";
  });

  std::optional<textprep::LexiconSet> lexicons;
  check("lexicons", [&] {
    lexicons = textprep::load_lexicons(config.lexicon_paths);
    return std::to_string(lexicons->noun_lexicon.size()) + " nouns, " +
           std::to_string(lexicons->standard_stopwords.size() + lexicons->custom_stopwords.size()) + " stopwords";
  });

  check("sentiment ruleset", [&] {
    const auto rules = sentiment::load_ruleset(config.sentiment_lexicon, config.sentiment_rules);
    rep.coverage.emplace_back("sentiment_ruleset_sha256",
                              sha256_hex(read_file(config.sentiment_lexicon) + read_file(config.sentiment_rules)));
    return std::to_string(rules.valence_lexicon.size()) + " lexicon entries";
  });

  std::optional<analysis::JoinedCorpus> joined;
  if (container) {
    joined = analysis::join_features(corpus, container->manifest());
    rep.coverage.emplace_back("posts_without_features", std::to_string(joined->without_features) + " of " +
                                                           std::to_string(corpus.size()));
    std::size_t labelless = 0;
    for (const auto idx : joined->image_index) {
      const auto& img = container->manifest().images[idx];
      labelless += !img.labels_ok || img.labels.empty();
    }
    rep.coverage.emplace_back("label_less_posts",
                              std::to_string(labelless) + " of " + std::to_string(joined->posts.size()));
  }

  check("embedding table", [&] {
    std::unordered_set<std::string> wanted;
    const std::unordered_set<std::string>* filter = nullptr;
    if (joined && lexicons) {
      const auto vocab = analysis::embedding_vocabulary(*joined, container->manifest(), *lexicons, config.dedupe_comment_tokens);
      wanted.insert(vocab.begin(), vocab.end());
      filter = &wanted;
    }
    const auto table = embeddings::load_embeddings(config.embedding_path, {config.embedding_dimension, filter});
    if (joined && lexicons) {
      std::size_t tokens = 0;
      std::size_t token_oov = 0;
      std::size_t labels = 0;
      std::size_t label_oov = 0;
      for (std::size_t i = 0; i < joined->posts.size(); ++i) {
        std::vector<std::string> bodies;
        for (const auto& c : joined->posts[i].top_comments) bodies.push_back(c.body);
        for (const auto& tok : textprep::extract_nouns(bodies, *lexicons, {config.dedupe_comment_tokens}).tokens) {
          ++tokens;
          token_oov += !table.contains(tok);
        }
        std::vector<std::string> label_text;
        for (const auto& l : container->manifest().images[joined->image_index[i]].labels) label_text.push_back(l.label);
        for (const auto& w : textprep::unique_labels(label_text, *lexicons)) {
          ++labels;
          label_oov += !table.contains(w);
        }
      }
      rep.coverage.emplace_back("comment_noun_oov", std::to_string(token_oov) + " of " + std::to_string(tokens) +
                                                        " (" + format_percent(token_oov, tokens) + ")");
      rep.coverage.emplace_back("label_word_oov", std::to_string(label_oov) + " of " + std::to_string(labels) + " (" +
                                                      format_percent(label_oov, labels) + ")");
    }
    return std::to_string(table.size()) + " vectors of dimension " + std::to_string(table.dimension()) + " loaded";
  });
  return rep;
}

reddit::FetchReceipt cmd_fetch(const reddit::FetchConfig& config, const FetchPaths& paths,
                               http::Transport& transport, http::Clock& clock) {
  config.validate();
  const Corpus existing = fs::exists(paths.corpus) ? load_corpus(paths.corpus) : Corpus{};
  reddit::CursorState cursor;
  if (!paths.cursor.empty() && fs::exists(paths.cursor)) {
    cursor = reddit::CursorState::from_json_text(read_file(paths.cursor));
  }
  reddit::Client client(transport, clock, config);
  reddit::ImageStore store(paths.images);
  auto result = reddit::run_collection(client, store, existing, cursor);

  Corpus merged = existing;
  merged.insert(merged.end(), result.accepted.begin(), result.accepted.end());
  save_corpus(dedup(merged), paths.corpus);
  if (!paths.cursor.empty()) write_file_atomic(paths.cursor, result.cursor.to_json_text());
  auto receipt_path = paths.receipt;
  if (receipt_path.empty()) receipt_path = fs::path(paths.corpus.string() + ".receipt.json");
  write_file_atomic(receipt_path, result.receipt.to_json_text());
  return result.receipt;
}

}  // namespace viramem::pipeline
