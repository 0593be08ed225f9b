#include "viramem/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "viramem/error.hpp"

namespace viramem::analysis {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<std::string> label_strings(const features::ImageRecord& image) {
  std::vector<std::string> out;
  out.reserve(image.labels.size());
  for (const auto& l : image.labels) out.push_back(l.label);
  return out;
}

std::vector<std::string> comment_bodies(const PostRecord& post) {
  std::vector<std::string> out;
  out.reserve(post.top_comments.size());
  for (const auto& c : post.top_comments) out.push_back(c.body);
  return out;
}

bool column_all_missing(const AnalysisTable& table, const std::string& name) {
  return table.col(name).array().isNaN().all();
}

stats::CorrelationResult spearman_on(const AnalysisTable& table, const std::vector<Eigen::Index>& rows,
                                     const std::string& x, const std::string& y) {
  const Eigen::MatrixXd m = gather(table, rows, {x, y});
  return stats::spearman(m.col(0), m.col(1));
}

}  // namespace

Eigen::Index AnalysisTable::column(std::string_view name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw DataError("analysis table has no column '" + std::string(name) + "'");
  return static_cast<Eigen::Index>(it - columns.begin());
}

const std::vector<std::string>& table_columns() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v{"memorability",   "num_comments",    "post_score",   "avg_sentiment",
                               "sentiment_intensity", "consistency", "caption_length", "time_of_day",
                               "posted_duration", "file_size_kb",   "resolution",   "comment_length"};
    for (const auto s : features::kStages) v.push_back(distinct::stage_column_name(s));
    return v;
  }();
  return names;
}

const std::vector<std::string>& heatmap_columns() {
  static const std::vector<std::string> names{"memorability",   "num_comments",    "post_score",
                                              "avg_sentiment",  "caption_length",  "time_of_day",
                                              "posted_duration", "file_size_kb",   "resolution"};
  return names;
}

JoinedCorpus join_features(const Corpus& corpus, const features::Manifest& manifest) {
  std::unordered_map<std::string, std::size_t> by_hash;
  for (std::size_t i = 0; i < manifest.images.size(); ++i) by_hash.emplace(manifest.images[i].image_hash, i);
  JoinedCorpus out;
  for (const auto& post : corpus) {
    const auto it = by_hash.find(image_hash(post));
    if (it == by_hash.end()) {
      ++out.without_features;
      continue;
    }
    out.posts.push_back(post);
    out.image_index.push_back(it->second);
  }
  return out;
}

std::vector<std::string> embedding_vocabulary(const JoinedCorpus& joined, const features::Manifest& manifest,
                                              const textprep::LexiconSet& lexicons, bool dedupe_comment_tokens) {
  std::set<std::string> vocab;
  for (std::size_t i = 0; i < joined.posts.size(); ++i) {
    for (auto& t : textprep::extract_nouns(comment_bodies(joined.posts[i]), lexicons, {dedupe_comment_tokens}).tokens) {
      vocab.insert(std::move(t));
    }
    for (auto& l : textprep::unique_labels(label_strings(manifest.images[joined.image_index[i]]), lexicons)) {
      vocab.insert(std::move(l));
    }
  }
  return {vocab.begin(), vocab.end()};
}

BuiltTable build_table(const JoinedCorpus& joined, const features::Manifest& manifest, const TableSources& src) {
  const auto n = static_cast<Eigen::Index>(joined.posts.size());
  BuiltTable out;
  auto& t = out.table;
  t.columns = table_columns();
  t.values = Eigen::MatrixXd::Constant(n, static_cast<Eigen::Index>(t.columns.size()), kNaN);
  out.consistency.resize(joined.posts.size());

  std::unordered_map<std::string, Eigen::Index> profile_row;
  if (src.profiles != nullptr) {
    for (std::size_t i = 0; i < src.profiles->image_hashes.size(); ++i) {
      profile_row.emplace(src.profiles->image_hashes[i], static_cast<Eigen::Index>(i));
    }
  }
  const Eigen::Index first_stage = t.column(distinct::stage_column_name(features::Stage::s1));
  const auto stages = static_cast<Eigen::Index>(features::kStages.size());

  for (Eigen::Index r = 0; r < n; ++r) {
    const auto i = static_cast<std::size_t>(r);
    const auto& post = joined.posts[i];
    const auto& image = manifest.images[joined.image_index[i]];
    t.post_ids.push_back(post.post_id);
    t.image_hashes.push_back(image.image_hash);
    t.subreddits.push_back(post.subreddit);
    t.collection_runs.push_back(post.collection_run);

    const auto cov = derive_covariates(post, src.reference_time.value_or(post.fetched_at), src.timezone);
    auto row = t.values.row(r);
    const auto set = [&](const char* name, double v) { row(t.column(name)) = v; };
    set("memorability", image.memorability);
    set("num_comments", static_cast<double>(cov.num_comments));
    set("post_score", static_cast<double>(cov.post_score));
    set("caption_length", static_cast<double>(cov.caption_length));
    set("time_of_day", cov.time_of_day);
    set("posted_duration", cov.posted_duration);
    set("file_size_kb", cov.file_size_kb);
    set("resolution", static_cast<double>(cov.resolution));
    std::int64_t comment_letters = 0;
    for (const auto& c : post.top_comments) comment_letters += caption_letters(c.body);
    set("comment_length", static_cast<double>(comment_letters));

    if (src.sentiment_rules != nullptr) {
      std::vector<double> compounds;
      for (const auto& c : post.top_comments) compounds.push_back(sentiment::score_text(c.body, *src.sentiment_rules).compound);
      if (const auto avg = sentiment::average_post_sentiment(compounds)) {
        set("avg_sentiment", *avg);
        set("sentiment_intensity", sentiment::intensity(*avg));
      }
    }

    if (src.lexicons != nullptr && src.embeddings != nullptr) {
      auto& pc = out.consistency[i];
      pc.labels_ok = image.labels_ok;
      pc.tokens = textprep::extract_nouns(comment_bodies(post), *src.lexicons, {src.dedupe_comment_tokens}).tokens;
      pc.labels = textprep::unique_labels(label_strings(image), *src.lexicons);
      if (pc.labels_ok) {
        pc.score = embeddings::consistency_score(pc.tokens, pc.labels, *src.embeddings);
        if (pc.score.value) set("consistency", *pc.score.value);
      }
    }

    if (const auto it = profile_row.find(image.image_hash); it != profile_row.end()) {
      row.segment(first_stage, stages) = src.profiles->residuals.row(it->second);
    }
  }

  const auto split = remove_outliers_iqr(joined.posts);
  std::unordered_set<std::string> removed;
  for (const auto& p : split.removed) removed.insert(p.post_id);
  for (const auto& id : t.post_ids) t.outlier.push_back(removed.count(id) > 0);
  return out;
}

std::vector<Eigen::Index> analysis_rows(const AnalysisTable& table, bool outlier_removal) {
  std::vector<Eigen::Index> rows;
  for (Eigen::Index r = 0; r < table.rows(); ++r) {
    if (!outlier_removal || !table.outlier[static_cast<std::size_t>(r)]) rows.push_back(r);
  }
  return rows;
}

RowSelection complete_rows(const AnalysisTable& table, const std::vector<Eigen::Index>& candidates,
                           const std::vector<std::string>& cols) {
  std::vector<Eigen::Index> idx;
  for (const auto& c : cols) idx.push_back(table.column(c));
  RowSelection out;
  for (const auto r : candidates) {
    const bool complete =
        std::none_of(idx.begin(), idx.end(), [&](Eigen::Index c) { return std::isnan(table.values(r, c)); });
    if (complete) {
      out.rows.push_back(r);
    } else {
      ++out.dropped;
    }
  }
  return out;
}

Eigen::MatrixXd gather(const AnalysisTable& table, const std::vector<Eigen::Index>& rows,
                       const std::vector<std::string>& cols) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    const Eigen::Index c = table.column(cols[static_cast<std::size_t>(j)]);
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = table.values(rows[static_cast<std::size_t>(i)], c);
  }
  return m;
}

std::vector<CorrelationRow> engagement_correlations(const AnalysisTable& table) {
  std::vector<CorrelationRow> out;
  for (const bool removal : {false, true}) {
    const auto base = analysis_rows(table, removal);
    const std::string assessment = removal ? "outliers_removed" : "all";

    std::vector<std::tuple<std::string, std::string, std::vector<Eigen::Index>>> groups;
    groups.emplace_back("overall", "all", base);
    for (const auto* keys : {&table.collection_runs, &table.subreddits}) {
      std::map<std::string, std::vector<Eigen::Index>> by_key;
      for (const auto r : base) {
        const auto& k = (*keys)[static_cast<std::size_t>(r)];
        by_key[k.empty() ? "unlabeled" : k].push_back(r);
      }
      const std::string scope = keys == &table.collection_runs ? "timepoint" : "subreddit";
      for (auto& [k, rows] : by_key) groups.emplace_back(scope, k, std::move(rows));
    }

    for (const auto& [scope, group, rows] : groups) {
      for (const char* y : {"num_comments", "post_score"}) {
        CorrelationRow row{assessment, scope, group, "memorability", y, static_cast<Eigen::Index>(rows.size())};
        try {
          if (rows.size() < 3) throw NumericError("fewer than 3 posts");
          const auto c = spearman_on(table, rows, "memorability", y);
          row.rho = c.rho;
          row.p_value = c.p_value;
        } catch (const Error& e) {
          if (scope == "overall") {
            throw NumericError("memorability vs " + std::string(y) + " (" + assessment + "): " + e.what());
          }
        }
        out.push_back(std::move(row));
      }
    }
  }
  return out;
}

std::vector<PartialRow> partial_correlations(const AnalysisTable& table, const std::vector<Eigen::Index>& rows) {
  struct Spec {
    std::string y;
    std::vector<std::string> controls;
  };
  const std::vector<Spec> specs{{"num_comments", {"caption_length", "resolution"}},
                                {"avg_sentiment", {"resolution", "file_size_kb"}},
                                {"consistency", {"comment_length"}}};
  std::vector<PartialRow> out;
  for (const auto& spec : specs) {
    if (column_all_missing(table, spec.y)) continue;
    std::vector<std::string> cols{"memorability", spec.y};
    cols.insert(cols.end(), spec.controls.begin(), spec.controls.end());
    const auto sel = complete_rows(table, rows, cols);
    const Eigen::MatrixXd m = gather(table, sel.rows, cols);
    try {
      const auto zero = stats::spearman(m.col(0), m.col(1));
      out.push_back({"memorability", spec.y, {}, zero.n, sel.dropped, zero.rho, zero.p_value});
      const auto partial = stats::partial_spearman(m.col(0), m.col(1), m.rightCols(m.cols() - 2), spec.controls);
      out.push_back({"memorability", spec.y, spec.controls, partial.n, sel.dropped, partial.rho, partial.p_value});
    } catch (const NumericError& e) {
      throw NumericError("memorability vs " + spec.y + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError("memorability vs " + spec.y + ": " + e.what());
    }
  }
  return out;
}

HeatmapResult covariate_heatmap(const AnalysisTable& table, const std::vector<Eigen::Index>& rows) {
  const auto& cols = heatmap_columns();
  const auto sel = complete_rows(table, rows, cols);
  if (sel.rows.size() < 3) throw DataError("covariate heatmap: fewer than 3 complete posts");
  return {stats::correlation_heatmap(gather(table, sel.rows, cols), cols), sel.dropped};
}

std::vector<SummaryRow> sentiment_summary(const AnalysisTable& table, const std::vector<Eigen::Index>& rows,
                                          Eigen::Index* dropped) {
  const auto sel = complete_rows(table, rows, {"memorability", "avg_sentiment", "sentiment_intensity"});
  if (dropped != nullptr) *dropped = sel.dropped;
  const Eigen::MatrixXd m = gather(table, sel.rows, {"memorability", "avg_sentiment", "sentiment_intensity"});
  std::vector<SummaryRow> out;
  for (Eigen::Index j : {1, 2}) {
    const auto c = stats::spearman(m.col(0), m.col(j));
    out.push_back({j == 1 ? "rho_memorability_avg_sentiment" : "rho_memorability_sentiment_intensity", "all", c.n,
                   c.rho, c.p_value});
  }
  const std::vector<double> mem(m.col(0).data(), m.col(0).data() + m.rows());
  const auto groups = median_split(mem);
  for (Eigen::Index j : {1, 2}) {
    for (const auto g : {MedianGroup::high, MedianGroup::low}) {
      double sum = 0.0;
      Eigen::Index k = 0;
      for (Eigen::Index i = 0; i < m.rows(); ++i) {
        if (groups[static_cast<std::size_t>(i)] != g) continue;
        sum += m(i, j);
        ++k;
      }
      out.push_back({j == 1 ? "mean_avg_sentiment" : "mean_sentiment_intensity",
                     g == MedianGroup::high ? "memorable" : "forgettable", k, k > 0 ? sum / static_cast<double>(k) : kNaN});
    }
  }
  return out;
}

LayerModelResult layer_models(const AnalysisTable& table, const std::vector<Eigen::Index>& rows,
                              const stats::GlmOptions& options) {
  std::vector<std::string> stage_cols;
  for (const auto s : features::kStages) stage_cols.push_back(distinct::stage_column_name(s));
  const auto sel = complete_rows(table, rows, stage_cols);
  distinct::DistinctivenessProfiles profiles;
  for (const auto r : sel.rows) profiles.image_hashes.push_back(table.image_hashes[static_cast<std::size_t>(r)]);
  profiles.residuals = gather(table, sel.rows, stage_cols);

  LayerModelResult out;
  out.design_dropped = sel.dropped;
  out.design = distinct::build_layer_design(profiles);
  const Eigen::MatrixXd y = gather(table, sel.rows, {"memorability", "num_comments", "avg_sentiment"});
  out.models = distinct::run_stage_models(out.design, {y.col(0), y.col(1), y.col(2)}, options);
  return out;
}

}  // namespace viramem::analysis
