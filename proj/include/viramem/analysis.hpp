#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "viramem/corpus.hpp"
#include "viramem/distinct.hpp"
#include "viramem/embeddings.hpp"
#include "viramem/features.hpp"
#include "viramem/sentiment.hpp"
#include "viramem/stats.hpp"
#include "viramem/textprep.hpp"

namespace viramem::analysis {

/// One row per post. Numeric cells live in `values` (NaN = missing) under
/// the names in `columns`.
struct AnalysisTable {
  std::vector<std::string> post_ids;
  std::vector<std::string> image_hashes;
  std::vector<std::string> subreddits;
  std::vector<std::string> collection_runs;
  std::vector<std::string> columns;
  Eigen::MatrixXd values;
  // Score or comment count outside the 1.5 IQR fences of the whole table.
  std::vector<bool> outlier;

  Eigen::Index rows() const { return values.rows(); }
  /// Throws DataError for an unknown name.
  Eigen::Index column(std::string_view name) const;
  auto col(std::string_view name) const { return values.col(column(name)); }
};

/// Column order of every AnalysisTable.
const std::vector<std::string>& table_columns();

/// Covariate heatmap variables, in display order.
const std::vector<std::string>& heatmap_columns();

/// Posts whose image has a feature record, in corpus order.
struct JoinedCorpus {
  Corpus posts;
  std::vector<std::size_t> image_index;  // into manifest.images
  std::int64_t without_features = 0;
};

JoinedCorpus join_features(const Corpus& corpus, const features::Manifest& manifest);

/// Optional inputs leave their columns NaN.
struct TableSources {
  const sentiment::SentimentRuleset* sentiment_rules = nullptr;
  const textprep::LexiconSet* lexicons = nullptr;
  const embeddings::EmbeddingTable* embeddings = nullptr;
  bool dedupe_comment_tokens = false;
  // Residual columns are looked up by image hash.
  const distinct::DistinctivenessProfiles* profiles = nullptr;
  UtcOffset timezone;
  std::optional<Timestamp> reference_time;
};

struct PostConsistency {
  std::vector<std::string> tokens;
  std::vector<std::string> labels;
  bool labels_ok = true;
  embeddings::ConsistencyScore score;
};

struct BuiltTable {
  AnalysisTable table;
  std::vector<PostConsistency> consistency;  // aligned with table rows
};

/// Fills every column and the outlier flags (fences need at least 4 rows).
BuiltTable build_table(const JoinedCorpus& joined, const features::Manifest& manifest, const TableSources& sources);

/// Comment nouns and label words the consistency metric will look up.
std::vector<std::string> embedding_vocabulary(const JoinedCorpus& joined, const features::Manifest& manifest,
                                              const textprep::LexiconSet& lexicons, bool dedupe_comment_tokens);

/// All rows, or the non-outliers when `outlier_removal` is set.
std::vector<Eigen::Index> analysis_rows(const AnalysisTable& table, bool outlier_removal);

struct RowSelection {
  std::vector<Eigen::Index> rows;
  Eigen::Index dropped = 0;
};

/// Listwise completeness: rows of `candidates` with no NaN in `cols`.
RowSelection complete_rows(const AnalysisTable& table, const std::vector<Eigen::Index>& candidates,
                           const std::vector<std::string>& cols);

Eigen::MatrixXd gather(const AnalysisTable& table, const std::vector<Eigen::Index>& rows,
                       const std::vector<std::string>& cols);

struct CorrelationRow {
  std::string assessment;  // "all" or "outliers_removed"
  std::string scope;       // "overall", "timepoint" or "subreddit"
  std::string group;
  std::string x;
  std::string y;
  Eigen::Index n = 0;
  double rho = std::numeric_limits<double>::quiet_NaN();
  double p_value = std::numeric_limits<double>::quiet_NaN();
};

/// Memorability against comments and score, overall and per timepoint and
/// subreddit, with and without outlier removal. Groups too small or
/// constant for a correlation get NaN cells; the overall rows must succeed.
std::vector<CorrelationRow> engagement_correlations(const AnalysisTable& table);

struct PartialRow {
  std::string x;
  std::string y;
  std::vector<std::string> controls;
  Eigen::Index n = 0;
  Eigen::Index dropped = 0;
  double rho = 0.0;
  double p_value = 1.0;
};

/// Memorability against comments (controls caption length and resolution),
/// sentiment (resolution and file size) and consistency (comment length),
/// each with its zero-order counterpart.
std::vector<PartialRow> partial_correlations(const AnalysisTable& table, const std::vector<Eigen::Index>& rows);

struct HeatmapResult {
  stats::CorrelationMatrix matrix;
  Eigen::Index dropped = 0;
};

HeatmapResult covariate_heatmap(const AnalysisTable& table, const std::vector<Eigen::Index>& rows);

struct SummaryRow {
  std::string quantity;
  std::string group;
  Eigen::Index n = 0;
  double value = 0.0;
  double p_value = std::numeric_limits<double>::quiet_NaN();
};

/// Spearman of memorability with mean sentiment and intensity, and both
/// means for the memorable (above-median) and forgettable groups.
std::vector<SummaryRow> sentiment_summary(const AnalysisTable& table, const std::vector<Eigen::Index>& rows,
                                          Eigen::Index* dropped = nullptr);

struct LayerModelResult {
  distinct::LayerDesign design;
  distinct::StageModels models;
  Eigen::Index design_dropped = 0;
};

/// Stage-residual GLMs on the given rows. Rows without residuals are
/// dropped; each target then drops its own missing values.
LayerModelResult layer_models(const AnalysisTable& table, const std::vector<Eigen::Index>& rows,
                              const stats::GlmOptions& options = {});

}  // namespace viramem::analysis
