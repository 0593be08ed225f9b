#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "viramem/distinct.hpp"
#include "viramem/textprep.hpp"
#include "viramem/time.hpp"

namespace viramem {

struct AnalysisSelection {
  bool correlations = true;
  bool partials = true;
  bool heatmap = true;
  bool sentiment = true;
  bool consistency = true;
  bool layer_models = true;
};

struct RunConfig {
  std::filesystem::path corpus_path;
  std::filesystem::path feature_dir;
  std::filesystem::path embedding_path;
  Eigen::Index embedding_dimension = 100;
  textprep::LexiconPaths lexicon_paths;
  std::filesystem::path sentiment_lexicon;
  std::filesystem::path sentiment_rules;
  UtcOffset timezone;
  // Posted duration is measured to this instant; unset means each post's
  // own fetched_at.
  std::optional<Timestamp> reference_time;
  // Drop 1.5 IQR score/comment outliers before the downstream analyses.
  bool outlier_removal = true;
  bool dedupe_comment_tokens = false;
  std::filesystem::path output_dir;
  AnalysisSelection analyses;
  distinct::LayerOptions distance;

  /// Lexicon and sentiment files shipped under `data_dir`.
  static RunConfig with_defaults(const std::filesystem::path& data_dir);
};

/// Parses the JSON config. Unknown keys are rejected; relative paths are
/// resolved against `base_dir`; lexicon paths not given come from
/// `data_dir`. Throws DataError.
RunConfig parse_run_config(const std::string& json_text, const std::filesystem::path& base_dir,
                           const std::filesystem::path& data_dir);

RunConfig load_run_config(const std::filesystem::path& path, const std::filesystem::path& data_dir);

/// Canonical JSON form (absolute paths), used for the run sidecar.
std::string run_config_to_json_text(const RunConfig& config);

/// Input paths the selected analyses need but which do not exist.
std::vector<std::string> missing_inputs(const RunConfig& config);

}  // namespace viramem
