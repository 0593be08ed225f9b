#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "viramem/analysis.hpp"
#include "viramem/config.hpp"
#include "viramem/reddit.hpp"

namespace viramem::pipeline {

inline constexpr const char* kCorrelationsCsv = "correlations.csv";
inline constexpr const char* kCorrelationsNoRemovalCsv = "correlations_no_outlier_removal.csv";
inline constexpr const char* kRunMetadata = "run_metadata.json";

/// Result files for a config, in emission order (sidecar excluded).
std::vector<std::string> expected_outputs(const RunConfig& config);

struct AnalyzeResult {
  analysis::AnalysisTable table;
  std::vector<std::filesystem::path> outputs;
  std::filesystem::path metadata;
};

/// Runs every selected analysis in a fixed stage order. Results are written
/// to a staging directory and moved into output_dir only when all stages
/// succeed; on failure nothing new is left behind and the error (DataError
/// or NumericError) names the failing stage. Run details that vary between
/// runs (timestamps, warnings, dropped-row counts) go to run_metadata.json.
AnalyzeResult cmd_analyze(const RunConfig& config);

struct Check {
  std::string name;
  bool ok = true;
  std::string detail;
};

struct ValidationReport {
  std::vector<Check> checks;
  std::vector<std::pair<std::string, std::string>> coverage;

  bool ok() const;
  /// "ok|FAIL  <name>: <detail>" lines, then "coverage <key>: <value>".
  std::string to_text() const;
};

/// Never throws on bad inputs: every problem becomes a failed check.
ValidationReport cmd_validate(const RunConfig& config);

struct FetchPaths {
  std::filesystem::path corpus;      // read if present, then rewritten
  std::filesystem::path images;      // content-addressed image store
  std::filesystem::path cursor;      // empty: start from the top of every listing
  std::filesystem::path receipt;     // empty: "<corpus>.receipt.json"
};

/// One collection run appended to the corpus at `paths.corpus`; the merged
/// corpus is deduplicated before it is written back.
reddit::FetchReceipt cmd_fetch(const reddit::FetchConfig& config, const FetchPaths& paths,
                               http::Transport& transport, http::Clock& clock);

}  // namespace viramem::pipeline
