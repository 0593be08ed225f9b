#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "viramem/analysis.hpp"

namespace viramem::report {

/// Shortest round-trip form ("%.17g" trimmed), "NA" for NaN.
std::string format_number(double v);

/// RFC 4180 quoting when the field holds a comma, quote or line break.
std::string csv_field(std::string_view s);

/// Splits CSV text into rows of fields (quoted fields supported).
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

std::string analysis_table_csv(const analysis::AnalysisTable& table);
std::string correlations_csv(const std::vector<analysis::CorrelationRow>& rows);
std::string partials_csv(const std::vector<analysis::PartialRow>& rows);
std::string sentiment_csv(const std::vector<analysis::SummaryRow>& rows);
std::string consistency_csv(const analysis::AnalysisTable& table,
                            const std::vector<analysis::PostConsistency>& details);

/// Long format: one line per ordered pair, in column order.
std::string heatmap_csv(const stats::CorrelationMatrix& m);
stats::CorrelationMatrix heatmap_from_csv(std::string_view text);

std::string layer_models_json(const analysis::LayerModelResult& result);

/// One panel per target: coefficient, CI bounds per stage (intercept left out).
struct CoefficientPanel {
  std::string target;
  std::string family;
  std::vector<std::string> names;
  std::vector<double> estimate;
  std::vector<double> ci_lower;
  std::vector<double> ci_upper;
  std::vector<double> p_value;
};

std::vector<CoefficientPanel> coefficient_panels_from_json(std::string_view text);

/// k x k grid colored by rho (blue negative, red positive), "*" where p < .05.
std::string heatmap_svg(const stats::CorrelationMatrix& m);

/// Side-by-side bar panels with 95% CI whiskers.
std::string coefficients_svg(const std::vector<CoefficientPanel>& panels);

inline constexpr const char* kHeatmapCsv = "heatmap.csv";
inline constexpr const char* kLayerModelsJson = "layer_models.json";

/// Rebuilds heatmap.svg and coefficients.svg from the CSV/JSON results in
/// `dir`. Missing inputs throw DataError listing every absent file.
std::vector<std::filesystem::path> cmd_report(const std::filesystem::path& dir);

}  // namespace viramem::report
