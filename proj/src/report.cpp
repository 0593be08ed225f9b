#include "viramem/report.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "viramem/error.hpp"
#include "viramem/fsutil.hpp"

namespace viramem::report {

namespace {

using nlohmann::ordered_json;

std::string join(const std::vector<std::string>& parts, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += sep;
    out += parts[i];
  }
  return out;
}

std::string csv_line(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) out += ',';
    out += csv_field(fields[i]);
  }
  return out + "\n";
}

std::string count(Eigen::Index n) { return std::to_string(n); }

// Fixed-point text for figures.
std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  std::string s(buf);
  return s == "-0.00" || s == "-0.0" || s == "-0" ? s.substr(1) : s;
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

double parse_number(const std::string& s, const std::string& what) {
  if (s == "NA") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw DataError(what + ": not a number: '" + s + "'");
  return v;
}

double json_number(const nlohmann::json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

ordered_json json_number(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

// Diverging white-centred ramp.
std::string rho_color(double rho) {
  if (std::isnan(rho)) return "#cccccc";
  const double t = std::clamp(std::abs(rho), 0.0, 1.0);
  const int fade = static_cast<int>(std::lround(255.0 * (1.0 - t)));
  char buf[8];
  if (rho >= 0) {
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", 255, fade, fade);
  } else {
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", fade, fade, 255);
  }
  return buf;
}

ordered_json fit_json(const std::string& target, const stats::ModelFit& f) {
  ordered_json j;
  j["target"] = target;
  j["family"] = stats::to_string(f.family);
  j["link"] = stats::to_string(f.link);
  j["n"] = f.n;
  j["converged"] = f.converged;
  j["iterations"] = f.iterations;
  j["log_likelihood"] = json_number(f.log_likelihood);
  if (f.family == stats::Family::negative_binomial) {
    j["dispersion_alpha"] = json_number(f.dispersion_alpha);
    j["dispersion_converged"] = f.dispersion_converged;
  } else {
    j["scale"] = json_number(f.scale);
    j["r_squared"] = json_number(f.r_squared);
  }
  ordered_json coefs = ordered_json::array();
  for (Eigen::Index k = 0; k < f.coefficients.size(); ++k) {
    ordered_json c;
    c["name"] = f.names[static_cast<std::size_t>(k)];
    c["estimate"] = json_number(f.coefficients(k));
    c["std_error"] = json_number(f.standard_errors(k));
    c["ci_lower"] = json_number(f.ci_lower(k));
    c["ci_upper"] = json_number(f.ci_upper(k));
    c["p_value"] = json_number(f.p_values(k));
    coefs.push_back(std::move(c));
  }
  j["coefficients"] = std::move(coefs);
  return j;
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "NA";
  if (std::isinf(v)) return v > 0 ? "Inf" : "-Inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    any = true;
    if (quoted) {
      if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      row.push_back(std::move(field));
      field.clear();
      rows.push_back(std::move(row));
      row.clear();
      any = false;
    } else {
      field += c;
    }
  }
  if (quoted) throw DataError("csv: unterminated quoted field");
  if (any) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string analysis_table_csv(const analysis::AnalysisTable& t) {
  std::vector<std::string> header{"post_id", "image_hash", "subreddit", "collection_run", "outlier"};
  header.insert(header.end(), t.columns.begin(), t.columns.end());
  std::string out = csv_line(header);
  for (Eigen::Index r = 0; r < t.rows(); ++r) {
    const auto i = static_cast<std::size_t>(r);
    std::vector<std::string> f{t.post_ids[i], t.image_hashes[i], t.subreddits[i], t.collection_runs[i],
                               t.outlier[i] ? "1" : "0"};
    for (Eigen::Index c = 0; c < t.values.cols(); ++c) f.push_back(format_number(t.values(r, c)));
    out += csv_line(f);
  }
  return out;
}

std::string correlations_csv(const std::vector<analysis::CorrelationRow>& rows) {
  std::string out = csv_line({"assessment", "scope", "group", "x", "y", "method", "n", "rho", "p_value"});
  for (const auto& r : rows) {
    out += csv_line({r.assessment, r.scope, r.group, r.x, r.y, "spearman", count(r.n), format_number(r.rho),
                     format_number(r.p_value)});
  }
  return out;
}

std::string partials_csv(const std::vector<analysis::PartialRow>& rows) {
  std::string out = csv_line({"x", "y", "method", "controls", "n", "dropped", "rho", "p_value"});
  for (const auto& r : rows) {
    out += csv_line({r.x, r.y, r.controls.empty() ? "spearman" : "partial_spearman", join(r.controls, ";"),
                     count(r.n), count(r.dropped), format_number(r.rho), format_number(r.p_value)});
  }
  return out;
}

std::string sentiment_csv(const std::vector<analysis::SummaryRow>& rows) {
  std::string out = csv_line({"quantity", "group", "n", "value", "p_value"});
  for (const auto& r : rows) {
    out += csv_line({r.quantity, r.group, count(r.n), format_number(r.value), format_number(r.p_value)});
  }
  return out;
}

std::string consistency_csv(const analysis::AnalysisTable& t, const std::vector<analysis::PostConsistency>& details) {
  std::string out = csv_line({"post_id", "image_hash", "memorability", "consistency", "comment_length", "labels_ok",
                              "labels", "tokens", "matched_tokens", "skipped_tokens", "matches"});
  const auto mem = t.col("memorability");
  const auto cons = t.col("consistency");
  const auto len = t.col("comment_length");
  for (Eigen::Index r = 0; r < t.rows(); ++r) {
    const auto i = static_cast<std::size_t>(r);
    const auto& d = details.at(i);
    std::vector<std::string> matches;
    for (const auto& m : d.score.matched_pairs) matches.push_back(m.token + ">" + m.label + ":" + format_number(m.cosine));
    out += csv_line({t.post_ids[i], t.image_hashes[i], format_number(mem(r)), format_number(cons(r)),
                     format_number(len(r)), d.labels_ok ? "1" : "0", join(d.labels, " "), join(d.tokens, " "),
                     std::to_string(d.score.matched_pairs.size()), std::to_string(d.score.skipped_tokens),
                     join(matches, " ")});
  }
  return out;
}

std::string heatmap_csv(const stats::CorrelationMatrix& m) {
  std::string out = csv_line({"x", "y", "n", "rho", "p_value"});
  const auto k = static_cast<Eigen::Index>(m.names.size());
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) {
      out += csv_line({m.names[static_cast<std::size_t>(i)], m.names[static_cast<std::size_t>(j)], count(m.n),
                       format_number(m.rho(i, j)), format_number(m.p_value(i, j))});
    }
  }
  return out;
}

stats::CorrelationMatrix heatmap_from_csv(std::string_view text) {
  const auto rows = parse_csv(text);
  if (rows.empty() || rows[0] != std::vector<std::string>{"x", "y", "n", "rho", "p_value"}) {
    throw DataError("heatmap.csv: unexpected header");
  }
  stats::CorrelationMatrix m;
  std::map<std::string, Eigen::Index> index;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != 5) throw DataError("heatmap.csv: line " + std::to_string(r + 1) + " needs 5 fields");
    if (!index.count(rows[r][0])) {
      index[rows[r][0]] = static_cast<Eigen::Index>(m.names.size());
      m.names.push_back(rows[r][0]);
    }
  }
  const auto k = static_cast<Eigen::Index>(m.names.size());
  if (rows.size() - 1 != static_cast<std::size_t>(k * k)) throw DataError("heatmap.csv: expected a full k x k grid");
  m.rho = Eigen::MatrixXd::Constant(k, k, std::numeric_limits<double>::quiet_NaN());
  m.p_value = m.rho;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto i = index.at(rows[r][0]);
    const auto jt = index.find(rows[r][1]);
    if (jt == index.end()) throw DataError("heatmap.csv: unknown variable " + rows[r][1]);
    m.n = static_cast<Eigen::Index>(parse_number(rows[r][2], "heatmap.csv n"));
    m.rho(i, jt->second) = parse_number(rows[r][3], "heatmap.csv rho");
    m.p_value(i, jt->second) = parse_number(rows[r][4], "heatmap.csv p_value");
  }
  for (Eigen::Index i = 0; i < k; ++i) {
    bool all_nan = k > 1;
    for (Eigen::Index j = 0; j < k; ++j) all_nan = all_nan && (i == j || std::isnan(m.rho(i, j)));
    m.degenerate.push_back(all_nan);
  }
  return m;
}

std::string layer_models_json(const analysis::LayerModelResult& result) {
  ordered_json j;
  j["n_design"] = result.design.X.rows();
  j["design_dropped"] = result.design_dropped;
  j["predictors"] = result.design.names;
  ordered_json vif;
  for (std::size_t k = 0; k < result.design.vif.names.size(); ++k) {
    vif[result.design.vif.names[k]] = json_number(result.design.vif.vif(static_cast<Eigen::Index>(k)));
  }
  j["vif"] = std::move(vif);
  j["models"] = ordered_json::array({fit_json("memorability", result.models.memorability),
                                     fit_json("comments", result.models.comments),
                                     fit_json("sentiment", result.models.sentiment)});
  return j.dump(2) + "\n";
}

std::vector<CoefficientPanel> coefficient_panels_from_json(std::string_view text) {
  std::vector<CoefficientPanel> out;
  try {
    const auto j = nlohmann::json::parse(text);
    for (const auto& m : j.at("models")) {
      CoefficientPanel p;
      p.target = m.at("target").get<std::string>();
      p.family = m.at("family").get<std::string>();
      for (const auto& c : m.at("coefficients")) {
        const auto name = c.at("name").get<std::string>();
        if (name == "intercept") continue;
        p.names.push_back(name);
        p.estimate.push_back(json_number(c.at("estimate")));
        p.ci_lower.push_back(json_number(c.at("ci_lower")));
        p.ci_upper.push_back(json_number(c.at("ci_upper")));
        p.p_value.push_back(json_number(c.at("p_value")));
      }
      out.push_back(std::move(p));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("layer_models.json: ") + e.what());
  }
  return out;
}

std::string heatmap_svg(const stats::CorrelationMatrix& m) {
  const int k = static_cast<int>(m.names.size());
  constexpr int cell = 56;
  constexpr int left = 140;
  constexpr int top = 150;
  const int width = left + k * cell + 20;
  const int height = top + k * cell + 40;
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
    << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << left << "\" y=\"20\" font-size=\"14\">Spearman rho (n = " << m.n
    << ", * p &lt; .05)</text>\n";
  for (int i = 0; i < k; ++i) {
    const auto name = xml_escape(m.names[static_cast<std::size_t>(i)]);
    const int cy = top + i * cell + cell / 2 + 4;
    s << "<text x=\"" << left - 6 << "\" y=\"" << cy << "\" text-anchor=\"end\">" << name << "</text>\n";
    const int cx = left + i * cell + cell / 2;
    s << "<text transform=\"translate(" << cx << "," << top - 6 << ") rotate(-60)\">" << name << "</text>\n";
  }
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      const double rho = m.rho(i, j);
      const double p = m.p_value(i, j);
      const int x = left + j * cell;
      const int y = top + i * cell;
      s << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << cell << "\" height=\"" << cell << "\" fill=\""
        << rho_color(rho) << "\" stroke=\"white\"/>\n";
      const std::string label = std::isnan(rho) ? "NA" : fixed(rho, 2) + (i != j && p < 0.05 ? "*" : "");
      s << "<text x=\"" << x + cell / 2 << "\" y=\"" << y + cell / 2 + 4 << "\" text-anchor=\"middle\">" << label
        << "</text>\n";
    }
  }
  s << "</svg>\n";
  return s.str();
}

std::string coefficients_svg(const std::vector<CoefficientPanel>& panels) {
  constexpr int panel_w = 320;
  constexpr int panel_h = 340;
  constexpr int pad_left = 60;
  constexpr int pad_top = 40;
  constexpr int plot_h = 200;
  const int width = static_cast<int>(panels.size()) * panel_w + 20;
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << panel_h
    << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (std::size_t p = 0; p < panels.size(); ++p) {
    const auto& panel = panels[p];
    const int ox = static_cast<int>(p) * panel_w;
    double lo = 0.0;
    double hi = 0.0;
    for (std::size_t k = 0; k < panel.names.size(); ++k) {
      for (double v : {panel.estimate[k], panel.ci_lower[k], panel.ci_upper[k]}) {
        if (std::isfinite(v)) {
          lo = std::min(lo, v);
          hi = std::max(hi, v);
        }
      }
    }
    if (hi - lo <= 0.0) hi = lo + 1.0;
    const double margin = 0.05 * (hi - lo);
    lo -= margin;
    hi += margin;
    const auto ypix = [&](double v) { return pad_top + (hi - v) / (hi - lo) * plot_h; };
    const int plot_w = panel_w - pad_left - 20;
    const int n = static_cast<int>(panel.names.size());
    const double slot = n > 0 ? static_cast<double>(plot_w) / n : plot_w;

    s << "<g>\n";
    s << "<text x=\"" << ox + pad_left << "\" y=\"20\" font-size=\"14\">" << xml_escape(panel.target) << " ("
      << xml_escape(panel.family) << ")</text>\n";
    s << "<line x1=\"" << ox + pad_left << "\" y1=\"" << pad_top << "\" x2=\"" << ox + pad_left << "\" y2=\""
      << pad_top + plot_h << "\" stroke=\"black\"/>\n";
    for (double v : {lo, 0.0, hi}) {
      s << "<text x=\"" << ox + pad_left - 4 << "\" y=\"" << fixed(ypix(v) + 4, 1) << "\" text-anchor=\"end\">"
        << fixed(v, 2) << "</text>\n";
    }
    s << "<line x1=\"" << ox + pad_left << "\" y1=\"" << fixed(ypix(0.0), 1) << "\" x2=\"" << ox + pad_left + plot_w
      << "\" y2=\"" << fixed(ypix(0.0), 1) << "\" stroke=\"black\"/>\n";
    for (int k = 0; k < n; ++k) {
      const auto i = static_cast<std::size_t>(k);
      const double cx = ox + pad_left + slot * (k + 0.5);
      const double bw = slot * 0.6;
      const double est = panel.estimate[i];
      const bool significant = std::isfinite(panel.ci_lower[i]) && std::isfinite(panel.ci_upper[i]) &&
                               (panel.ci_lower[i] > 0.0 || panel.ci_upper[i] < 0.0);
      if (std::isfinite(est)) {
        const double y0 = ypix(std::max(est, 0.0));
        const double h = std::abs(ypix(est) - ypix(0.0));
        s << "<rect x=\"" << fixed(cx - bw / 2, 1) << "\" y=\"" << fixed(y0, 1) << "\" width=\"" << fixed(bw, 1)
          << "\" height=\"" << fixed(h, 1) << "\" fill=\"" << (significant ? "#3b6ea5" : "#a9c1dc") << "\"/>\n";
      }
      if (std::isfinite(panel.ci_lower[i]) && std::isfinite(panel.ci_upper[i])) {
        const auto yl = fixed(ypix(panel.ci_lower[i]), 1);
        const auto yu = fixed(ypix(panel.ci_upper[i]), 1);
        s << "<line x1=\"" << fixed(cx, 1) << "\" y1=\"" << yl << "\" x2=\"" << fixed(cx, 1) << "\" y2=\"" << yu
          << "\" stroke=\"black\"/>\n";
        for (const auto& y : {yl, yu}) {
          s << "<line x1=\"" << fixed(cx - bw / 4, 1) << "\" y1=\"" << y << "\" x2=\"" << fixed(cx + bw / 4, 1)
            << "\" y2=\"" << y << "\" stroke=\"black\"/>\n";
        }
      }
      s << "<text transform=\"translate(" << fixed(cx + 4, 1) << "," << pad_top + plot_h + 10
        << ") rotate(60)\">" << xml_escape(panel.names[i]) << "</text>\n";
    }
    s << "</g>\n";
  }
  s << "</svg>\n";
  return s.str();
}

std::vector<std::filesystem::path> cmd_report(const std::filesystem::path& dir) {
  std::vector<std::string> missing;
  for (const char* name : {kHeatmapCsv, kLayerModelsJson}) {
    if (!std::filesystem::is_regular_file(dir / name)) missing.push_back((dir / name).string());
  }
  if (!missing.empty()) {
    std::string msg = "missing report inputs:";
    for (const auto& m : missing) msg += " " + m;
    throw DataError(msg);
  }
  const auto heatmap = heatmap_from_csv(read_file(dir / kHeatmapCsv));
  const auto panels = coefficient_panels_from_json(read_file(dir / kLayerModelsJson));
  const auto heatmap_path = dir / "heatmap.svg";
  const auto coef_path = dir / "coefficients.svg";
  write_file_atomic(heatmap_path, heatmap_svg(heatmap));
  write_file_atomic(coef_path, coefficients_svg(panels));
  return {heatmap_path, coef_path};
}

}  // namespace viramem::report
