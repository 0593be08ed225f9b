#include "viramem/stats.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <limits>

namespace viramem::stats {

namespace {

void require_same_length(Eigen::Index a, Eigen::Index b, const char* what) {
  if (a != b) {
    throw DataError(std::string(what) + ": length mismatch (" + std::to_string(a) + " vs " + std::to_string(b) + ")");
  }
}

void require_finite(const Eigen::Ref<const Eigen::VectorXd>& v, const char* what) {
  if (!v.allFinite()) throw DataError(std::string(what) + ": non-finite input");
}

// Residual norms below this fraction of the input spread count as zero.
constexpr double kDegenerateRelTol = 1e-10;

}  // namespace

std::string to_string(CorrelationMethod m) {
  switch (m) {
    case CorrelationMethod::spearman: return "spearman";
    case CorrelationMethod::pearson: return "pearson";
    case CorrelationMethod::partial_spearman: return "partial_spearman";
  }
  return "unknown";
}

double pearson_r(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y) {
  require_same_length(x.size(), y.size(), "pearson");
  const Eigen::VectorXd xc = x.array() - x.mean();
  const Eigen::VectorXd yc = y.array() - y.mean();
  const double sxx = xc.squaredNorm();
  const double syy = yc.squaredNorm();
  if (sxx == 0.0 || syy == 0.0) throw NumericError("degenerate correlation: zero variance input");
  // sqrt of the product (not product of sqrts) keeps r = 1 exact for x == y.
  return std::clamp(xc.dot(yc) / std::sqrt(sxx * syy), -1.0, 1.0);
}

double correlation_p_value(double r, double df) {
  if (!(df > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  if (std::abs(r) >= 1.0) return 0.0;
  const double t = r * std::sqrt(df / ((1.0 - r) * (1.0 + r)));
  const boost::math::students_t dist(df);
  return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))));
}

CorrelationResult pearson(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y) {
  require_same_length(x.size(), y.size(), "pearson");
  if (x.size() < 3) throw DataError("pearson: need at least 3 observations");
  require_finite(x, "pearson");
  require_finite(y, "pearson");
  CorrelationResult out;
  out.method = CorrelationMethod::pearson;
  out.n = x.size();
  out.rho = pearson_r(x, y);
  out.p_value = correlation_p_value(out.rho, static_cast<double>(out.n - 2));
  return out;
}

CorrelationResult spearman(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y) {
  require_same_length(x.size(), y.size(), "spearman");
  if (x.size() < 3) throw DataError("spearman: need at least 3 observations");
  require_finite(x, "spearman");
  require_finite(y, "spearman");
  CorrelationResult out;
  out.method = CorrelationMethod::spearman;
  out.n = x.size();
  out.rho = pearson_r(rank(x), rank(y));
  out.p_value = correlation_p_value(out.rho, static_cast<double>(out.n - 2));
  return out;
}

double spearman_permutation_p(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y) {
  require_same_length(x.size(), y.size(), "spearman_permutation_p");
  const Eigen::Index n = x.size();
  if (n < 3 || n > 10) throw DataError("spearman_permutation_p: requires 3 <= n <= 10");
  const Eigen::VectorXd rx = rank(x);
  Eigen::VectorXd ry = rank(y);
  const double observed = std::abs(pearson_r(rx, ry));
  std::vector<double> pool(ry.data(), ry.data() + n);
  std::sort(pool.begin(), pool.end());
  long long hits = 0;
  long long total = 0;
  do {
    const Eigen::Map<const Eigen::VectorXd> perm(pool.data(), n);
    if (std::abs(pearson_r(rx, perm)) >= observed - 1e-12) ++hits;
    ++total;
  } while (std::next_permutation(pool.begin(), pool.end()));
  return static_cast<double>(hits) / static_cast<double>(total);
}

CorrelationResult partial_spearman(const Eigen::Ref<const Eigen::VectorXd>& x,
                                   const Eigen::Ref<const Eigen::VectorXd>& y,
                                   const Eigen::Ref<const Eigen::MatrixXd>& controls,
                                   std::vector<std::string> control_names) {
  require_same_length(x.size(), y.size(), "partial_spearman");
  require_same_length(x.size(), controls.rows(), "partial_spearman controls");
  const Eigen::Index n = x.size();
  const Eigen::Index k = controls.cols();
  if (n <= k + 2) throw DataError("partial_spearman: need n > #controls + 2");
  require_finite(x, "partial_spearman");
  require_finite(y, "partial_spearman");
  if (!controls.allFinite()) throw DataError("partial_spearman: non-finite control");

  Eigen::MatrixXd design(n, k + 1);
  design.col(0).setOnes();
  for (Eigen::Index j = 0; j < k; ++j) design.col(j + 1) = rank(controls.col(j));
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < k + 1) throw NumericError("partial_spearman: collinear controls (rank-deficient design)");

  const Eigen::VectorXd rx = rank(x);
  const Eigen::VectorXd ry = rank(y);
  const Eigen::VectorXd ex = rx - design * qr.solve(rx);
  const Eigen::VectorXd ey = ry - design * qr.solve(ry);
  const double sx = (rx.array() - rx.mean()).matrix().norm();
  const double sy = (ry.array() - ry.mean()).matrix().norm();
  if (ex.norm() <= kDegenerateRelTol * std::max(sx, 1.0) || ey.norm() <= kDegenerateRelTol * std::max(sy, 1.0)) {
    throw NumericError("partial_spearman: degenerate residual variance");
  }

  CorrelationResult out;
  out.method = CorrelationMethod::partial_spearman;
  out.n = n;
  out.controls = std::move(control_names);
  out.rho = pearson_r(ex, ey);
  out.p_value = correlation_p_value(out.rho, static_cast<double>(n - 2 - k));
  return out;
}

double quantile(const Eigen::Ref<const Eigen::VectorXd>& values, double p) {
  if (values.size() == 0) throw DataError("quantile of empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw DataError("quantile probability outside [0, 1]");
  require_finite(values, "quantile");
  std::vector<double> sorted(values.data(), values.data() + values.size());
  std::sort(sorted.begin(), sorted.end());
  const double h = static_cast<double>(sorted.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

Fences iqr_bounds(const Eigen::Ref<const Eigen::VectorXd>& values) {
  if (values.size() < 4) throw DataError("iqr_bounds: need at least 4 values, got " + std::to_string(values.size()));
  Fences f;
  f.q1 = quantile(values, 0.25);
  f.q3 = quantile(values, 0.75);
  const double iqr = f.q3 - f.q1;
  f.lower = f.q1 - 1.5 * iqr;
  f.upper = f.q3 + 1.5 * iqr;
  return f;
}

CorrelationMatrix correlation_heatmap(const Eigen::Ref<const Eigen::MatrixXd>& table, std::vector<std::string> names) {
  const Eigen::Index k = table.cols();
  if (k < 2) throw DataError("correlation_heatmap: need at least 2 columns");
  if (static_cast<Eigen::Index>(names.size()) != k) throw DataError("correlation_heatmap: one name per column required");
  if (table.rows() < 3) throw DataError("correlation_heatmap: need at least 3 rows");
  if (!table.allFinite()) throw DataError("correlation_heatmap: rows must be complete");

  CorrelationMatrix out;
  out.names = std::move(names);
  out.n = table.rows();
  out.rho = Eigen::MatrixXd::Identity(k, k);
  out.p_value = Eigen::MatrixXd::Zero(k, k);
  out.degenerate.assign(static_cast<std::size_t>(k), false);
  for (Eigen::Index j = 0; j < k; ++j) {
    out.degenerate[static_cast<std::size_t>(j)] = (table.col(j).array() == table(0, j)).all();
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = i + 1; j < k; ++j) {
      double r = nan;
      double p = nan;
      if (!out.degenerate[static_cast<std::size_t>(i)] && !out.degenerate[static_cast<std::size_t>(j)]) {
        const CorrelationResult c = spearman(table.col(i), table.col(j));
        r = c.rho;
        p = c.p_value;
      }
      out.rho(i, j) = out.rho(j, i) = r;
      out.p_value(i, j) = out.p_value(j, i) = p;
    }
  }
  return out;
}

}  // namespace viramem::stats
