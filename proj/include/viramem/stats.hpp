#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "viramem/error.hpp"

namespace viramem::stats {

enum class CorrelationMethod { spearman, pearson, partial_spearman };

std::string to_string(CorrelationMethod m);

struct CorrelationResult {
  double rho = 0.0;
  double p_value = 1.0;
  Eigen::Index n = 0;
  CorrelationMethod method = CorrelationMethod::spearman;
  std::vector<std::string> controls;
};

/// Ranks 1..n with tied values sharing the mean of their positions.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> rank(const Eigen::DenseBase<Derived>& values) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = values.size();
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(n);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::isnan(static_cast<double>(values(i)))) throw DataError("rank: NaN at position " + std::to_string(i));
    order[static_cast<std::size_t>(i)] = i;
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return values(a) < values(b); });
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i + 1;
    while (j < order.size() && values(order[j]) == values(order[i])) ++j;
    // Positions i..j-1 (0-based) share rank mean((i+1)..j).
    const Scalar r = static_cast<Scalar>(i + 1 + j) / Scalar(2);
    for (std::size_t k = i; k < j; ++k) out(order[k]) = r;
    i = j;
  }
  return out;
}

/// Pearson r. Throws NumericError when either input has zero variance.
double pearson_r(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y);

/// Two-sided p-value of a correlation under the t approximation with `df`
/// degrees of freedom. |r| = 1 gives 0.
double correlation_p_value(double r, double df);

CorrelationResult pearson(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y);

CorrelationResult spearman(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y);

/// Exact two-sided permutation p-value for Spearman rho, n <= 10.
double spearman_permutation_p(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y);

/// Ranks x, y and every control column, residualizes ranked x and y on
/// [1, ranked controls] and correlates the residuals. df = n - 2 - k.
CorrelationResult partial_spearman(const Eigen::Ref<const Eigen::VectorXd>& x,
                                   const Eigen::Ref<const Eigen::VectorXd>& y,
                                   const Eigen::Ref<const Eigen::MatrixXd>& controls,
                                   std::vector<std::string> control_names = {});

/// Linear interpolation between order statistics (h = (n-1)p).
double quantile(const Eigen::Ref<const Eigen::VectorXd>& values, double p);

struct Fences {
  double q1 = 0.0;
  double q3 = 0.0;
  double lower = 0.0;
  double upper = 0.0;

  bool outside(double v) const { return v < lower || v > upper; }
};

/// Q1 - 1.5 IQR and Q3 + 1.5 IQR. Requires n >= 4.
Fences iqr_bounds(const Eigen::Ref<const Eigen::VectorXd>& values);

struct CorrelationMatrix {
  std::vector<std::string> names;
  Eigen::MatrixXd rho;
  Eigen::MatrixXd p_value;
  std::vector<bool> degenerate;
  Eigen::Index n = 0;
};

/// Pairwise Spearman over the columns of `table`. Constant columns are
/// flagged degenerate and their off-diagonal cells set to NaN.
CorrelationMatrix correlation_heatmap(const Eigen::Ref<const Eigen::MatrixXd>& table,
                                      std::vector<std::string> names);

}  // namespace viramem::stats
