#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace viramem::stats {

enum class Family { gaussian, negative_binomial };
enum class Link { identity, log };

std::string to_string(Family f);
std::string to_string(Link l);

struct ModelFit {
  Family family = Family::gaussian;
  Link link = Link::identity;
  std::vector<std::string> names;
  Eigen::VectorXd coefficients;
  Eigen::VectorXd standard_errors;
  Eigen::VectorXd ci_lower;
  Eigen::VectorXd ci_upper;
  Eigen::VectorXd p_values;
  Eigen::VectorXd residuals;  // response residuals y - mu
  double dispersion_alpha = 0.0;  // NB only
  bool dispersion_converged = true;
  double log_likelihood = 0.0;
  double scale = 1.0;
  double r_squared = 0.0;  // Gaussian/OLS only
  bool converged = false;
  int iterations = 0;
  Eigen::Index n = 0;
  // Log-likelihood after each accepted IRLS step (diagnostics).
  std::vector<double> loglik_trace;
};

/// Fills ci_lower/ci_upper as beta -/+ 1.96 SE.
void set_wald_intervals(ModelFit& fit);

/// Ordinary least squares through a column-pivoted QR. X must carry its own
/// intercept column. Rank deficiency throws NumericError naming the first
/// column the decomposition could not place.
ModelFit ols_fit(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::Ref<const Eigen::VectorXd>& y,
                 std::vector<std::string> names = {});

/// Residuals of y regressed on [1, x].
Eigen::VectorXd residualize(const Eigen::Ref<const Eigen::VectorXd>& y, const Eigen::Ref<const Eigen::VectorXd>& x);

struct VifReport {
  std::vector<std::string> names;
  Eigen::VectorXd vif;
  std::vector<bool> infinite;

  bool all_below(double threshold) const;
};

/// Variance inflation factors of the columns of X (no intercept column;
/// each auxiliary regression adds its own). Perfect collinearity or a
/// constant column yields +inf with the flag set.
VifReport vif(const Eigen::Ref<const Eigen::MatrixXd>& X, std::vector<std::string> names = {});

struct GlmOptions {
  int max_iter = 100;
  double tol = 1e-8;
  // NB only: fix alpha instead of estimating it.
  double fixed_alpha = 0.0;
  bool estimate_alpha = true;
};

/// IRLS fit. Gaussian uses the identity link; negative binomial (NB2) the
/// log link with alpha profiled by golden-section search over log alpha in
/// [-8, 8]. An optimum pinned at the upper edge, or a non-finite profile,
/// falls back to alpha = 1 with dispersion_converged = false.
ModelFit glm_fit(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::Ref<const Eigen::VectorXd>& y, Family family,
                 const GlmOptions& options = {}, std::vector<std::string> names = {});

/// NB2 log-likelihood of counts y at means mu.
double nb_log_likelihood(const Eigen::Ref<const Eigen::VectorXd>& y, const Eigen::Ref<const Eigen::VectorXd>& mu,
                         double alpha);

}  // namespace viramem::stats
