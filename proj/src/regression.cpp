#include "viramem/regression.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <cassert>
#include <cmath>
#include <limits>
#include <optional>

#include "viramem/error.hpp"
#include "viramem/log.hpp"

namespace viramem::stats {

namespace {

using QR = Eigen::ColPivHouseholderQR<Eigen::MatrixXd>;

constexpr double kZ975 = 1.959963984540054;
constexpr double kLogAlphaLo = -8.0;
constexpr double kLogAlphaHi = 8.0;
constexpr double kFallbackAlpha = 1.0;

std::vector<std::string> default_names(std::vector<std::string> names, Eigen::Index p) {
  if (names.empty()) {
    for (Eigen::Index j = 0; j < p; ++j) names.push_back("x" + std::to_string(j));
  }
  if (static_cast<Eigen::Index>(names.size()) != p) throw DataError("one name per design column required");
  return names;
}

void check_inputs(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::Ref<const Eigen::VectorXd>& y,
                  const char* what) {
  if (X.rows() != y.size()) throw DataError(std::string(what) + ": design rows do not match response length");
  if (X.rows() <= X.cols()) {
    throw DataError(std::string(what) + ": need more observations (" + std::to_string(X.rows()) +
                    ") than parameters (" + std::to_string(X.cols()) + ")");
  }
  if (!X.allFinite() || !y.allFinite()) throw DataError(std::string(what) + ": non-finite input");
}

void require_full_rank(const QR& qr, const std::vector<std::string>& names, const char* what) {
  if (qr.rank() < qr.cols()) {
    const auto col = qr.colsPermutation().indices()(qr.rank());
    throw NumericError(std::string(what) + ": rank-deficient design, column '" +
                       names[static_cast<std::size_t>(col)] + "' is linearly dependent on the others");
  }
}

// (X^T X)^{-1} from the pivoted QR factors: P R^{-1} R^{-T} P^T.
Eigen::MatrixXd unscaled_covariance(const QR& qr) {
  const Eigen::Index p = qr.cols();
  const Eigen::MatrixXd r = qr.matrixR().topLeftCorner(p, p).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd r_inv =
      r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p, p));
  const Eigen::MatrixXd inner = r_inv * r_inv.transpose();
  const auto& perm = qr.colsPermutation();
  return perm * inner * perm.transpose();
}

bool has_constant_column(const Eigen::Ref<const Eigen::MatrixXd>& X) {
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    if (X(0, j) != 0.0 && (X.col(j).array() == X(0, j)).all()) return true;
  }
  return false;
}

double r_squared(const Eigen::Ref<const Eigen::VectorXd>& y, double rss, bool centered) {
  const double tss = centered ? (y.array() - y.mean()).square().sum() : y.squaredNorm();
  if (tss == 0.0) return rss == 0.0 ? 1.0 : 0.0;
  return 1.0 - rss / tss;
}

double normal_two_sided(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

double gaussian_loglik(double rss, Eigen::Index n) {
  const double nn = static_cast<double>(n);
  return -0.5 * nn * (std::log(2.0 * M_PI * rss / nn) + 1.0);
}

struct IrlsResult {
  Eigen::VectorXd beta;
  Eigen::VectorXd mu;
  Eigen::MatrixXd cov_unscaled;
  double loglik = 0.0;
  bool converged = false;
  int iterations = 0;
  std::vector<double> trace;
};

// NB2 with log link at fixed alpha.
IrlsResult irls_negative_binomial(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::Ref<const Eigen::VectorXd>& y,
                                  double alpha, const std::optional<Eigen::VectorXd>& start, const GlmOptions& opt,
                                  const std::vector<std::string>& names) {
  const Eigen::Index p = X.cols();
  IrlsResult out;
  Eigen::VectorXd eta;
  Eigen::VectorXd beta_old = Eigen::VectorXd::Constant(p, std::numeric_limits<double>::quiet_NaN());
  double ll_old = -std::numeric_limits<double>::infinity();
  if (start) {
    beta_old = *start;
    eta = X * beta_old;
    ll_old = nb_log_likelihood(y, eta.array().exp().matrix(), alpha);
  } else {
    eta = ((y.array() + y.mean()) / 2.0).log().matrix();
  }
  Eigen::VectorXd mu = eta.array().exp().matrix();

  for (int iter = 1; iter <= opt.max_iter; ++iter) {
    const Eigen::ArrayXd w = mu.array() / (1.0 + alpha * mu.array());
    const Eigen::ArrayXd z = eta.array() + (y.array() - mu.array()) / mu.array();
    const Eigen::ArrayXd sw = w.sqrt();
    const QR qr((X.array().colwise() * sw).matrix());
    require_full_rank(qr, names, "glm_fit");
    Eigen::VectorXd beta = qr.solve((z * sw).matrix());

    Eigen::VectorXd eta_new = X * beta;
    Eigen::VectorXd mu_new = eta_new.array().exp().matrix();
    double ll = nb_log_likelihood(y, mu_new, alpha);
    if (beta_old.allFinite()) {
      // Step-halving guards against overshoot when the likelihood drops.
      for (int h = 0; h < 30 && !(std::isfinite(ll) && ll >= ll_old - 1e-12 * std::abs(ll_old)); ++h) {
        beta = beta_old + 0.5 * (beta - beta_old);
        eta_new = X * beta;
        mu_new = eta_new.array().exp().matrix();
        ll = nb_log_likelihood(y, mu_new, alpha);
      }
    }
    out.iterations = iter;
    if (!std::isfinite(ll) || !mu_new.allFinite()) {
      out.converged = false;
      out.beta = beta;
      out.mu = mu_new;
      out.loglik = ll;
      return out;
    }
    out.trace.push_back(ll);
    const double delta = beta_old.allFinite() ? (beta - beta_old).cwiseAbs().maxCoeff()
                                              : std::numeric_limits<double>::infinity();
    beta_old = beta;
    ll_old = ll;
    eta = eta_new;
    mu = mu_new;
    if (delta < opt.tol) {
      out.converged = true;
      break;
    }
  }
  out.beta = beta_old;
  out.mu = mu;
  out.loglik = ll_old;
  const Eigen::ArrayXd w = mu.array() / (1.0 + alpha * mu.array());
  const QR qr((X.array().colwise() * w.sqrt()).matrix());
  require_full_rank(qr, names, "glm_fit");
  out.cov_unscaled = unscaled_covariance(qr);
#ifndef NDEBUG
  for (std::size_t k = 1; k < out.trace.size(); ++k) {
    assert(out.trace[k] >= out.trace[k - 1] - 1e-8 * std::abs(out.trace[k - 1]));
  }
#endif
  return out;
}

void fill_wald(ModelFit& fit, const Eigen::MatrixXd& cov) {
  fit.standard_errors = cov.diagonal().cwiseMax(0.0).cwiseSqrt();
  fit.p_values.resize(fit.coefficients.size());
  for (Eigen::Index j = 0; j < fit.coefficients.size(); ++j) {
    fit.p_values(j) = normal_two_sided(fit.coefficients(j) / fit.standard_errors(j));
  }
  set_wald_intervals(fit);
}

ModelFit fit_negative_binomial(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::Ref<const Eigen::VectorXd>& y,
                               const GlmOptions& opt, std::vector<std::string> names) {
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y(i) < 0.0 || y(i) != std::floor(y(i))) {
      throw DataError("glm_fit: negative binomial response must be non-negative integers (row " +
                      std::to_string(i) + " = " + std::to_string(y(i)) + ")");
    }
  }
  if (y.sum() == 0.0) throw NumericError("glm_fit: negative binomial response is identically zero");

  ModelFit fit;
  fit.family = Family::negative_binomial;
  fit.link = Link::log;
  fit.names = names;
  fit.n = X.rows();

  double alpha = opt.fixed_alpha;
  fit.dispersion_converged = true;
  if (opt.estimate_alpha) {
    // Profile likelihood over log alpha; each evaluation warm-starts IRLS.
    GlmOptions inner = opt;
    std::optional<Eigen::VectorXd> warm;
    auto profile = [&](double log_alpha) {
      IrlsResult r = irls_negative_binomial(X, y, std::exp(log_alpha), warm, inner, names);
      if (!r.converged || !std::isfinite(r.loglik)) return -std::numeric_limits<double>::infinity();
      warm = r.beta;
      return r.loglik;
    };
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = kLogAlphaLo;
    double b = kLogAlphaHi;
    double c = b - phi * (b - a);
    double d = a + phi * (b - a);
    double fc = profile(c);
    double fd = profile(d);
    bool finite = std::isfinite(fc) || std::isfinite(fd);
    while (b - a > 1e-9) {
      if (fc >= fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - phi * (b - a);
        fc = profile(c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + phi * (b - a);
        fd = profile(d);
      }
      finite = finite || std::isfinite(fc) || std::isfinite(fd);
    }
    const double log_alpha = 0.5 * (a + b);
    if (!finite || log_alpha > kLogAlphaHi - 1e-3) {
      warn("negative binomial dispersion did not converge; falling back to alpha = 1");
      alpha = kFallbackAlpha;
      fit.dispersion_converged = false;
    } else {
      alpha = std::exp(log_alpha);
    }
  }
  if (!(alpha > 0.0)) throw DataError("glm_fit: negative binomial alpha must be positive");

  const IrlsResult r = irls_negative_binomial(X, y, alpha, std::nullopt, opt, names);
  fit.dispersion_alpha = alpha;
  fit.coefficients = r.beta;
  fit.converged = r.converged;
  fit.iterations = r.iterations;
  fit.loglik_trace = r.trace;
  fit.log_likelihood = r.loglik;
  fit.scale = 1.0;
  fit.residuals = y - r.mu;
  if (!r.converged) {
    warn("negative binomial IRLS did not converge after " + std::to_string(r.iterations) + " iterations");
  }
  if (r.cov_unscaled.size() == 0) {
    fit.standard_errors = Eigen::VectorXd::Constant(X.cols(), std::numeric_limits<double>::quiet_NaN());
    fit.p_values = fit.standard_errors;
    set_wald_intervals(fit);
  } else {
    fill_wald(fit, r.cov_unscaled);
  }
  return fit;
}

ModelFit fit_gaussian(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::Ref<const Eigen::VectorXd>& y,
                      const GlmOptions& opt, std::vector<std::string> names) {
  ModelFit fit;
  fit.family = Family::gaussian;
  fit.link = Link::identity;
  fit.names = names;
  fit.n = X.rows();
  // Identity link with unit weights: the working response is y itself, so
  // IRLS reaches its fixed point after one solve and confirms on the second.
  const QR qr(X);
  require_full_rank(qr, names, "glm_fit");
  Eigen::VectorXd beta_old = Eigen::VectorXd::Constant(X.cols(), std::numeric_limits<double>::quiet_NaN());
  Eigen::VectorXd beta;
  for (int iter = 1; iter <= opt.max_iter; ++iter) {
    const Eigen::VectorXd z = y;
    beta = qr.solve(z);
    fit.iterations = iter;
    const Eigen::VectorXd resid = y - X * beta;
    fit.loglik_trace.push_back(gaussian_loglik(resid.squaredNorm(), fit.n));
    if (beta_old.allFinite() && (beta - beta_old).cwiseAbs().maxCoeff() < opt.tol) {
      fit.converged = true;
      break;
    }
    beta_old = beta;
  }
  fit.coefficients = beta;
  fit.residuals = y - X * beta;
  const double rss = fit.residuals.squaredNorm();
  fit.scale = rss / static_cast<double>(X.rows() - X.cols());
  fit.log_likelihood = gaussian_loglik(rss, fit.n);
  fit.r_squared = r_squared(y, rss, has_constant_column(X));
  fill_wald(fit, fit.scale * unscaled_covariance(qr));
  return fit;
}

}  // namespace

std::string to_string(Family f) { return f == Family::gaussian ? "gaussian" : "negative_binomial"; }
std::string to_string(Link l) { return l == Link::identity ? "identity" : "log"; }

void set_wald_intervals(ModelFit& fit) {
  fit.ci_lower = fit.coefficients - kZ975 * fit.standard_errors;
  fit.ci_upper = fit.coefficients + kZ975 * fit.standard_errors;
}

ModelFit ols_fit(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::Ref<const Eigen::VectorXd>& y,
                 std::vector<std::string> names) {
  check_inputs(X, y, "ols_fit");
  names = default_names(std::move(names), X.cols());
  const QR qr(X);
  require_full_rank(qr, names, "ols_fit");

  ModelFit fit;
  fit.family = Family::gaussian;
  fit.link = Link::identity;
  fit.names = std::move(names);
  fit.n = X.rows();
  fit.coefficients = qr.solve(y);
  fit.residuals = y - X * fit.coefficients;
  const double rss = fit.residuals.squaredNorm();
  const double df = static_cast<double>(X.rows() - X.cols());
  fit.scale = rss / df;
  fit.standard_errors = (fit.scale * unscaled_covariance(qr)).diagonal().cwiseMax(0.0).cwiseSqrt();
  fit.r_squared = r_squared(y, rss, has_constant_column(X));
  fit.log_likelihood = gaussian_loglik(rss, fit.n);
  fit.converged = true;
  fit.iterations = 1;
  const boost::math::students_t tdist(df);
  fit.p_values.resize(X.cols());
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const double t = std::abs(fit.coefficients(j) / fit.standard_errors(j));
    fit.p_values(j) = std::isfinite(t) ? 2.0 * boost::math::cdf(boost::math::complement(tdist, t))
                                       : (fit.standard_errors(j) == 0.0 ? 0.0 : 1.0);
  }
  set_wald_intervals(fit);
  return fit;
}

Eigen::VectorXd residualize(const Eigen::Ref<const Eigen::VectorXd>& y, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != y.size()) throw DataError("residualize: length mismatch");
  if (x.size() < 3) throw DataError("residualize: need at least 3 observations");
  if ((x.array() == x(0)).all()) throw NumericError("residualize: predictor is constant");
  Eigen::MatrixXd design(x.size(), 2);
  design.col(0).setOnes();
  design.col(1) = x;
  const QR qr(design);
  if (qr.rank() < 2) throw NumericError("residualize: predictor is constant");
  return y - design * qr.solve(y);
}

bool VifReport::all_below(double threshold) const {
  for (Eigen::Index j = 0; j < vif.size(); ++j) {
    if (infinite[static_cast<std::size_t>(j)] || !(vif(j) < threshold)) return false;
  }
  return true;
}

VifReport vif(const Eigen::Ref<const Eigen::MatrixXd>& X, std::vector<std::string> names) {
  const Eigen::Index k = X.cols();
  const Eigen::Index n = X.rows();
  if (k < 2) throw DataError("vif: need at least 2 predictors");
  if (n <= k) throw DataError("vif: need more observations than predictors");
  if (!X.allFinite()) throw DataError("vif: non-finite input");
  VifReport out;
  out.names = default_names(std::move(names), k);
  out.vif.resize(k);
  out.infinite.assign(static_cast<std::size_t>(k), false);
  const double inf = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < k; ++j) {
    Eigen::MatrixXd others(n, k);
    others.col(0).setOnes();
    for (Eigen::Index c = 0, dst = 1; c < k; ++c) {
      if (c != j) others.col(dst++) = X.col(c);
    }
    const Eigen::VectorXd target = X.col(j);
    const double tss = (target.array() - target.mean()).square().sum();
    const QR qr(others);
    bool degenerate = tss == 0.0 || qr.rank() < k;
    double value = inf;
    if (!degenerate) {
      const double rss = (target - others * qr.solve(target)).squaredNorm();
      const double one_minus_r2 = rss / tss;
      degenerate = one_minus_r2 < 1e-12;
      if (!degenerate) value = 1.0 / one_minus_r2;
    }
    out.vif(j) = value;
    out.infinite[static_cast<std::size_t>(j)] = degenerate;
  }
  return out;
}

ModelFit glm_fit(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::Ref<const Eigen::VectorXd>& y, Family family,
                 const GlmOptions& options, std::vector<std::string> names) {
  check_inputs(X, y, "glm_fit");
  if (options.max_iter < 1) throw DataError("glm_fit: max_iter must be positive");
  names = default_names(std::move(names), X.cols());
  if (family == Family::gaussian) return fit_gaussian(X, y, options, std::move(names));
  return fit_negative_binomial(X, y, options, std::move(names));
}

double nb_log_likelihood(const Eigen::Ref<const Eigen::VectorXd>& y, const Eigen::Ref<const Eigen::VectorXd>& mu,
                         double alpha) {
  const double inv = 1.0 / alpha;
  const double lg_inv = std::lgamma(inv);
  double ll = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double am = alpha * mu(i);
    ll += std::lgamma(y(i) + inv) - lg_inv - std::lgamma(y(i) + 1.0) + y(i) * std::log(am / (1.0 + am)) -
          inv * std::log1p(am);
  }
  return ll;
}

}  // namespace viramem::stats
