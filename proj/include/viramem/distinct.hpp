#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "viramem/error.hpp"
#include "viramem/features.hpp"
#include "viramem/regression.hpp"

namespace viramem::distinct {

namespace detail {

[[noreturn]] void throw_zero_variance(const std::vector<std::string>& names, Eigen::Index row);

}  // namespace detail

/// Each row centered and scaled to unit norm, in double precision, so that
/// Pearson r of rows i and j is the dot product of the results. A row with
/// (numerically) zero variance throws NumericError naming the image;
/// `names[first_row + i]` labels row i when names are given.
template <typename Derived>
Eigen::MatrixXd standardize_rows(const Eigen::MatrixBase<Derived>& F, const std::vector<std::string>& names = {},
                                 Eigen::Index first_row = 0) {
  Eigen::MatrixXd Z = F.template cast<double>();
  for (Eigen::Index i = 0; i < Z.rows(); ++i) {
    const double raw = Z.row(i).norm();
    Z.row(i).array() -= Z.row(i).mean();
    const double centered = Z.row(i).norm();
    if (!(centered > 1e-10 * raw) || !std::isfinite(centered)) detail::throw_zero_variance(names, first_row + i);
    Z.row(i) /= centered;
  }
  return Z;
}

struct DistanceOptions {
  Eigen::Index tile = 64;
  unsigned threads = 1;
};

/// 1 - r for every pair of rows of already standardized Z. Tiles are
/// assigned to threads by a fixed schedule and write disjoint blocks, so the
/// result does not depend on the thread count.
Eigen::MatrixXd distance_from_standardized(const Eigen::Ref<const Eigen::MatrixXd>& Z,
                                           const DistanceOptions& options = {});

/// N x N matrix of 1 - Pearson r between rows of F. Symmetric, zero
/// diagonal, entries clamped to [0, 2].
template <typename Derived>
Eigen::MatrixXd pearson_distance_matrix(const Eigen::MatrixBase<Derived>& F, const std::vector<std::string>& names = {},
                                        const DistanceOptions& options = {}) {
  if (F.rows() < 2) throw DataError("pearson_distance_matrix: need at least 2 rows");
  return distance_from_standardized(standardize_rows(F, names), options);
}

/// Off-diagonal row means of a square dissimilarity matrix.
template <typename Derived>
Eigen::VectorXd mean_dissimilarity(const Eigen::MatrixBase<Derived>& M) {
  const Eigen::Index n = M.rows();
  if (n < 2 || M.cols() != n) throw DataError("mean_dissimilarity: need a square matrix with N >= 2");
  const Eigen::MatrixXd D = M.template cast<double>();
  return (D.rowwise().sum() - D.diagonal()) / static_cast<double>(n - 1);
}

/// Reads rows [first, first + out.rows()) of an N x D activation matrix.
using RowReader = std::function<void(Eigen::Index first, Eigen::Ref<features::RowMatrixXf> out)>;

/// Row means of the dissimilarity matrix computed tile by tile without
/// materializing it; memory is O(tile x D).
Eigen::VectorXd streaming_mean_dissimilarity(Eigen::Index n, Eigen::Index d, const RowReader& read,
                                             const std::vector<std::string>& names = {}, Eigen::Index tile = 64);

struct LayerOptions {
  // Layers with more images than this use the streaming path.
  Eigen::Index materialize_cap = 4096;
  DistanceOptions distance;
};

Eigen::VectorXd layer_mean_dissimilarity(features::LayerRowSource& source, const std::vector<std::string>& names,
                                         const LayerOptions& options = {});

/// Residuals of the memorability-network scores after univariate OLS on the
/// baseline-network scores (with intercept). Needs N >= 3 and a non-constant
/// baseline.
Eigen::VectorXd residualize_layer(const Eigen::Ref<const Eigen::VectorXd>& memnet,
                                  const Eigen::Ref<const Eigen::VectorXd>& baseline);

/// Per-image mean dissimilarity (N x 6, columns in stage order) for both
/// networks and the memorability-network residuals.
struct DistinctivenessProfiles {
  std::vector<std::string> image_hashes;
  Eigen::MatrixXd memorability_net;
  Eigen::MatrixXd baseline_net;
  Eigen::MatrixXd residuals;
};

DistinctivenessProfiles compute_profiles(const features::FeatureContainer& container, const LayerOptions& options = {});

/// Residual columns for already computed mean dissimilarities.
DistinctivenessProfiles profiles_from_means(std::vector<std::string> image_hashes, Eigen::MatrixXd memorability_net,
                                            Eigen::MatrixXd baseline_net);

std::string stage_column_name(features::Stage s);

struct LayerDesign {
  std::vector<std::string> image_hashes;
  std::vector<std::string> names;  // intercept, then one per stage
  Eigen::MatrixXd X;               // N x 7
  stats::VifReport vif;            // on the six stage columns
};

/// Intercept plus the six residual columns. A non-finite residual (missing
/// layer) throws DataError naming the image and stage.
LayerDesign build_layer_design(const DistinctivenessProfiles& profiles);

/// Targets aligned to the design rows; NaN marks a missing value and drops
/// that row from the corresponding model only.
struct StageTargets {
  Eigen::VectorXd memorability;
  Eigen::VectorXd comments;
  Eigen::VectorXd sentiment;
};

struct StageModels {
  stats::ModelFit memorability;  // Gaussian
  stats::ModelFit comments;      // negative binomial
  stats::ModelFit sentiment;     // Gaussian
};

/// Errors from a fit are rethrown with the target name prepended.
StageModels run_stage_models(const LayerDesign& design, const StageTargets& targets,
                             const stats::GlmOptions& options = {});

}  // namespace viramem::distinct
