#include "viramem/distinct.hpp"

#include <algorithm>
#include <thread>

namespace viramem::distinct {

namespace detail {

void throw_zero_variance(const std::vector<std::string>& names, Eigen::Index row) {
  const auto r = static_cast<std::size_t>(row);
  const std::string who = r < names.size() ? "image " + names[r] : "row " + std::to_string(row);
  throw NumericError(who + " has constant activations (zero variance)");
}

}  // namespace detail

namespace {

struct TilePair {
  Eigen::Index i0, in, j0, jn;
};

std::vector<TilePair> tile_schedule(Eigen::Index n, Eigen::Index tile) {
  std::vector<TilePair> pairs;
  for (Eigen::Index i0 = 0; i0 < n; i0 += tile) {
    for (Eigen::Index j0 = i0; j0 < n; j0 += tile) {
      pairs.push_back({i0, std::min(tile, n - i0), j0, std::min(tile, n - j0)});
    }
  }
  return pairs;
}

// 1 - Zi Zj^T clamped to [0, 2]; a diagonal tile is made exactly symmetric
// with a zero diagonal.
Eigen::MatrixXd distance_block(const Eigen::Ref<const Eigen::MatrixXd>& Zi, const Eigen::Ref<const Eigen::MatrixXd>& Zj,
                               bool diagonal) {
  Eigen::MatrixXd B = (1.0 - (Zi * Zj.transpose()).array()).cwiseMax(0.0).cwiseMin(2.0).matrix();
  if (diagonal) {
    const Eigen::MatrixXd upper = B.transpose();
    B.triangularView<Eigen::StrictlyLower>() = upper.triangularView<Eigen::StrictlyLower>();
    B.diagonal().setZero();
  }
  return B;
}

}  // namespace

Eigen::MatrixXd distance_from_standardized(const Eigen::Ref<const Eigen::MatrixXd>& Z, const DistanceOptions& options) {
  const Eigen::Index n = Z.rows();
  if (options.tile < 1) throw DataError("distance tile size must be positive");
  Eigen::MatrixXd M(n, n);
  const auto pairs = tile_schedule(n, options.tile);
  auto work = [&](std::size_t start, std::size_t stride) {
    for (std::size_t k = start; k < pairs.size(); k += stride) {
      const auto& p = pairs[k];
      const auto B = distance_block(Z.middleRows(p.i0, p.in), Z.middleRows(p.j0, p.jn), p.i0 == p.j0);
      M.block(p.i0, p.j0, p.in, p.jn) = B;
      if (p.i0 != p.j0) M.block(p.j0, p.i0, p.jn, p.in) = B.transpose();
    }
  };
  const std::size_t threads = std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(pairs.size())));
  if (threads == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
    for (auto& th : pool) th.join();
  }
  return M;
}

Eigen::VectorXd streaming_mean_dissimilarity(Eigen::Index n, Eigen::Index d, const RowReader& read,
                                             const std::vector<std::string>& names, Eigen::Index tile) {
  if (n < 2) throw DataError("mean dissimilarity: need at least 2 images");
  if (tile < 1) throw DataError("distance tile size must be positive");
  Eigen::VectorXd sums = Eigen::VectorXd::Zero(n);
  features::RowMatrixXf buf;
  auto load = [&](Eigen::Index first, Eigen::Index count) {
    buf.resize(count, d);
    read(first, buf);
    return standardize_rows(buf, names, first);
  };
  for (Eigen::Index i0 = 0; i0 < n; i0 += tile) {
    const Eigen::Index in = std::min(tile, n - i0);
    const Eigen::MatrixXd Zi = load(i0, in);
    for (Eigen::Index j0 = i0; j0 < n; j0 += tile) {
      const Eigen::Index jn = std::min(tile, n - j0);
      if (j0 == i0) {
        sums.segment(i0, in) += distance_block(Zi, Zi, true).rowwise().sum();
        continue;
      }
      const Eigen::MatrixXd B = distance_block(Zi, load(j0, jn), false);
      sums.segment(i0, in) += B.rowwise().sum();
      sums.segment(j0, jn) += B.colwise().sum().transpose();
    }
  }
  return sums / static_cast<double>(n - 1);
}

Eigen::VectorXd layer_mean_dissimilarity(features::LayerRowSource& source, const std::vector<std::string>& names,
                                         const LayerOptions& options) {
  if (source.rows() <= options.materialize_cap) {
    return mean_dissimilarity(pearson_distance_matrix(source.read_all(), names, options.distance));
  }
  return streaming_mean_dissimilarity(
      source.rows(), source.cols(),
      [&](Eigen::Index first, Eigen::Ref<features::RowMatrixXf> out) { source.read_rows(first, out); }, names,
      options.distance.tile);
}

Eigen::VectorXd residualize_layer(const Eigen::Ref<const Eigen::VectorXd>& memnet,
                                  const Eigen::Ref<const Eigen::VectorXd>& baseline) {
  return stats::residualize(memnet, baseline);
}

std::string stage_column_name(features::Stage s) {
  std::string name = "stage_" + features::to_string(s);
  std::replace(name.begin(), name.end(), '-', '_');
  return name;
}

DistinctivenessProfiles profiles_from_means(std::vector<std::string> image_hashes, Eigen::MatrixXd memorability_net,
                                            Eigen::MatrixXd baseline_net) {
  const auto n = static_cast<Eigen::Index>(image_hashes.size());
  const auto stages = static_cast<Eigen::Index>(features::kStages.size());
  if (memorability_net.rows() != n || baseline_net.rows() != n || memorability_net.cols() != stages ||
      baseline_net.cols() != stages) {
    throw DataError("profiles: expected " + std::to_string(n) + " x 6 mean-dissimilarity matrices");
  }
  DistinctivenessProfiles p{std::move(image_hashes), std::move(memorability_net), std::move(baseline_net), {}};
  p.residuals.resize(n, stages);
  for (const auto s : features::kStages) {
    const auto c = static_cast<Eigen::Index>(features::stage_index(s));
    try {
      p.residuals.col(c) = residualize_layer(p.memorability_net.col(c), p.baseline_net.col(c));
    } catch (const NumericError& e) {
      throw NumericError("stage " + features::to_string(s) + " residualization: " + e.what());
    }
  }
  return p;
}

DistinctivenessProfiles compute_profiles(const features::FeatureContainer& container, const LayerOptions& options) {
  const auto& m = container.manifest();
  std::vector<std::string> hashes;
  for (const auto& img : m.images) hashes.push_back(img.image_hash);
  const auto n = container.image_count();
  const auto stages = static_cast<Eigen::Index>(features::kStages.size());
  Eigen::MatrixXd mem(n, stages), base(n, stages);
  for (const auto net : features::kNetworks) {
    auto& out = net == features::Network::memorability ? mem : base;
    for (const auto s : features::kStages) {
      auto source = container.layer(net, s);
      try {
        out.col(static_cast<Eigen::Index>(features::stage_index(s))) = layer_mean_dissimilarity(source, hashes, options);
      } catch (const NumericError& e) {
        throw NumericError(features::to_string(net) + " stage " + features::to_string(s) + ": " + e.what());
      }
    }
  }
  return profiles_from_means(std::move(hashes), std::move(mem), std::move(base));
}

LayerDesign build_layer_design(const DistinctivenessProfiles& profiles) {
  const auto n = static_cast<Eigen::Index>(profiles.image_hashes.size());
  const auto stages = static_cast<Eigen::Index>(features::kStages.size());
  if (profiles.residuals.rows() != n || profiles.residuals.cols() != stages) {
    throw DataError("layer design: residuals must be N x 6");
  }
  LayerDesign d;
  d.image_hashes = profiles.image_hashes;
  d.names.push_back("intercept");
  for (const auto s : features::kStages) d.names.push_back(stage_column_name(s));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index c = 0; c < stages; ++c) {
      if (!std::isfinite(profiles.residuals(i, c))) {
        throw DataError("layer design: image " + profiles.image_hashes[static_cast<std::size_t>(i)] +
                        " is missing stage " + features::to_string(features::kStages[static_cast<std::size_t>(c)]));
      }
    }
  }
  d.X.resize(n, stages + 1);
  d.X.col(0).setOnes();
  d.X.rightCols(stages) = profiles.residuals;
  d.vif = stats::vif(profiles.residuals, std::vector<std::string>(d.names.begin() + 1, d.names.end()));
  return d;
}

namespace {

stats::ModelFit fit_target(const std::string& target, const LayerDesign& design, const Eigen::VectorXd& y,
                           stats::Family family, const stats::GlmOptions& options) {
  if (y.size() != design.X.rows()) {
    throw DataError(target + " model: " + std::to_string(y.size()) + " targets for " +
                    std::to_string(design.X.rows()) + " design rows");
  }
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (!std::isnan(y(i))) keep.push_back(i);
  }
  const auto m = static_cast<Eigen::Index>(keep.size());
  Eigen::MatrixXd X(m, design.X.cols());
  Eigen::VectorXd yy(m);
  for (Eigen::Index r = 0; r < m; ++r) {
    X.row(r) = design.X.row(keep[static_cast<std::size_t>(r)]);
    yy(r) = y(keep[static_cast<std::size_t>(r)]);
  }
  try {
    return stats::glm_fit(X, yy, family, options, design.names);
  } catch (const NumericError& e) {
    throw NumericError(target + " model: " + e.what());
  } catch (const DataError& e) {
    throw DataError(target + " model: " + e.what());
  }
}

}  // namespace

StageModels run_stage_models(const LayerDesign& design, const StageTargets& targets, const stats::GlmOptions& options) {
  StageModels out;
  out.memorability = fit_target("memorability", design, targets.memorability, stats::Family::gaussian, options);
  out.comments = fit_target("comments", design, targets.comments, stats::Family::negative_binomial, options);
  out.sentiment = fit_target("sentiment", design, targets.sentiment, stats::Family::gaussian, options);
  return out;
}

}  // namespace viramem::distinct
