#pragma once

#include <Eigen/Dense>

#include <array>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "viramem/error.hpp"

namespace viramem::features {

using RowMatrixXf = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class Network { memorability, imagenet_baseline };
enum class Stage { s1, s2, s3_early, s3_middle, s3_late, s4 };

inline constexpr std::array<Network, 2> kNetworks{Network::memorability, Network::imagenet_baseline};
inline constexpr std::array<Stage, 6> kStages{Stage::s1,      Stage::s2,      Stage::s3_early,
                                              Stage::s3_middle, Stage::s3_late, Stage::s4};
inline constexpr int kFormatVersion = 1;

std::string to_string(Network n);
std::string to_string(Stage s);
Network parse_network(const std::string& s);
Stage parse_stage(const std::string& s);
std::size_t stage_index(Stage s);

/// 1-based residual block tapped for each stage (blocks per stage 3/8/36/3,
/// stage 3 split at its thirds).
int expected_block_index(Stage s);

struct LayerSpec {
  Network network = Network::memorability;
  Stage stage = Stage::s1;
  int block_index = 0;
  Eigen::Index flattened_length = 0;
  std::string file;  // relative to the container directory
};

struct Label {
  std::string label;
  double confidence = 0.0;
};

struct ImageRecord {
  std::string image_hash;
  double memorability = 0.0;
  std::vector<Label> labels;
  bool labels_ok = true;  // false when label detection failed for the image
};

struct Manifest {
  int format_version = kFormatVersion;
  std::map<std::string, std::string> models;
  std::string hook_point;
  std::vector<LayerSpec> layers;
  std::vector<ImageRecord> images;

  std::optional<std::size_t> find_image(const std::string& hash) const;
  std::optional<std::size_t> find_layer(Network n, Stage s) const;
};

/// Structural problems of a manifest (layer set, block indices, score
/// range, duplicate hashes). Empty when well formed.
std::vector<std::string> manifest_issues(const Manifest& m);

Manifest manifest_from_json_text(const std::string& text);
std::string manifest_to_json_text(const Manifest& m);

/// Reads rows of one layer file without loading the whole matrix.
class LayerRowSource {
 public:
  LayerRowSource(const std::filesystem::path& file, Eigen::Index rows, Eigen::Index cols);

  Eigen::Index rows() const { return rows_; }
  Eigen::Index cols() const { return cols_; }

  /// Rows [first, first + out.rows()) into `out` (out.cols() must equal cols()).
  void read_rows(Eigen::Index first, Eigen::Ref<RowMatrixXf> out);
  RowMatrixXf read_all();

 private:
  std::filesystem::path path_;
  std::ifstream in_;
  Eigen::Index rows_;
  Eigen::Index cols_;
};

/// A feature directory: manifest.json plus one little-endian float32
/// N x flattened_length file per layer.
class FeatureContainer {
 public:
  /// Throws DataError listing every issue found by `container_issues`.
  static FeatureContainer open(const std::filesystem::path& dir);

  const Manifest& manifest() const { return manifest_; }
  const std::filesystem::path& directory() const { return dir_; }
  Eigen::Index image_count() const { return static_cast<Eigen::Index>(manifest_.images.size()); }

  LayerRowSource layer(Network n, Stage s) const;

 private:
  std::filesystem::path dir_;
  Manifest manifest_;
};

/// Manifest issues plus missing layer files and payload sizes that differ
/// from images x flattened_length x 4 bytes.
std::vector<std::string> container_issues(const std::filesystem::path& dir);

/// Writes a container. `activations[k]` belongs to `manifest.layers[k]` and
/// must be images x flattened_length. Every file goes through a temporary
/// and a rename, manifest last.
void write_container(const std::filesystem::path& dir, const Manifest& manifest,
                     const std::vector<RowMatrixXf>& activations);

}  // namespace viramem::features
