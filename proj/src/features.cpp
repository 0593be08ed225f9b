#include "viramem/features.hpp"

#include <json.hpp>

#include <bit>
#include <cmath>
#include <cstring>
#include <set>

#include "viramem/fsutil.hpp"

namespace viramem::features {

namespace {

using nlohmann::ordered_json;

void to_little_endian(float* data, std::size_t count) {
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < count; ++i) {
      std::uint32_t bits;
      std::memcpy(&bits, data + i, 4);
      bits = __builtin_bswap32(bits);
      std::memcpy(data + i, &bits, 4);
    }
  }
}

template <typename T>
T required(const ordered_json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw DataError(where + ": missing '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw DataError(where + ": bad type for '" + key + "'");
  }
}

}  // namespace

std::string to_string(Network n) { return n == Network::memorability ? "memorability" : "imagenet_baseline"; }

std::string to_string(Stage s) {
  switch (s) {
    case Stage::s1: return "1";
    case Stage::s2: return "2";
    case Stage::s3_early: return "3-early";
    case Stage::s3_middle: return "3-middle";
    case Stage::s3_late: return "3-late";
    case Stage::s4: return "4";
  }
  return "?";
}

Network parse_network(const std::string& s) {
  for (const auto n : kNetworks) {
    if (to_string(n) == s) return n;
  }
  throw DataError("unknown network '" + s + "'");
}

Stage parse_stage(const std::string& s) {
  for (const auto st : kStages) {
    if (to_string(st) == s) return st;
  }
  throw DataError("unknown stage '" + s + "'");
}

std::size_t stage_index(Stage s) { return static_cast<std::size_t>(s); }

int expected_block_index(Stage s) {
  switch (s) {
    case Stage::s1: return 3;
    case Stage::s2: return 8;
    case Stage::s3_early: return 12;
    case Stage::s3_middle: return 24;
    case Stage::s3_late: return 36;
    case Stage::s4: return 3;
  }
  return 0;
}

std::optional<std::size_t> Manifest::find_image(const std::string& hash) const {
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (images[i].image_hash == hash) return i;
  }
  return std::nullopt;
}

std::optional<std::size_t> Manifest::find_layer(Network n, Stage s) const {
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (layers[i].network == n && layers[i].stage == s) return i;
  }
  return std::nullopt;
}

std::vector<std::string> manifest_issues(const Manifest& m) {
  std::vector<std::string> issues;
  if (m.format_version != kFormatVersion) {
    issues.push_back("unsupported format_version " + std::to_string(m.format_version));
  }
  for (const auto n : kNetworks) {
    for (const auto s : kStages) {
      const auto name = to_string(n) + " stage " + to_string(s);
      std::size_t count = 0;
      for (const auto& l : m.layers) count += (l.network == n && l.stage == s);
      if (count != 1) {
        issues.push_back(name + ": expected one layer, found " + std::to_string(count));
        continue;
      }
      const auto& l = m.layers[*m.find_layer(n, s)];
      if (l.block_index != expected_block_index(s)) {
        issues.push_back(name + ": block_index " + std::to_string(l.block_index) + ", expected " +
                         std::to_string(expected_block_index(s)));
      }
      if (l.flattened_length < 2) issues.push_back(name + ": flattened_length must be at least 2");
      if (l.file.empty()) issues.push_back(name + ": empty file name");
    }
  }
  if (m.layers.size() != kNetworks.size() * kStages.size()) {
    issues.push_back("expected 12 layers, found " + std::to_string(m.layers.size()));
  }
  std::set<std::string> seen;
  for (const auto& img : m.images) {
    if (img.image_hash.empty()) issues.push_back("image with empty hash");
    if (!seen.insert(img.image_hash).second) issues.push_back("duplicate image hash " + img.image_hash);
    if (!(img.memorability >= 0.0 && img.memorability <= 1.0)) {
      issues.push_back("image " + img.image_hash + ": memorability outside [0, 1]");
    }
  }
  return issues;
}

Manifest manifest_from_json_text(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(std::string("manifest: ") + e.what());
  }
  if (!j.is_object()) throw DataError("manifest: top level is not an object");
  Manifest m;
  m.format_version = required<int>(j, "format_version", "manifest");
  m.hook_point = required<std::string>(j, "hook_point", "manifest");
  m.models = required<std::map<std::string, std::string>>(j, "models", "manifest");
  for (const auto& l : required<ordered_json>(j, "layers", "manifest")) {
    LayerSpec spec;
    spec.network = parse_network(required<std::string>(l, "network", "manifest layer"));
    spec.stage = parse_stage(required<std::string>(l, "stage", "manifest layer"));
    spec.block_index = required<int>(l, "block_index", "manifest layer");
    spec.flattened_length = required<Eigen::Index>(l, "flattened_length", "manifest layer");
    spec.file = required<std::string>(l, "file", "manifest layer");
    m.layers.push_back(std::move(spec));
  }
  for (const auto& i : required<ordered_json>(j, "images", "manifest")) {
    ImageRecord rec;
    rec.image_hash = required<std::string>(i, "image_hash", "manifest image");
    const std::string where = "manifest image " + rec.image_hash;
    rec.memorability = required<double>(i, "memorability", where);
    const auto status = required<std::string>(i, "label_status", where);
    if (status != "ok" && status != "failed") throw DataError(where + ": label_status must be ok or failed");
    rec.labels_ok = status == "ok";
    for (const auto& lab : required<ordered_json>(i, "labels", where)) {
      rec.labels.push_back({required<std::string>(lab, "label", where), required<double>(lab, "confidence", where)});
    }
    m.images.push_back(std::move(rec));
  }
  return m;
}

std::string manifest_to_json_text(const Manifest& m) {
  ordered_json j;
  j["format_version"] = m.format_version;
  j["models"] = m.models;
  j["hook_point"] = m.hook_point;
  j["layers"] = ordered_json::array();
  for (const auto& l : m.layers) {
    j["layers"].push_back({{"network", to_string(l.network)},
                           {"stage", to_string(l.stage)},
                           {"block_index", l.block_index},
                           {"flattened_length", l.flattened_length},
                           {"file", l.file}});
  }
  j["images"] = ordered_json::array();
  for (const auto& img : m.images) {
    ordered_json labels = ordered_json::array();
    for (const auto& lab : img.labels) labels.push_back({{"label", lab.label}, {"confidence", lab.confidence}});
    j["images"].push_back({{"image_hash", img.image_hash},
                           {"memorability", img.memorability},
                           {"labels", labels},
                           {"label_status", img.labels_ok ? "ok" : "failed"}});
  }
  return j.dump(2) + "\n";
}

LayerRowSource::LayerRowSource(const std::filesystem::path& file, Eigen::Index rows, Eigen::Index cols)
    : path_(file), in_(file, std::ios::binary), rows_(rows), cols_(cols) {
  if (!in_) throw DataError("cannot open layer file " + file.string());
}

void LayerRowSource::read_rows(Eigen::Index first, Eigen::Ref<RowMatrixXf> out) {
  if (out.cols() != cols_ || first < 0 || first + out.rows() > rows_) {
    throw DataError("layer file " + path_.string() + ": row range out of bounds");
  }
  if (out.rows() == 0) return;
  const auto bytes_per_row = static_cast<std::streamoff>(cols_) * 4;
  in_.clear();
  in_.seekg(static_cast<std::streamoff>(first) * bytes_per_row);
  // Ref may carry an outer stride; rows are contiguous either way.
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    float* row = &out(r, 0);
    in_.read(reinterpret_cast<char*>(row), bytes_per_row);
    if (in_.gcount() != bytes_per_row) throw DataError("layer file " + path_.string() + ": short read");
    to_little_endian(row, static_cast<std::size_t>(cols_));
  }
}

RowMatrixXf LayerRowSource::read_all() {
  RowMatrixXf out(rows_, cols_);
  read_rows(0, out);
  return out;
}

std::vector<std::string> container_issues(const std::filesystem::path& dir) {
  const auto manifest_path = dir / "manifest.json";
  if (!std::filesystem::exists(manifest_path)) return {"missing " + manifest_path.string()};
  Manifest m;
  try {
    m = manifest_from_json_text(read_file(manifest_path));
  } catch (const DataError& e) {
    return {e.what()};
  }
  auto issues = manifest_issues(m);
  const auto n = static_cast<std::uintmax_t>(m.images.size());
  for (const auto& l : m.layers) {
    const auto path = dir / l.file;
    const auto name = to_string(l.network) + " stage " + to_string(l.stage);
    std::error_code ec;
    const auto size = std::filesystem::file_size(path, ec);
    if (ec) {
      issues.push_back(name + ": missing file " + l.file);
      continue;
    }
    const auto expected = n * static_cast<std::uintmax_t>(l.flattened_length) * 4;
    if (size != expected) {
      issues.push_back(name + ": " + l.file + " has " + std::to_string(size) + " bytes, expected " +
                       std::to_string(expected) + " (" + std::to_string(n) + " images x " +
                       std::to_string(l.flattened_length) + " floats)");
    }
  }
  return issues;
}

FeatureContainer FeatureContainer::open(const std::filesystem::path& dir) {
  const auto issues = container_issues(dir);
  if (!issues.empty()) {
    std::string msg = "feature container " + dir.string() + ":";
    for (const auto& i : issues) msg += "\n  " + i;
    throw DataError(msg);
  }
  FeatureContainer c;
  c.dir_ = dir;
  c.manifest_ = manifest_from_json_text(read_file(dir / "manifest.json"));
  return c;
}

LayerRowSource FeatureContainer::layer(Network n, Stage s) const {
  const auto idx = manifest_.find_layer(n, s);
  if (!idx) throw DataError("no layer for " + to_string(n) + " stage " + to_string(s));
  const auto& spec = manifest_.layers[*idx];
  return LayerRowSource(dir_ / spec.file, image_count(), spec.flattened_length);
}

void write_container(const std::filesystem::path& dir, const Manifest& manifest,
                     const std::vector<RowMatrixXf>& activations) {
  if (activations.size() != manifest.layers.size()) throw DataError("write_container: one matrix per layer required");
  const auto n = static_cast<Eigen::Index>(manifest.images.size());
  std::filesystem::create_directories(dir);
  for (std::size_t k = 0; k < activations.size(); ++k) {
    const auto& a = activations[k];
    const auto& spec = manifest.layers[k];
    if (a.rows() != n || a.cols() != spec.flattened_length) {
      throw DataError("write_container: " + spec.file + " has the wrong shape");
    }
    std::vector<float> buf(a.data(), a.data() + a.size());
    to_little_endian(buf.data(), buf.size());
    write_file_atomic(dir / spec.file, std::string_view(reinterpret_cast<const char*>(buf.data()), buf.size() * 4));
  }
  write_file_atomic(dir / "manifest.json", manifest_to_json_text(manifest));
}

}  // namespace viramem::features
