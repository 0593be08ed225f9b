#pragma once

#include <Eigen/Dense>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

namespace viramem::testing {

inline std::filesystem::path fixture_dir() { return VIRAMEM_FIXTURE_DIR; }
inline std::filesystem::path data_dir() { return VIRAMEM_DATA_DIR; }

inline nlohmann::json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open fixture " + path.string());
  return nlohmann::json::parse(in);
}

inline Eigen::VectorXd to_vector(const nlohmann::json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  return v;
}

inline Eigen::MatrixXd to_matrix(const nlohmann::json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows == 0 ? 0 : static_cast<Eigen::Index>(j[0].size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = j[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

}  // namespace viramem::testing
