#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "viramem/error.hpp"

namespace viramem::embeddings {

/// Cosine similarity accumulated in double. Throws NumericError on a
/// zero-norm input and DataError on a dimension mismatch.
template <typename A, typename B>
double cosine(const Eigen::MatrixBase<A>& u, const Eigen::MatrixBase<B>& v) {
  if (u.size() != v.size()) throw DataError("cosine: dimension mismatch");
  const Eigen::VectorXd du = u.template cast<double>();
  const Eigen::VectorXd dv = v.template cast<double>();
  const double nu = du.norm();
  const double nv = dv.norm();
  if (nu == 0.0 || nv == 0.0) throw NumericError("cosine: zero-norm vector");
  return du.dot(dv) / (nu * nv);
}

/// Row-per-token float table (the text format carries ~6 significant
/// digits, so 32-bit storage loses nothing).
class EmbeddingTable {
 public:
  explicit EmbeddingTable(Eigen::Index dimension = 100) : dimension_(dimension) {}

  Eigen::Index dimension() const { return dimension_; }
  std::size_t size() const { return tokens_.size(); }
  bool contains(const std::string& token) const { return index_.count(token) > 0; }
  const std::vector<std::string>& tokens() const { return tokens_; }

  /// False (and nothing stored) if the token already exists.
  bool add(const std::string& token, const Eigen::Ref<const Eigen::VectorXf>& vec);

  /// nullptr-like empty optional when out of vocabulary.
  std::optional<Eigen::Map<const Eigen::VectorXf>> find(const std::string& token) const;

 private:
  Eigen::Index dimension_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::string> tokens_;
  std::vector<float> data_;
};

struct LoadOptions {
  Eigen::Index expected_dimension = 100;
  // When set, only these tokens are kept (the rest of the file is parsed
  // for validation but not stored).
  const std::unordered_set<std::string>* vocabulary = nullptr;
};

/// Space-separated text format: token followed by `expected_dimension`
/// decimal components per line. Duplicate tokens: first wins, with a
/// warning. Wrong component count or unparsable number: ParseError.
EmbeddingTable load_embeddings(const std::filesystem::path& path, const LoadOptions& options = {});

struct Match {
  std::string label;
  double cosine = 0.0;
};

/// Argmax cosine over in-vocabulary labels; ties keep the earlier label.
/// Empty when the token or every label is out of vocabulary.
std::optional<Match> best_match(const std::string& token, const std::vector<std::string>& labels,
                                const EmbeddingTable& table);

struct MatchedPair {
  std::string token;
  std::string label;
  double cosine = 0.0;
};

struct ConsistencyScore {
  std::optional<double> value;  // empty when no token matched
  std::vector<MatchedPair> matched_pairs;
  std::size_t skipped_tokens = 0;
};

/// Mean best-match cosine over in-vocabulary tokens (multiplicity kept).
ConsistencyScore consistency_score(const std::vector<std::string>& tokens, const std::vector<std::string>& labels,
                                   const EmbeddingTable& table);

}  // namespace viramem::embeddings
