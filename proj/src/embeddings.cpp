#include "viramem/embeddings.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include "viramem/log.hpp"
#include "viramem/utf8.hpp"

namespace viramem::embeddings {

bool EmbeddingTable::add(const std::string& token, const Eigen::Ref<const Eigen::VectorXf>& vec) {
  if (vec.size() != dimension_) throw DataError("embedding for '" + token + "' has wrong dimension");
  const auto [it, inserted] = index_.emplace(token, tokens_.size());
  if (!inserted) return false;
  tokens_.push_back(token);
  data_.insert(data_.end(), vec.data(), vec.data() + vec.size());
  return true;
}

std::optional<Eigen::Map<const Eigen::VectorXf>> EmbeddingTable::find(const std::string& token) const {
  const auto it = index_.find(token);
  if (it == index_.end()) return std::nullopt;
  return Eigen::Map<const Eigen::VectorXf>(data_.data() + it->second * static_cast<std::size_t>(dimension_),
                                           dimension_);
}

EmbeddingTable load_embeddings(const std::filesystem::path& path, const LoadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open embedding file " + path.string());
  if (options.expected_dimension < 1) throw DataError("embedding dimension must be positive");
  EmbeddingTable table(options.expected_dimension);
  Eigen::VectorXf vec(options.expected_dimension);
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto space = line.find(' ');
    if (space == std::string::npos || space == 0) throw ParseError("embedding line without components", line_number);
    const char* p = line.data() + space;
    const char* end = line.data() + line.size();
    Eigen::Index count = 0;
    while (p < end) {
      while (p < end && *p == ' ') ++p;
      if (p == end) break;
      float value = 0.0f;
      const auto [next, ec] = std::from_chars(p, end, value);
      if (ec != std::errc{} || (next < end && *next != ' ') || !std::isfinite(value)) {
        throw ParseError("unparsable embedding component", line_number);
      }
      if (count < options.expected_dimension) vec(count) = value;
      ++count;
      p = next;
    }
    if (count != options.expected_dimension) {
      throw ParseError("expected " + std::to_string(options.expected_dimension) + " components, found " +
                           std::to_string(count),
                       line_number);
    }
    const std::string token = utf8::to_lower(std::string_view(line).substr(0, space));
    if (options.vocabulary && !options.vocabulary->count(token)) continue;
    if (!table.add(token, vec)) {
      warn("duplicate embedding token '" + token + "' at line " + std::to_string(line_number) + " ignored");
    }
  }
  return table;
}

std::optional<Match> best_match(const std::string& token, const std::vector<std::string>& labels,
                                const EmbeddingTable& table) {
  const auto u = table.find(token);
  if (!u) return std::nullopt;
  std::optional<Match> best;
  for (const auto& label : labels) {
    const auto v = table.find(label);
    if (!v) continue;
    const double c = cosine(*u, *v);
    if (!best || c > best->cosine) best = Match{label, c};
  }
  return best;
}

ConsistencyScore consistency_score(const std::vector<std::string>& tokens, const std::vector<std::string>& labels,
                                   const EmbeddingTable& table) {
  ConsistencyScore out;
  double sum = 0.0;
  for (const auto& token : tokens) {
    const auto m = best_match(token, labels, table);
    if (!m) {
      ++out.skipped_tokens;
      continue;
    }
    sum += m->cosine;
    out.matched_pairs.push_back({token, m->label, m->cosine});
  }
  if (!out.matched_pairs.empty()) out.value = sum / static_cast<double>(out.matched_pairs.size());
  return out;
}

}  // namespace viramem::embeddings
