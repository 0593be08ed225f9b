#include "viramem/corpus.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include <Eigen/Dense>

#include "viramem/error.hpp"
#include "viramem/fsutil.hpp"
#include "viramem/stats.hpp"
#include "viramem/utf8.hpp"

namespace viramem {

using nlohmann::json;
using nlohmann::ordered_json;

std::string to_string(RejectReason r) {
  switch (r) {
    case RejectReason::none: return "none";
    case RejectReason::low_score: return "low_score";
    case RejectReason::too_few_comments: return "too_few_comments";
    case RejectReason::no_image: return "no_image";
    case RejectReason::multi_image: return "multi_image";
    case RejectReason::multi_or_nonimage: return "multi_or_nonimage";
    case RejectReason::corrupt_image: return "corrupt_image";
    case RejectReason::duplicate: return "duplicate";
    case RejectReason::fetch_error: return "fetch_error";
  }
  return "unknown";
}

void check_record(const PostRecord& r) {
  const std::string who = r.post_id.empty() ? std::string("<no id>") : r.post_id;
  if (r.post_id.empty()) throw ValidationError("record without post_id");
  if (r.num_comments < 0) throw ValidationError(who + ": negative num_comments");
  if (r.image_count < 0) throw ValidationError(who + ": negative image_count");
  if (r.top_comments.size() > kMaxTopComments) {
    throw ValidationError(who + ": more than " + std::to_string(kMaxTopComments) + " top comments");
  }
  for (std::size_t i = 0; i < r.top_comments.size(); ++i) {
    if (r.top_comments[i].body.empty()) throw ValidationError(who + ": empty comment body");
    if (i > 0 && r.top_comments[i].comment_score > r.top_comments[i - 1].comment_score) {
      throw ValidationError(who + ": top comments not sorted by score");
    }
  }
  if (!r.image_ref.empty() && (r.image_width <= 0 || r.image_height <= 0 || r.file_size <= 0)) {
    throw ValidationError(who + ": stored image without positive dimensions and size");
  }
  if (r.fetched_at < r.created_at) throw ValidationError(who + ": fetched before it was created");
}

FilterDecision filter_valid(const PostRecord& record) {
  check_record(record);
  if (record.score < kMinScore) return {false, RejectReason::low_score};
  if (record.num_comments < kMinComments) return {false, RejectReason::too_few_comments};
  if (record.image_count == 0) return {false, RejectReason::no_image};
  if (record.image_count > 1) return {false, RejectReason::multi_image};
  return {true, RejectReason::none};
}

std::string image_hash(const PostRecord& record) {
  if (record.image_ref.empty()) return {};
  return std::filesystem::path(record.image_ref).stem().string();
}

namespace {

template <typename KeyFn>
Corpus keep_first_fetched(const Corpus& corpus, KeyFn key) {
  std::unordered_map<std::string, std::size_t> winner;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const std::string k = key(corpus[i]);
    if (k.empty()) continue;
    auto [it, inserted] = winner.emplace(k, i);
    if (!inserted && corpus[i].fetched_at < corpus[it->second].fetched_at) it->second = i;
  }
  Corpus out;
  out.reserve(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const std::string k = key(corpus[i]);
    if (k.empty() || winner.at(k) == i) out.push_back(corpus[i]);
  }
  return out;
}

}  // namespace

Corpus dedup(const Corpus& corpus) {
  const Corpus by_id = keep_first_fetched(corpus, [](const PostRecord& r) { return r.post_id; });
  return keep_first_fetched(by_id, [](const PostRecord& r) { return image_hash(r); });
}

std::int64_t caption_letters(const std::string& caption) {
  std::int64_t n = 0;
  for (char32_t cp : utf8::decode(caption)) n += utf8::is_letter(cp) ? 1 : 0;
  return n;
}

int time_of_day(Timestamp created_at, UtcOffset tz) {
  const int h = local_hour(created_at, tz);
  return (h >= 6 && h < 18) ? 0 : 1;
}

CovariateVector derive_covariates(const PostRecord& record, Timestamp reference_time, UtcOffset tz) {
  if (reference_time < record.created_at) {
    throw DataError(record.post_id + ": reference time precedes post creation");
  }
  CovariateVector c;
  c.caption_length = caption_letters(record.caption);
  c.time_of_day = time_of_day(record.created_at, tz);
  c.posted_duration = static_cast<double>((reference_time - record.created_at).count()) / 86400.0;
  c.file_size_kb = static_cast<double>(record.file_size) / 1024.0;
  c.resolution = record.image_width * record.image_height;
  c.num_comments = record.num_comments;
  c.post_score = record.score;
  return c;
}

OutlierSplit remove_outliers_iqr(const Corpus& corpus, const std::vector<OutlierField>& fields) {
  if (corpus.size() < 4) {
    throw DataError("outlier removal needs at least 4 records, got " + std::to_string(corpus.size()));
  }
  const auto n = static_cast<Eigen::Index>(corpus.size());
  std::vector<std::pair<OutlierField, stats::Fences>> fences;
  for (OutlierField f : fields) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& r = corpus[static_cast<std::size_t>(i)];
      v(i) = static_cast<double>(f == OutlierField::score ? r.score : r.num_comments);
    }
    fences.emplace_back(f, stats::iqr_bounds(v));
  }
  OutlierSplit out;
  for (const auto& r : corpus) {
    bool outside = false;
    for (const auto& [f, fence] : fences) {
      outside = outside || fence.outside(static_cast<double>(f == OutlierField::score ? r.score : r.num_comments));
    }
    (outside ? out.removed : out.kept).push_back(r);
  }
  return out;
}

std::vector<MedianGroup> median_split(const std::vector<double>& scores) {
  if (scores.empty()) return {};
  std::vector<double> sorted = scores;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  const double median = n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  std::vector<MedianGroup> out;
  out.reserve(n);
  for (double s : scores) out.push_back(s > median ? MedianGroup::high : MedianGroup::low);
  return out;
}

std::string record_to_json_line(const PostRecord& r) {
  ordered_json j;
  j["post_id"] = r.post_id;
  j["subreddit"] = r.subreddit;
  j["caption"] = r.caption;
  j["created_at"] = format_utc(r.created_at);
  j["fetched_at"] = format_utc(r.fetched_at);
  j["score"] = r.score;
  j["num_comments"] = r.num_comments;
  j["image_ref"] = r.image_ref;
  j["image_width"] = r.image_width;
  j["image_height"] = r.image_height;
  j["file_size"] = r.file_size;
  ordered_json comments = ordered_json::array();
  for (const auto& c : r.top_comments) {
    ordered_json cj;
    cj["body"] = c.body;
    cj["comment_score"] = c.comment_score;
    comments.push_back(std::move(cj));
  }
  j["top_comments"] = std::move(comments);
  j["image_count"] = r.image_count;
  j["image_url"] = r.image_url;
  j["collection_run"] = r.collection_run;
  return j.dump(-1, ' ', false, json::error_handler_t::strict);
}

PostRecord record_from_json_line(const std::string& line, std::size_t line_number) {
  try {
    const json j = json::parse(line);
    if (!j.is_object()) throw ParseError("corpus record is not a JSON object", line_number);
    PostRecord r;
    r.post_id = j.at("post_id").get<std::string>();
    r.subreddit = j.at("subreddit").get<std::string>();
    r.caption = j.at("caption").get<std::string>();
    r.created_at = parse_utc(j.at("created_at").get<std::string>());
    r.fetched_at = parse_utc(j.at("fetched_at").get<std::string>());
    r.score = j.at("score").get<std::int64_t>();
    r.num_comments = j.at("num_comments").get<std::int64_t>();
    r.image_ref = j.at("image_ref").get<std::string>();
    r.image_width = j.at("image_width").get<std::int64_t>();
    r.image_height = j.at("image_height").get<std::int64_t>();
    r.file_size = j.at("file_size").get<std::int64_t>();
    for (const auto& c : j.at("top_comments")) {
      r.top_comments.push_back({c.at("body").get<std::string>(), c.at("comment_score").get<std::int64_t>()});
    }
    r.image_count = j.value("image_count", std::int64_t{1});
    r.image_url = j.value("image_url", std::string{});
    r.collection_run = j.value("collection_run", std::string{});
    return r;
  } catch (const ParseError&) {
    throw;
  } catch (const json::exception& e) {
    throw ParseError(std::string("corrupt corpus record: ") + e.what(), line_number);
  } catch (const DataError& e) {
    throw ParseError(std::string("corrupt corpus record: ") + e.what(), line_number);
  }
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::string out;
  for (const auto& r : corpus) {
    out += record_to_json_line(r);
    out += '\n';
  }
  write_file_atomic(path, out);
}

Corpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open corpus " + path.string());
  Corpus corpus;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    corpus.push_back(record_from_json_line(line, line_number));
  }
  return corpus;
}

}  // namespace viramem
