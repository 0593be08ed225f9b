#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "viramem/time.hpp"

namespace viramem {

struct CommentRecord {
  std::string body;
  std::int64_t comment_score = 0;

  bool operator==(const CommentRecord&) const = default;
};

struct PostRecord {
  std::string post_id;
  std::string subreddit;
  std::string caption;
  Timestamp created_at{};
  Timestamp fetched_at{};
  std::int64_t score = 0;
  std::int64_t num_comments = 0;
  std::string image_ref;  // "<sha256>.<ext>" inside the image store
  std::int64_t image_width = 0;
  std::int64_t image_height = 0;
  std::int64_t file_size = 0;
  std::vector<CommentRecord> top_comments;
  // Number of image attachments seen at listing time.
  std::int64_t image_count = 1;
  std::string image_url;
  // Collection time point; per-timepoint analyses group on this tag.
  std::string collection_run;

  bool operator==(const PostRecord&) const = default;
};

using Corpus = std::vector<PostRecord>;

inline constexpr std::size_t kMaxTopComments = 5;
inline constexpr std::int64_t kMinScore = 5;
inline constexpr std::int64_t kMinComments = 5;

enum class RejectReason {
  none,
  low_score,
  too_few_comments,
  no_image,
  multi_image,
  multi_or_nonimage,
  corrupt_image,
  duplicate,
  fetch_error,
};

std::string to_string(RejectReason r);

struct FilterDecision {
  bool accepted = false;
  RejectReason reason = RejectReason::none;
};

/// Structural checks (ids, counts, comment ordering, image metadata once an
/// image is attached). Throws ValidationError.
void check_record(const PostRecord& record);

/// Collection criteria: score >= 5, num_comments >= 5, exactly one image.
/// Structurally malformed records throw ValidationError instead.
FilterDecision filter_valid(const PostRecord& record);

/// Content hash of the stored image ("" when none is attached).
std::string image_hash(const PostRecord& record);

/// One record per post_id, then one per image hash; the earliest fetched_at
/// wins (input order breaks ties). Survivors keep their input order.
Corpus dedup(const Corpus& corpus);

struct CovariateVector {
  std::int64_t caption_length = 0;
  int time_of_day = 0;  // day = 0, night = 1
  double posted_duration = 0.0;  // days
  double file_size_kb = 0.0;
  std::int64_t resolution = 0;
  std::optional<double> avg_sentiment;
  std::int64_t num_comments = 0;
  std::int64_t post_score = 0;
};

/// Count of Unicode letters.
std::int64_t caption_letters(const std::string& caption);

/// Day is local hour in [06:00, 18:00).
int time_of_day(Timestamp created_at, UtcOffset tz);

CovariateVector derive_covariates(const PostRecord& record, Timestamp reference_time, UtcOffset tz = {});

enum class OutlierField { score, num_comments };

struct OutlierSplit {
  Corpus kept;
  Corpus removed;
};

/// Single pass: fences come from the full input; a record goes if any
/// listed field falls outside them. Requires at least 4 records.
OutlierSplit remove_outliers_iqr(const Corpus& corpus,
                                 const std::vector<OutlierField>& fields = {OutlierField::score,
                                                                            OutlierField::num_comments});

enum class MedianGroup { low, high };

/// high iff strictly above the sample median.
std::vector<MedianGroup> median_split(const std::vector<double>& scores);

/// Newline-delimited JSON, one record per line. Written to a temporary file
/// and renamed into place.
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);
Corpus load_corpus(const std::filesystem::path& path);

std::string record_to_json_line(const PostRecord& record);
PostRecord record_from_json_line(const std::string& line, std::size_t line_number);

}  // namespace viramem
