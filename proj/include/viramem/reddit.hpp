#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "viramem/corpus.hpp"
#include "viramem/http.hpp"
#include "viramem/image_header.hpp"

namespace viramem::reddit {

struct FetchConfig {
  std::vector<std::string> subreddits{"pics", "pic", "images"};
  std::int64_t target_count = 600;
  // 0 splits target_count evenly (rounded up) across subreddits.
  std::int64_t per_subreddit_quota = 0;
  std::string user_agent = "viramem/0.1 (image memorability research)";
  std::chrono::milliseconds min_request_interval{1000};
  std::string sort_order = "hot";
  std::string base_url = "https://www.reddit.com";
  std::string collection_run;
  int max_pages_per_subreddit = 40;

  /// Throws DataError on target_count < 1, an interval under 500 ms, or an
  /// empty subreddit list.
  void validate() const;
  std::int64_t quota() const;
};

/// One post as listed, before comments and image are fetched.
struct ListingEntry {
  PostRecord draft;   // no image fields or comments yet
  bool non_image = false;  // video, self post or external link
};

struct ListingPage {
  std::vector<ListingEntry> entries;
  std::optional<std::string> after;
};

struct ImageDownload {
  RejectReason reject = RejectReason::none;
  std::string bytes;
  std::string content_type;
  std::optional<ImageInfo> info;
};

class Client {
 public:
  /// Every request waits on the rate limiter and carries the user agent.
  Client(http::Transport& transport, http::Clock& clock, FetchConfig config);

  static std::string listing_path(const std::string& subreddit, const std::string& sort,
                                  const std::optional<std::string>& cursor);

  /// Non-JSON or structurally wrong bodies throw ProtocolError.
  ListingPage fetch_listing(const std::string& subreddit, const std::string& sort,
                            const std::optional<std::string>& cursor);

  /// Top-level comments by score, deleted or removed bodies skipped before
  /// truncation to n. A deleted post yields [] with a warning.
  std::vector<CommentRecord> fetch_top_comments(const std::string& post_id, std::size_t n = kMaxTopComments);

  /// Non-raster content types reject as multi_or_nonimage, undecodable
  /// headers as corrupt_image. HTTP errors throw FetchError.
  ImageDownload download_image(const std::string& url);

  /// GET with rate limiting. 429 backs off 2 s, 4 s, ... for up to 5
  /// retries; any other non-2xx status throws FetchError.
  http::Response get(const std::string& url);

  const FetchConfig& config() const { return config_; }
  http::Clock& clock() { return clock_; }

 private:
  http::Transport& transport_;
  http::Clock& clock_;
  FetchConfig config_;
  http::RateLimiter limiter_;
};

/// Content-addressed image directory: "<sha256>.<ext>".
class ImageStore {
 public:
  explicit ImageStore(std::filesystem::path dir);

  std::optional<std::string> find(const std::string& hash) const;
  /// Stores the bytes unless the hash is present; returns the image_ref.
  std::string put(const std::string& bytes, const ImageInfo& info);
  std::filesystem::path path(const std::string& image_ref) const { return dir_ / image_ref; }
  const std::filesystem::path& directory() const { return dir_; }

 private:
  std::filesystem::path dir_;
  std::map<std::string, std::string> refs_;  // hash -> image_ref
};

struct FetchReceipt {
  Timestamp fetched_at{};
  std::int64_t examined = 0;
  std::int64_t accepted = 0;
  std::map<RejectReason, std::int64_t> rejected_by_reason;
  std::int64_t http_errors = 0;

  std::int64_t rejected() const;
  bool reconciles() const { return accepted + rejected() == examined; }
  std::string to_json_text() const;
};

/// Listing position per subreddit, persisted between runs.
struct CursorState {
  std::map<std::string, std::string> after;
  std::set<std::string> exhausted;

  std::string to_json_text() const;
  static CursorState from_json_text(const std::string& text);
};

struct CollectionResult {
  Corpus accepted;
  FetchReceipt receipt;
  CursorState cursor;
};

/// Walks listings round-robin until target_count is reached or every
/// subreddit hits its quota or runs out of pages. Posts and images already in
/// `existing` count as duplicates and are not downloaded again when the post
/// id is known. Nothing is written except image files.
CollectionResult run_collection(Client& client, ImageStore& store, const Corpus& existing = {},
                                CursorState cursor = {});

}  // namespace viramem::reddit
