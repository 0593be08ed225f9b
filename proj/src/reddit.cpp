#include "viramem/reddit.hpp"

#include <json.hpp>

#include <algorithm>
#include <variant>

#include "viramem/error.hpp"
#include "viramem/fsutil.hpp"
#include "viramem/hash.hpp"
#include "viramem/log.hpp"

namespace viramem::reddit {

namespace {

using nlohmann::json;

json parse_body(const http::Response& r, const std::string& url) {
  try {
    return json::parse(r.body);
  } catch (const json::parse_error&) {
    throw ProtocolError("response from " + url + " is not JSON (content-type '" + r.header("content-type") + "')");
  }
}

const json& listing_children(const json& j, const std::string& url) {
  if (!j.is_object() || j.value("kind", "") != "Listing" || !j.contains("data") || !j["data"].is_object() ||
      !j["data"].contains("children") || !j["data"]["children"].is_array()) {
    throw ProtocolError("response from " + url + " is not a listing");
  }
  return j["data"]["children"];
}

template <typename T>
T field(const json& d, const char* key, T fallback) {
  const auto it = d.find(key);
  if (it == d.end() || it->is_null()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ProtocolError(std::string("listing field '") + key + "' has an unexpected type");
  }
}

std::string url_extension(const std::string& url) {
  auto path = url.substr(0, url.find_first_of("?#"));
  const auto slash = path.rfind('/');
  const auto dot = path.rfind('.');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return "";
  auto ext = path.substr(dot + 1);
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext;
}

bool looks_like_image(const json& d, const std::string& url) {
  static const std::set<std::string> exts{"jpg", "jpeg", "png", "gif", "webp", "bmp"};
  return exts.count(url_extension(url)) || field<std::string>(d, "post_hint", "") == "image" ||
         field<std::string>(d, "domain", "") == "i.redd.it";
}

ListingEntry parse_entry(const json& d) {
  ListingEntry e;
  auto& p = e.draft;
  p.post_id = field<std::string>(d, "id", "");
  if (p.post_id.empty()) throw ProtocolError("listing entry without id");
  p.subreddit = field<std::string>(d, "subreddit", "");
  p.caption = field<std::string>(d, "title", "");
  p.created_at = from_unix_seconds(field<double>(d, "created_utc", 0.0));
  p.score = field<std::int64_t>(d, "score", 0);
  p.num_comments = field<std::int64_t>(d, "num_comments", 0);
  p.image_url = field<std::string>(d, "url_overridden_by_dest", field<std::string>(d, "url", ""));
  if (field<bool>(d, "is_gallery", false)) {
    const auto items = d.contains("gallery_data") && d["gallery_data"].is_object()
                           ? d["gallery_data"].value("items", json::array())
                           : json::array();
    p.image_count = static_cast<std::int64_t>(items.size());
  } else if (field<bool>(d, "is_self", false)) {
    p.image_count = 0;
  } else if (field<bool>(d, "is_video", false) || !looks_like_image(d, p.image_url)) {
    e.non_image = true;
  }
  return e;
}

bool deleted_body(const std::string& body) { return body.empty() || body == "[deleted]" || body == "[removed]"; }

}  // namespace

void FetchConfig::validate() const {
  if (target_count < 1) throw DataError("fetch: target_count must be at least 1");
  if (min_request_interval < std::chrono::milliseconds(500)) {
    throw DataError("fetch: min_request_interval must be at least 500 ms");
  }
  if (subreddits.empty()) throw DataError("fetch: no subreddits configured");
  if (per_subreddit_quota < 0) throw DataError("fetch: per_subreddit_quota must not be negative");
}

std::int64_t FetchConfig::quota() const {
  if (per_subreddit_quota > 0) return per_subreddit_quota;
  const auto k = static_cast<std::int64_t>(subreddits.size());
  return (target_count + k - 1) / k;
}

Client::Client(http::Transport& transport, http::Clock& clock, FetchConfig config)
    : transport_(transport), clock_(clock), config_(std::move(config)), limiter_(clock, config_.min_request_interval) {
  config_.validate();
}

std::string Client::listing_path(const std::string& subreddit, const std::string& sort,
                                 const std::optional<std::string>& cursor) {
  auto path = "/r/" + subreddit + "/" + sort + ".json?limit=100";
  if (cursor && !cursor->empty()) path += "&after=" + *cursor;
  return path;
}

http::Response Client::get(const std::string& url) {
  http::Request req;
  req.url = url;
  req.headers["User-Agent"] = config_.user_agent;
  constexpr int kMaxRetries = 5;
  for (int attempt = 0;; ++attempt) {
    limiter_.acquire();
    auto res = transport_.send(req);
    if (res.status == 429) {
      if (attempt == kMaxRetries) throw FetchError("rate limited by " + url + " after 5 retries", 429);
      clock_.sleep_for(std::chrono::milliseconds(2000) * (1 << attempt));
      continue;
    }
    if (res.status < 200 || res.status >= 300) {
      throw FetchError("GET " + url + " returned HTTP " + std::to_string(res.status), res.status);
    }
    return res;
  }
}

ListingPage Client::fetch_listing(const std::string& subreddit, const std::string& sort,
                                  const std::optional<std::string>& cursor) {
  const auto url = config_.base_url + listing_path(subreddit, sort, cursor);
  const auto j = parse_body(get(url), url);
  ListingPage page;
  for (const auto& child : listing_children(j, url)) {
    if (child.value("kind", "") != "t3" || !child.contains("data")) continue;
    page.entries.push_back(parse_entry(child["data"]));
  }
  const auto after = j["data"].find("after");
  if (after != j["data"].end() && after->is_string() && !after->get<std::string>().empty()) {
    page.after = after->get<std::string>();
  }
  return page;
}

std::vector<CommentRecord> Client::fetch_top_comments(const std::string& post_id, std::size_t n) {
  const auto url = config_.base_url + "/comments/" + post_id + ".json?limit=100&depth=1&sort=top";
  http::Response res;
  try {
    res = get(url);
  } catch (const FetchError& e) {
    if (e.status() != 404) throw;
    warn("post " + post_id + " not found; no comments");
    return {};
  }
  const auto j = parse_body(res, url);
  if (!j.is_array() || j.size() < 2) throw ProtocolError("comment response for " + post_id + " is not a listing pair");
  for (const auto& child : listing_children(j[0], url)) {
    const auto& d = child.value("data", json::object());
    if (!field<std::string>(d, "removed_by_category", "").empty() || field<std::string>(d, "author", "") == "[deleted]") {
      warn("post " + post_id + " was deleted; no comments");
      return {};
    }
  }
  std::vector<CommentRecord> comments;
  for (const auto& child : listing_children(j[1], url)) {
    if (child.value("kind", "") != "t1" || !child.contains("data")) continue;
    const auto& d = child["data"];
    auto body = field<std::string>(d, "body", "");
    if (deleted_body(body)) continue;
    comments.push_back({std::move(body), field<std::int64_t>(d, "score", 0)});
  }
  std::stable_sort(comments.begin(), comments.end(),
                   [](const CommentRecord& a, const CommentRecord& b) { return a.comment_score > b.comment_score; });
  if (comments.size() > n) comments.resize(n);
  return comments;
}

ImageDownload Client::download_image(const std::string& url) {
  auto res = get(url);
  ImageDownload out;
  out.content_type = res.header("content-type");
  if (!is_raster_content_type(out.content_type)) {
    out.reject = RejectReason::multi_or_nonimage;
    return out;
  }
  out.info = decode_image_header(res.body);
  if (!out.info) {
    out.reject = RejectReason::corrupt_image;
    return out;
  }
  out.bytes = std::move(res.body);
  return out;
}

ImageStore::ImageStore(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
  for (const auto& entry : std::filesystem::directory_iterator(dir_)) {
    if (!entry.is_regular_file()) continue;
    const auto name = entry.path().filename().string();
    const auto stem = entry.path().stem().string();
    if (stem.size() == 64 && name.find(".tmp-") == std::string::npos) refs_[stem] = name;
  }
}

std::optional<std::string> ImageStore::find(const std::string& hash) const {
  const auto it = refs_.find(hash);
  if (it == refs_.end()) return std::nullopt;
  return it->second;
}

std::string ImageStore::put(const std::string& bytes, const ImageInfo& info) {
  const auto hash = sha256_hex(bytes);
  if (const auto existing = find(hash)) return *existing;
  const auto ref = hash + "." + info.extension();
  write_file_atomic(dir_ / ref, bytes);
  refs_[hash] = ref;
  return ref;
}

std::int64_t FetchReceipt::rejected() const {
  std::int64_t total = 0;
  for (const auto& [reason, count] : rejected_by_reason) total += count;
  return total;
}

std::string FetchReceipt::to_json_text() const {
  nlohmann::ordered_json j;
  j["fetched_at"] = format_utc(fetched_at);
  j["examined"] = examined;
  j["accepted"] = accepted;
  nlohmann::ordered_json reasons = nlohmann::ordered_json::object();
  for (const auto& [reason, count] : rejected_by_reason) reasons[to_string(reason)] = count;
  j["rejected_by_reason"] = reasons;
  j["http_errors"] = http_errors;
  return j.dump(2) + "\n";
}

std::string CursorState::to_json_text() const {
  nlohmann::ordered_json j;
  j["after"] = after;
  j["exhausted"] = exhausted;
  return j.dump(2) + "\n";
}

CursorState CursorState::from_json_text(const std::string& text) {
  try {
    const auto j = json::parse(text);
    CursorState c;
    c.after = j.value("after", std::map<std::string, std::string>{});
    c.exhausted = j.value("exhausted", std::set<std::string>{});
    return c;
  } catch (const json::exception& e) {
    throw DataError(std::string("cursor file: ") + e.what());
  }
}

namespace {

class Collector {
 public:
  Collector(Client& client, ImageStore& store, const Corpus& existing) : client_(client), store_(store) {
    for (const auto& r : existing) {
      ids_.insert(r.post_id);
      if (const auto h = image_hash(r); !h.empty()) hashes_.insert(h);
    }
  }

  // Returns the accepted record, or counts the rejection.
  std::optional<PostRecord> examine(const ListingEntry& entry, FetchReceipt& receipt) {
    ++receipt.examined;
    const auto reason = classify(entry, receipt);
    if (std::holds_alternative<PostRecord>(reason)) {
      ++receipt.accepted;
      return std::get<PostRecord>(reason);
    }
    ++receipt.rejected_by_reason[std::get<RejectReason>(reason)];
    return std::nullopt;
  }

 private:
  std::variant<PostRecord, RejectReason> classify(const ListingEntry& entry, FetchReceipt& receipt) {
    PostRecord record = entry.draft;
    record.fetched_at = std::max(client_.clock().utc_now(), record.created_at);
    record.collection_run = client_.config().collection_run;
    if (ids_.count(record.post_id)) return RejectReason::duplicate;
    if (entry.non_image) return RejectReason::multi_or_nonimage;
    try {
      if (const auto d = filter_valid(record); !d.accepted) return d.reason;
    } catch (const ValidationError& e) {
      warn("post " + record.post_id + ": " + e.what());
      return RejectReason::fetch_error;
    }
    ImageDownload image;
    try {
      record.top_comments = client_.fetch_top_comments(record.post_id);
      image = client_.download_image(record.image_url);
    } catch (const FetchError& e) {
      ++receipt.http_errors;
      warn("post " + record.post_id + ": " + e.what());
      return RejectReason::fetch_error;
    } catch (const ProtocolError& e) {
      warn("post " + record.post_id + ": " + e.what());
      return RejectReason::fetch_error;
    }
    if (image.reject != RejectReason::none) return image.reject;
    const auto hash = sha256_hex(image.bytes);
    if (hashes_.count(hash)) return RejectReason::duplicate;
    record.image_ref = store_.put(image.bytes, *image.info);
    record.image_width = image.info->width;
    record.image_height = image.info->height;
    record.file_size = static_cast<std::int64_t>(image.bytes.size());
    check_record(record);
    ids_.insert(record.post_id);
    hashes_.insert(hash);
    return record;
  }

  Client& client_;
  ImageStore& store_;
  std::set<std::string> ids_;
  std::set<std::string> hashes_;
};

}  // namespace

CollectionResult run_collection(Client& client, ImageStore& store, const Corpus& existing, CursorState cursor) {
  const auto& config = client.config();
  CollectionResult result;
  result.receipt.fetched_at = client.clock().utc_now();
  Collector collector(client, store, existing);
  std::map<std::string, std::int64_t> accepted_by_sub;
  std::map<std::string, int> pages;
  std::vector<std::string> active;
  for (const auto& sub : config.subreddits) {
    if (!cursor.exhausted.count(sub)) active.push_back(sub);
  }
  const auto quota = config.quota();
  auto total = [&] { return static_cast<std::int64_t>(result.accepted.size()); };
  while (!active.empty() && total() < config.target_count) {
    std::vector<std::string> still_active;
    for (const auto& sub : active) {
      if (accepted_by_sub[sub] >= quota || total() >= config.target_count) continue;
      std::optional<std::string> after;
      if (const auto it = cursor.after.find(sub); it != cursor.after.end()) after = it->second;
      ListingPage page;
      try {
        page = client.fetch_listing(sub, config.sort_order, after);
      } catch (const FetchError& e) {
        ++result.receipt.http_errors;
        warn("listing r/" + sub + ": " + e.what());
        continue;
      } catch (const ProtocolError& e) {
        warn("listing r/" + sub + ": " + e.what());
        continue;
      }
      for (const auto& entry : page.entries) {
        if (accepted_by_sub[sub] >= quota || total() >= config.target_count) break;
        if (auto record = collector.examine(entry, result.receipt)) {
          result.accepted.push_back(std::move(*record));
          ++accepted_by_sub[sub];
        }
      }
      if (page.after) cursor.after[sub] = *page.after;
      if (!page.after || ++pages[sub] >= config.max_pages_per_subreddit) {
        if (!page.after) cursor.exhausted.insert(sub);
        continue;
      }
      still_active.push_back(sub);
    }
    active = std::move(still_active);
  }
  if (result.accepted.empty()) warn("collection accepted no posts");
  result.cursor = std::move(cursor);
  return result;
}

}  // namespace viramem::reddit
