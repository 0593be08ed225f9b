#include <gtest/gtest.h>

#include "../support/fixtures.hpp"
#include "../support/scripted_transport.hpp"
#include "../support/synthetic.hpp"
#include "viramem/fsutil.hpp"
#include "viramem/hash.hpp"
#include "viramem/image_header.hpp"
#include "viramem/log.hpp"
#include "viramem/reddit.hpp"

using namespace viramem;
using namespace viramem::reddit;
using viramem::testing::comments_json;
using viramem::testing::listing;
using viramem::testing::post_json;
using viramem::testing::ScriptedTransport;
using namespace std::chrono_literals;

namespace {

const std::string kBase = "https://www.reddit.com";

std::string fixture_image(const std::string& name) {
  return read_file(viramem::testing::fixture_dir() / "images" / name);
}

// PNG bytes made unique by a trailer the header decoder ignores.
std::string unique_png(const std::string& tag) { return fixture_image("icon.png") + tag; }

http::Response png_response(const std::string& tag) { return {200, {{"content-type", "image/png"}}, unique_png(tag)}; }

std::string listing_url(const std::string& sub, const std::string& after = "") {
  return kBase + Client::listing_path(sub, "hot", after.empty() ? std::nullopt : std::optional<std::string>(after));
}

std::string comments_url(const std::string& id) { return kBase + "/comments/" + id + ".json?limit=100&depth=1&sort=top"; }

std::vector<std::pair<std::string, int>> five_comments() {
  return {{"great shot", 50}, {"love it", 40}, {"nice", 30}, {"wow", 20}, {"cool", 10}};
}

// Registers an acceptable single-image post (listing entry not included).
void script_post(ScriptedTransport& t, const std::string& id, const std::string& image_tag = "") {
  t.add_json(comments_url(id), comments_json(id, five_comments()));
  t.add("https://i.redd.it/" + id + ".png", png_response(image_tag.empty() ? id : image_tag));
}

FetchConfig fast_config() {
  FetchConfig c;
  c.min_request_interval = 500ms;
  c.collection_run = "run1";
  return c;
}

struct Fixture {
  http::ManualClock clock{parse_utc("2022-04-20T12:00:00Z")};
  ScriptedTransport transport{clock};
};

}  // namespace

TEST(ImageHeader, DecodesReferenceFiles) {
  const auto expected = viramem::testing::load_json(viramem::testing::fixture_dir() / "images" / "expected.json");
  ASSERT_GE(expected.size(), 7u);
  for (const auto& [name, e] : expected.items()) {
    const auto info = decode_image_header(fixture_image(name));
    ASSERT_TRUE(info) << name;
    EXPECT_EQ(info->width, e["width"].get<int>()) << name;
    EXPECT_EQ(info->height, e["height"].get<int>()) << name;
    EXPECT_EQ(info->format, e["format"].get<std::string>()) << name;
  }
}

TEST(ImageHeader, RejectsNonImagesAndTruncation) {
  EXPECT_FALSE(decode_image_header(fixture_image("not_an_image.html")));
  EXPECT_FALSE(decode_image_header(""));
  const auto jpg = fixture_image("photo.jpg");
  EXPECT_FALSE(decode_image_header(jpg.substr(0, 20)));
  EXPECT_FALSE(decode_image_header(fixture_image("icon.png").substr(0, 20)));
}

TEST(ImageHeader, RasterContentTypes) {
  EXPECT_TRUE(is_raster_content_type("image/jpeg"));
  EXPECT_TRUE(is_raster_content_type("Image/PNG; charset=binary"));
  EXPECT_FALSE(is_raster_content_type("video/mp4"));
  EXPECT_FALSE(is_raster_content_type("text/html; charset=utf-8"));
  EXPECT_FALSE(is_raster_content_type("image/svg+xml"));
}

TEST(Client, ListingPathAndUserAgent) {
  EXPECT_EQ(Client::listing_path("pics", "hot", std::nullopt), "/r/pics/hot.json?limit=100");
  EXPECT_EQ(Client::listing_path("pics", "new", "t3_abc"), "/r/pics/new.json?limit=100&after=t3_abc");
  Fixture f;
  f.transport.add_json(listing_url("pics"), listing({post_json("a1", "pics", 10, 10, "https://i.redd.it/a1.png")}, "t3_a1"));
  Client client(f.transport, f.clock, fast_config());
  const auto page = client.fetch_listing("pics", "hot", std::nullopt);
  ASSERT_EQ(page.entries.size(), 1u);
  EXPECT_EQ(page.entries[0].draft.post_id, "a1");
  EXPECT_EQ(page.entries[0].draft.created_at, parse_utc("2022-04-15T05:20:00Z"));
  EXPECT_EQ(*page.after, "t3_a1");
  EXPECT_EQ(f.transport.log.at(0).request.headers.at("User-Agent"), fast_config().user_agent);
}

TEST(Client, ConfigValidation) {
  Fixture f;
  auto c = fast_config();
  c.min_request_interval = 499ms;
  EXPECT_THROW(Client(f.transport, f.clock, c), DataError);
  c = fast_config();
  c.target_count = 0;
  EXPECT_THROW(Client(f.transport, f.clock, c), DataError);
}

TEST(Client, RetryAfter429BacksOffOnce) {
  Fixture f;
  f.transport.add(listing_url("pics"), {429, {}, ""});
  f.transport.add_json(listing_url("pics"), listing({}));
  Client client(f.transport, f.clock, fast_config());
  EXPECT_NO_THROW(client.fetch_listing("pics", "hot", std::nullopt));
  ASSERT_EQ(f.transport.log.size(), 2u);
  EXPECT_EQ(f.transport.log[1].at - f.transport.log[0].at, 2000ms);
}

TEST(Client, PersistentRateLimitGivesUpAfterFiveRetries) {
  Fixture f;
  f.transport.add(listing_url("pics"), {429, {}, ""});
  Client client(f.transport, f.clock, fast_config());
  try {
    client.fetch_listing("pics", "hot", std::nullopt);
    FAIL() << "expected FetchError";
  } catch (const FetchError& e) {
    EXPECT_EQ(e.status(), 429);
  }
  ASSERT_EQ(f.transport.log.size(), 6u);
  for (std::size_t i = 1; i < 6; ++i) {
    EXPECT_EQ(f.transport.log[i].at - f.transport.log[i - 1].at, 2000ms * (1 << (i - 1)));
  }
}

TEST(Client, HtmlBodyIsProtocolError) {
  Fixture f;
  f.transport.add(listing_url("pics"), {200, {{"content-type", "text/html"}}, "<html>maintenance</html>"});
  Client client(f.transport, f.clock, fast_config());
  EXPECT_THROW(client.fetch_listing("pics", "hot", std::nullopt), ProtocolError);
}

TEST(Client, TopCommentsByScore) {
  Fixture f;
  std::vector<std::pair<std::string, int>> ten;
  for (int s : {3, 9, 1, 10, 5, 7, 2, 8, 6, 4}) ten.push_back({"c" + std::to_string(s), s});
  f.transport.add_json(comments_url("p10"), comments_json("p10", ten));
  f.transport.add_json(comments_url("p3"), comments_json("p3", {{"x", 1}, {"y", 3}, {"z", 2}}));
  f.transport.add_json(comments_url("pd"), comments_json("pd", {{"[deleted]", 9}, {"[removed]", 8}}));
  f.transport.add_json(comments_url("pm"), comments_json("pm", {{"[deleted]", 99}, {"a", 5}, {"b", 4}, {"c", 3},
                                                                {"d", 2}, {"e", 1}, {"f", 0}}));
  Client client(f.transport, f.clock, fast_config());
  const auto top = client.fetch_top_comments("p10");
  ASSERT_EQ(top.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(top[i].body, "c" + std::to_string(10 - i));
  const auto three = client.fetch_top_comments("p3");
  ASSERT_EQ(three.size(), 3u);
  EXPECT_EQ(three[0].body, "y");
  EXPECT_TRUE(client.fetch_top_comments("pd").empty());
  const auto skipped = client.fetch_top_comments("pm");
  ASSERT_EQ(skipped.size(), 5u);
  EXPECT_EQ(skipped.front().body, "a");
  EXPECT_EQ(skipped.back().body, "e");
}

TEST(Client, DeletedPostYieldsNoCommentsAndWarns) {
  Fixture f;
  auto j = comments_json("gone", {{"still here", 3}});
  j[0]["data"]["children"][0]["data"]["removed_by_category"] = "deleted";
  f.transport.add_json(comments_url("gone"), j);
  std::vector<std::string> warnings;
  auto previous = set_warning_sink([&](const std::string& m) { warnings.push_back(m); });
  Client client(f.transport, f.clock, fast_config());
  EXPECT_TRUE(client.fetch_top_comments("gone").empty());
  EXPECT_TRUE(client.fetch_top_comments("missing").empty());  // 404
  set_warning_sink(previous);
  EXPECT_EQ(warnings.size(), 2u);
}

TEST(Client, DownloadImage) {
  Fixture f;
  f.transport.add("https://i.redd.it/photo.jpg", {200, {{"content-type", "image/jpeg"}}, fixture_image("photo.jpg")});
  f.transport.add("https://v.redd.it/clip.mp4", {200, {{"content-type", "video/mp4"}}, "....ftypmp42"});
  f.transport.add("https://i.redd.it/broken.png", {200, {{"content-type", "image/png"}}, "not really a png"});
  Client client(f.transport, f.clock, fast_config());
  const auto ok = client.download_image("https://i.redd.it/photo.jpg");
  EXPECT_EQ(ok.reject, RejectReason::none);
  EXPECT_EQ(ok.info->width, 640);
  EXPECT_EQ(ok.info->height, 480);
  EXPECT_EQ(client.download_image("https://v.redd.it/clip.mp4").reject, RejectReason::multi_or_nonimage);
  EXPECT_EQ(client.download_image("https://i.redd.it/broken.png").reject, RejectReason::corrupt_image);
  try {
    client.download_image("https://i.redd.it/missing.jpg");
    FAIL() << "expected FetchError";
  } catch (const FetchError& e) {
    EXPECT_EQ(e.status(), 404);
  }
}

TEST(ImageStore, ContentAddressedAndReopenable) {
  const auto dir = viramem::testing::temp_dir("image_store");
  const auto bytes = fixture_image("icon.png");
  const auto info = *decode_image_header(bytes);
  std::string ref;
  {
    ImageStore store(dir);
    ref = store.put(bytes, info);
    EXPECT_EQ(ref, sha256_hex(bytes) + ".png");
    EXPECT_EQ(store.put(bytes, info), ref);
  }
  ImageStore reopened(dir);
  EXPECT_EQ(reopened.find(sha256_hex(bytes)), ref);
  EXPECT_EQ(read_file(reopened.path(ref)), bytes);
  EXPECT_EQ(std::distance(std::filesystem::directory_iterator(dir), std::filesystem::directory_iterator()), 1);
}

TEST(Collection, QuotaDuplicatesAndAccounting) {
  Fixture f;
  // Three subreddits, four good posts each, plus rejects and a cross-posted duplicate.
  for (const std::string sub : {"pics", "pic", "images"}) {
    std::vector<nlohmann::json> posts;
    for (int i = 0; i < 4; ++i) {
      const auto id = sub + std::to_string(i);
      posts.push_back(post_json(id, sub, 100, 20, "https://i.redd.it/" + id + ".png"));
      script_post(f.transport, id);
    }
    posts.insert(posts.begin(), post_json(sub + "_low", sub, 4, 20, "https://i.redd.it/x.png"));
    f.transport.add_json(listing_url(sub), listing(posts));
  }
  auto config = fast_config();
  config.per_subreddit_quota = 2;
  config.target_count = 100;
  Client client(f.transport, f.clock, config);
  ImageStore store(viramem::testing::temp_dir("collection_quota"));
  const auto result = run_collection(client, store);
  EXPECT_EQ(result.accepted.size(), 6u);
  EXPECT_EQ(result.receipt.accepted, 6);
  EXPECT_EQ(result.receipt.rejected_by_reason.at(RejectReason::low_score), 3);
  EXPECT_TRUE(result.receipt.reconciles());
  for (const auto& r : result.accepted) {
    EXPECT_EQ(r.top_comments.size(), 5u);
    EXPECT_EQ(r.collection_run, "run1");
    EXPECT_EQ(r.image_width, 37);
    EXPECT_TRUE(std::filesystem::exists(store.path(r.image_ref)));
    EXPECT_TRUE(filter_valid(r).accepted);
  }
}

TEST(Collection, DuplicatePostAndImageCountedOnce) {
  Fixture f;
  f.transport.add_json(listing_url("pics"), listing({post_json("dup", "pics", 50, 9, "https://i.redd.it/dup.png"),
                                                     post_json("same", "pics", 50, 9, "https://i.redd.it/same.png"),
                                                     post_json("vid", "pics", 50, 9, "https://v.redd.it/vid")}));
  f.transport.add_json(listing_url("pic"), listing({post_json("dup", "pic", 50, 9, "https://i.redd.it/dup.png")}));
  script_post(f.transport, "dup", "shared-bytes");
  script_post(f.transport, "same", "shared-bytes");
  auto config = fast_config();
  config.subreddits = {"pics", "pic"};
  config.target_count = 10;
  Client client(f.transport, f.clock, config);
  ImageStore store(viramem::testing::temp_dir("collection_dup"));
  const auto result = run_collection(client, store);
  ASSERT_EQ(result.accepted.size(), 1u);
  EXPECT_EQ(result.accepted[0].post_id, "dup");
  EXPECT_EQ(result.receipt.rejected_by_reason.at(RejectReason::duplicate), 2);
  EXPECT_EQ(result.receipt.rejected_by_reason.at(RejectReason::multi_or_nonimage), 1);
  EXPECT_EQ(result.receipt.examined, 4);
  EXPECT_TRUE(result.receipt.reconciles());
  EXPECT_EQ(f.transport.count("https://i.redd.it/dup.png"), 1u);
}

TEST(Collection, FetchErrorsAreCountedNotFatal) {
  Fixture f;
  f.transport.add_json(listing_url("pics"), listing({post_json("ok", "pics", 50, 9, "https://i.redd.it/ok.png"),
                                                     post_json("nofile", "pics", 50, 9, "https://i.redd.it/nofile.png")}));
  script_post(f.transport, "ok");
  f.transport.add_json(comments_url("nofile"), comments_json("nofile", five_comments()));
  auto config = fast_config();
  config.subreddits = {"pics", "gone"};
  Client client(f.transport, f.clock, config);
  ImageStore store(viramem::testing::temp_dir("collection_errors"));
  auto previous = set_warning_sink([](const std::string&) {});
  const auto result = run_collection(client, store);
  set_warning_sink(previous);
  EXPECT_EQ(result.accepted.size(), 1u);
  EXPECT_EQ(result.receipt.rejected_by_reason.at(RejectReason::fetch_error), 1);
  EXPECT_EQ(result.receipt.http_errors, 2);  // image 404 and the missing subreddit listing
  EXPECT_TRUE(result.receipt.reconciles());
}

TEST(Collection, RequestsRespectMinimumInterval) {
  Fixture f;
  std::vector<nlohmann::json> posts;
  for (int i = 0; i < 5; ++i) {
    const auto id = "p" + std::to_string(i);
    posts.push_back(post_json(id, "pics", 50, 9, "https://i.redd.it/" + id + ".png"));
    script_post(f.transport, id);
  }
  f.transport.add(listing_url("pics"), {429, {}, ""});
  f.transport.add_json(listing_url("pics"), listing(posts));
  auto config = fast_config();
  config.subreddits = {"pics"};
  config.min_request_interval = 750ms;
  Client client(f.transport, f.clock, config);
  ImageStore store(viramem::testing::temp_dir("collection_interval"));
  run_collection(client, store);
  ASSERT_GE(f.transport.log.size(), 12u);
  for (std::size_t i = 1; i < f.transport.log.size(); ++i) {
    EXPECT_GE(f.transport.log[i].at - f.transport.log[i - 1].at, 750ms);
  }
}

TEST(Collection, ResumeWithCursorSkipsKnownPostsAndImages) {
  Fixture f;
  f.transport.add_json(listing_url("pics"), listing({post_json("a", "pics", 50, 9, "https://i.redd.it/a.png")}, "t3_a"));
  f.transport.add_json(listing_url("pics", "t3_a"),
                       listing({post_json("a", "pics", 50, 9, "https://i.redd.it/a.png"),
                                post_json("b", "pics", 50, 9, "https://i.redd.it/b.png")}));
  script_post(f.transport, "a");
  script_post(f.transport, "b");
  auto config = fast_config();
  config.subreddits = {"pics"};
  config.target_count = 1;
  const auto dir = viramem::testing::temp_dir("collection_resume");
  Corpus corpus;
  CursorState cursor;
  {
    Client client(f.transport, f.clock, config);
    ImageStore store(dir);
    auto first = run_collection(client, store, corpus, cursor);
    ASSERT_EQ(first.accepted.size(), 1u);
    corpus = first.accepted;
    cursor = CursorState::from_json_text(first.cursor.to_json_text());
  }
  EXPECT_EQ(cursor.after.at("pics"), "t3_a");
  config.target_count = 5;
  Client client(f.transport, f.clock, config);
  ImageStore store(dir);
  const auto second = run_collection(client, store, corpus, cursor);
  ASSERT_EQ(second.accepted.size(), 1u);
  EXPECT_EQ(second.accepted[0].post_id, "b");
  EXPECT_EQ(second.receipt.rejected_by_reason.at(RejectReason::duplicate), 1);
  EXPECT_EQ(f.transport.count("https://i.redd.it/a.png"), 1u);
  EXPECT_EQ(f.transport.count(listing_url("pics")), 1u);
  EXPECT_TRUE(second.cursor.exhausted.count("pics"));
}

TEST(Collection, ZeroAcceptedWarnsButSucceeds) {
  Fixture f;
  f.transport.add_json(listing_url("pics"), listing({post_json("low", "pics", 1, 1, "https://i.redd.it/low.png")}));
  auto config = fast_config();
  config.subreddits = {"pics"};
  Client client(f.transport, f.clock, config);
  ImageStore store(viramem::testing::temp_dir("collection_zero"));
  std::vector<std::string> warnings;
  auto previous = set_warning_sink([&](const std::string& m) { warnings.push_back(m); });
  const auto result = run_collection(client, store);
  set_warning_sink(previous);
  EXPECT_TRUE(result.accepted.empty());
  EXPECT_TRUE(result.receipt.reconciles());
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_NE(warnings[0].find("no posts"), std::string::npos);
}

TEST(Transcripts, RecordThenReplay) {
  Fixture f;
  f.transport.add_json(listing_url("pics"), listing({post_json("a", "pics", 50, 9, "https://i.redd.it/a.png")}));
  f.transport.add("https://i.redd.it/a.png", png_response("a"));
  const auto dir = viramem::testing::temp_dir("transcripts");
  http::RecordingTransport recorder(f.transport, dir);
  http::Request listing_req{"GET", listing_url("pics"), {}};
  http::Request image_req{"GET", "https://i.redd.it/a.png", {}};
  const auto l1 = recorder.send(listing_req);
  const auto i1 = recorder.send(image_req);
  http::ReplayTransport replay(dir);
  const auto l2 = replay.send(listing_req);
  const auto i2 = replay.send(image_req);
  EXPECT_EQ(l2.body, l1.body);
  EXPECT_EQ(i2.body, i1.body);
  EXPECT_EQ(i2.header("content-type"), "image/png");
  EXPECT_THROW(replay.send({"GET", "https://i.redd.it/unknown.png", {}}), FetchError);
}

TEST(Transcripts, ReplayServesExchangesInOrder) {
  Fixture f;
  f.transport.add(listing_url("pics"), {429, {}, ""});
  f.transport.add_json(listing_url("pics"), listing({}));
  const auto dir = viramem::testing::temp_dir("transcripts_order");
  {
    http::RecordingTransport recorder(f.transport, dir);
    Client client(recorder, f.clock, fast_config());
    client.fetch_listing("pics", "hot", std::nullopt);
  }
  http::ReplayTransport replay(dir);
  http::ManualClock clock;
  Client client(replay, clock, fast_config());
  EXPECT_NO_THROW(client.fetch_listing("pics", "hot", std::nullopt));
  EXPECT_EQ(clock.now(), 2000ms);
}

TEST(Http, SplitUrl) {
  EXPECT_EQ(http::split_url("https://www.reddit.com/r/pics/hot.json?limit=100"),
            std::make_pair(std::string("https://www.reddit.com"), std::string("/r/pics/hot.json?limit=100")));
  EXPECT_EQ(http::split_url("http://localhost:8080").second, "/");
  EXPECT_THROW(http::split_url("ftp://x/y"), DataError);
  EXPECT_THROW(http::split_url("/relative"), DataError);
}

TEST(Http, RateLimiterWaitsOnlyWhenNeeded) {
  http::ManualClock clock;
  http::RateLimiter limiter(clock, 500ms);
  limiter.acquire();
  EXPECT_EQ(clock.now(), 0ms);
  limiter.acquire();
  EXPECT_EQ(clock.now(), 500ms);
  clock.advance(2000ms);
  limiter.acquire();
  EXPECT_EQ(clock.now(), 2500ms);
}
