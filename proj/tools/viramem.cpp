#include <CLI11.hpp>

#include <iostream>
#include <memory>
#include <sstream>

#include "viramem/error.hpp"
#include "viramem/fsutil.hpp"
#include "viramem/pipeline.hpp"
#include "viramem/report.hpp"

namespace {

namespace fs = std::filesystem;
using namespace viramem;

// Exit codes.
constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kData = 2;
constexpr int kNumeric = 3;

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

struct AnalyzeArgs {
  std::string config;
  std::string output_dir;
  bool no_outlier_removal = false;
  bool dedupe_tokens = false;
};

RunConfig load_config(const std::string& path) { return load_run_config(path, VIRAMEM_DATA_DIR); }

int run_analyze(const AnalyzeArgs& a) {
  auto config = load_config(a.config);
  if (!a.output_dir.empty()) config.output_dir = fs::absolute(a.output_dir);
  if (a.no_outlier_removal) config.outlier_removal = false;
  if (a.dedupe_tokens) config.dedupe_comment_tokens = true;
  const auto result = pipeline::cmd_analyze(config);
  for (const auto& p : result.outputs) std::cout << "wrote " << p.string() << "\n";
  std::cout << "run metadata " << result.metadata.string() << "\n";
  return kOk;
}

int run_validate(const std::string& config_path) {
  const auto report = pipeline::cmd_validate(load_config(config_path));
  std::cout << report.to_text();
  return report.ok() ? kOk : kData;
}

int run_report(const std::string& dir) {
  for (const auto& p : report::cmd_report(dir)) std::cout << "wrote " << p.string() << "\n";
  return kOk;
}

struct FetchArgs {
  std::string subreddits = "pics,pic,images";
  std::int64_t count = 600;
  std::int64_t quota = 0;
  std::int64_t interval_ms = 1000;
  std::string sort = "hot";
  std::string run_tag;
  std::string user_agent;
  std::string out = "corpus.ndjson";
  std::string images;
  std::string cursor;
  std::string replay;
  std::string record;
};

int run_fetch(const FetchArgs& a) {
  reddit::FetchConfig config;
  config.subreddits = split_commas(a.subreddits);
  config.target_count = a.count;
  config.per_subreddit_quota = a.quota;
  config.min_request_interval = std::chrono::milliseconds(a.interval_ms);
  config.sort_order = a.sort;
  config.collection_run = a.run_tag;
  if (!a.user_agent.empty()) config.user_agent = a.user_agent;

  pipeline::FetchPaths paths;
  paths.corpus = a.out;
  paths.images = a.images.empty() ? fs::path(a.out).parent_path() / "images" : fs::path(a.images);
  paths.cursor = a.cursor;

  http::SystemClock clock;
  std::unique_ptr<http::Transport> base;
  if (a.replay.empty()) {
    base = std::make_unique<http::HttplibTransport>();
  } else {
    base = std::make_unique<http::ReplayTransport>(a.replay);
  }
  std::unique_ptr<http::Transport> recorder;
  if (!a.record.empty()) recorder = std::make_unique<http::RecordingTransport>(*base, a.record);
  const auto receipt = pipeline::cmd_fetch(config, paths, recorder ? *recorder : *base, clock);
  std::cout << receipt.to_json_text();
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Image memorability and engagement analysis"};
  app.require_subcommand(1);

  FetchArgs fetch;
  auto* fetch_cmd = app.add_subcommand("fetch", "Collect image posts into a corpus");
  fetch_cmd->add_option("--subreddits", fetch.subreddits, "Comma-separated subreddit names")->capture_default_str();
  fetch_cmd->add_option("--count", fetch.count, "Target number of accepted posts")->capture_default_str();
  fetch_cmd->add_option("--quota", fetch.quota, "Per-subreddit quota (0 splits --count evenly)")->capture_default_str();
  fetch_cmd->add_option("--interval-ms", fetch.interval_ms, "Minimum gap between requests")->capture_default_str();
  fetch_cmd->add_option("--sort", fetch.sort, "Listing order")->capture_default_str();
  fetch_cmd->add_option("--run", fetch.run_tag, "collection_run tag stored on every accepted post");
  fetch_cmd->add_option("--user-agent", fetch.user_agent, "User-Agent header");
  fetch_cmd->add_option("--out", fetch.out, "Corpus file (NDJSON), appended and deduplicated")->capture_default_str();
  fetch_cmd->add_option("--images", fetch.images, "Image store directory (default: <out dir>/images)");
  fetch_cmd->add_option("--cursor", fetch.cursor, "Listing cursor file for resumable runs");
  auto* replay = fetch_cmd->add_option("--replay", fetch.replay, "Serve requests from a transcript directory");
  fetch_cmd->add_option("--record", fetch.record, "Record responses to a transcript directory")->excludes(replay);

  std::string validate_config;
  auto* validate_cmd = app.add_subcommand("validate", "Check inputs and print coverage statistics");
  validate_cmd->add_option("config", validate_config, "Run config (JSON)")->required();

  AnalyzeArgs analyze;
  auto* analyze_cmd = app.add_subcommand("analyze", "Run the analyses and write result files");
  analyze_cmd->add_option("config", analyze.config, "Run config (JSON)")->required();
  analyze_cmd->add_option("--output-dir", analyze.output_dir, "Override output_dir");
  analyze_cmd->add_flag("--no-outlier-removal", analyze.no_outlier_removal,
                        "Keep score/comment outliers (writes correlations_no_outlier_removal.csv)");
  analyze_cmd->add_flag("--dedupe-comment-tokens", analyze.dedupe_tokens, "Count each comment noun once per post");

  std::string report_dir;
  auto* report_cmd = app.add_subcommand("report", "Regenerate figures from analysis results");
  report_cmd->add_option("results_dir", report_dir, "Directory written by analyze")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*fetch_cmd) return run_fetch(fetch);
    if (*validate_cmd) return run_validate(validate_config);
    if (*analyze_cmd) return run_analyze(analyze);
    if (*report_cmd) return run_report(report_dir);
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  }
  return kUsage;
}
