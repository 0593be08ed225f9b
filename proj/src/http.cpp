#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "viramem/http.hpp"

#include <httplib.h>
#include <json.hpp>

#include <algorithm>
#include <thread>

#include "viramem/error.hpp"
#include "viramem/fsutil.hpp"
#include "viramem/hash.hpp"

namespace viramem::http {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

nlohmann::ordered_json response_to_json(const Response& r) {
  return {{"status", r.status}, {"headers", r.headers}, {"body_base64", base64_encode(r.body)}};
}

Response response_from_json(const nlohmann::json& j) {
  Response r;
  r.status = j.at("status").get<int>();
  r.headers = j.at("headers").get<std::map<std::string, std::string>>();
  r.body = base64_decode(j.at("body_base64").get<std::string>());
  return r;
}

}  // namespace

std::string Response::header(const std::string& lowercase_name) const {
  const auto it = headers.find(lowercase_name);
  return it == headers.end() ? std::string() : it->second;
}

std::pair<std::string, std::string> split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw DataError("not an absolute URL: " + url);
  const auto scheme = lower(url.substr(0, scheme_end));
  if (scheme != "http" && scheme != "https") throw DataError("unsupported URL scheme: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

Response HttplibTransport::send(const Request& request) {
  const auto [base, path] = split_url(request.url);
  httplib::Client client(base);
  client.set_follow_location(true);
  client.set_connection_timeout(timeout_);
  client.set_read_timeout(timeout_);
  httplib::Headers headers(request.headers.begin(), request.headers.end());
  if (request.method != "GET") throw DataError("only GET is supported");
  const auto result = client.Get(path, headers);
  if (!result) throw FetchError("request to " + request.url + " failed: " + httplib::to_string(result.error()), 0);
  Response out;
  out.status = result->status;
  out.body = result->body;
  for (const auto& [k, v] : result->headers) out.headers[lower(k)] = v;
  return out;
}

std::string transcript_name(const Request& request) {
  return sha256_hex(request.method + " " + request.url).substr(0, 24) + ".json";
}

RecordingTransport::RecordingTransport(Transport& inner, std::filesystem::path dir)
    : inner_(inner), dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

Response RecordingTransport::send(const Request& request) {
  const auto response = inner_.send(request);
  const auto path = dir_ / transcript_name(request);
  nlohmann::ordered_json j;
  if (std::filesystem::exists(path)) {
    j = nlohmann::ordered_json::parse(read_file(path));
  } else {
    j["request"] = {{"method", request.method}, {"url", request.url}};
    j["responses"] = nlohmann::ordered_json::array();
  }
  j["responses"].push_back(response_to_json(response));
  write_file_atomic(path, j.dump(2) + "\n");
  return response;
}

ReplayTransport::ReplayTransport(std::filesystem::path dir) : dir_(std::move(dir)) {
  if (!std::filesystem::is_directory(dir_)) throw DataError("replay directory not found: " + dir_.string());
}

Response ReplayTransport::send(const Request& request) {
  const auto name = transcript_name(request);
  const auto path = dir_ / name;
  if (!std::filesystem::exists(path)) throw FetchError("no recorded response for " + request.url, 0);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
    const auto& responses = j.at("responses");
    if (responses.empty()) throw DataError("empty transcript " + path.string());
    auto& index = served_[name];
    const auto& chosen = responses.at(std::min(index, responses.size() - 1));
    ++index;
    return response_from_json(chosen);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed transcript " + path.string() + ": " + e.what());
  }
}

std::chrono::milliseconds SystemClock::now() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now().time_since_epoch());
}

void SystemClock::sleep_for(std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }

Timestamp SystemClock::utc_now() { return std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now()); }

void RateLimiter::acquire() {
  if (!first_) {
    const auto due = last_ + interval_;
    const auto now = clock_.now();
    if (now < due) clock_.sleep_for(due - now);
  }
  first_ = false;
  last_ = clock_.now();
}

}  // namespace viramem::http
