#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <string>

#include "viramem/time.hpp"

namespace viramem::http {

struct Request {
  std::string method = "GET";
  std::string url;
  std::map<std::string, std::string> headers;
};

struct Response {
  int status = 0;
  std::map<std::string, std::string> headers;  // lowercase names
  std::string body;

  std::string header(const std::string& lowercase_name) const;
};

/// Splits "https://host[:port]/path?q" into ("https://host[:port]", "/path?q").
/// Throws DataError for anything but http(s) URLs.
std::pair<std::string, std::string> split_url(const std::string& url);

class Transport {
 public:
  virtual ~Transport() = default;
  /// Returns any HTTP status; throws FetchError (status 0) when no response
  /// arrives at all.
  virtual Response send(const Request& request) = 0;
};

/// Live network through cpp-httplib (redirects followed, TLS via OpenSSL).
class HttplibTransport : public Transport {
 public:
  explicit HttplibTransport(std::chrono::seconds timeout = std::chrono::seconds(30)) : timeout_(timeout) {}
  Response send(const Request& request) override;

 private:
  std::chrono::seconds timeout_;
};

/// File name of the transcript holding exchanges for this method and URL.
std::string transcript_name(const Request& request);

/// Forwards to `inner` and appends every exchange to a JSON transcript in
/// `dir` (one file per method and URL, bodies base64-encoded).
class RecordingTransport : public Transport {
 public:
  RecordingTransport(Transport& inner, std::filesystem::path dir);
  Response send(const Request& request) override;

 private:
  Transport& inner_;
  std::filesystem::path dir_;
};

/// Serves recorded exchanges in order per method and URL; once a URL's
/// exchanges are used up its last one repeats. An unrecorded request throws
/// FetchError with status 0.
class ReplayTransport : public Transport {
 public:
  explicit ReplayTransport(std::filesystem::path dir);
  Response send(const Request& request) override;

 private:
  std::filesystem::path dir_;
  std::map<std::string, std::size_t> served_;
};

class Clock {
 public:
  virtual ~Clock() = default;
  /// Monotonic time.
  virtual std::chrono::milliseconds now() = 0;
  virtual void sleep_for(std::chrono::milliseconds d) = 0;
  virtual Timestamp utc_now() = 0;
};

class SystemClock : public Clock {
 public:
  std::chrono::milliseconds now() override;
  void sleep_for(std::chrono::milliseconds d) override;
  Timestamp utc_now() override;
};

/// Time moves only through sleep_for/advance; for tests and offline replay.
class ManualClock : public Clock {
 public:
  explicit ManualClock(Timestamp start = Timestamp{}) : start_(start) {}
  std::chrono::milliseconds now() override { return elapsed_; }
  void sleep_for(std::chrono::milliseconds d) override { elapsed_ += d; }
  Timestamp utc_now() override { return start_ + std::chrono::duration_cast<std::chrono::seconds>(elapsed_); }
  void advance(std::chrono::milliseconds d) { elapsed_ += d; }

 private:
  Timestamp start_;
  std::chrono::milliseconds elapsed_{0};
};

/// Blocks until at least `interval` has passed since the previous acquire.
class RateLimiter {
 public:
  RateLimiter(Clock& clock, std::chrono::milliseconds interval) : clock_(clock), interval_(interval) {}
  void acquire();

 private:
  Clock& clock_;
  std::chrono::milliseconds interval_;
  bool first_ = true;
  std::chrono::milliseconds last_{0};
};

}  // namespace viramem::http
