#include "viramem/time.hpp"

#include <charconv>
#include <cstdio>

#include "viramem/error.hpp"

namespace viramem {

namespace {

int parse_fixed(std::string_view s, std::size_t pos, std::size_t width, std::string_view whole) {
  int value = 0;
  if (pos + width > s.size()) {
    throw DataError("malformed timestamp '" + std::string(whole) + "'");
  }
  auto [ptr, ec] = std::from_chars(s.data() + pos, s.data() + pos + width, value);
  if (ec != std::errc{} || ptr != s.data() + pos + width) {
    throw DataError("malformed timestamp '" + std::string(whole) + "'");
  }
  return value;
}

}  // namespace

std::string format_utc(Timestamp t) {
  using namespace std::chrono;
  const auto day = floor<days>(t);
  const year_month_day ymd{day};
  const hh_mm_ss hms{t - day};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return buf;
}

Timestamp parse_utc(std::string_view text) {
  using namespace std::chrono;
  if (text.size() < 19 || text[4] != '-' || text[7] != '-' || (text[10] != 'T' && text[10] != ' ') ||
      text[13] != ':' || text[16] != ':') {
    throw DataError("malformed timestamp '" + std::string(text) + "'");
  }
  const int y = parse_fixed(text, 0, 4, text);
  const int mo = parse_fixed(text, 5, 2, text);
  const int d = parse_fixed(text, 8, 2, text);
  const int h = parse_fixed(text, 11, 2, text);
  const int mi = parse_fixed(text, 14, 2, text);
  const int s = parse_fixed(text, 17, 2, text);
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 60) {
    throw DataError("out-of-range timestamp '" + std::string(text) + "'");
  }
  std::size_t pos = 19;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') ++pos;
  }
  minutes offset{0};
  const std::string_view rest = text.substr(pos);
  if (rest == "Z" || rest.empty()) {
    // UTC
  } else if (rest[0] == '+' || rest[0] == '-') {
    offset = UtcOffset::parse(rest).offset;
  } else {
    throw DataError("malformed timestamp zone '" + std::string(text) + "'");
  }
  return Timestamp{sys_days{ymd}} + hours{h} + minutes{mi} + seconds{s} - offset;
}

UtcOffset UtcOffset::parse(std::string_view text) {
  if (text == "UTC" || text == "Z" || text == "utc" || text.empty()) return {};
  std::string_view t = text;
  if (t.starts_with("UTC")) t.remove_prefix(3);
  if (t.empty() || (t[0] != '+' && t[0] != '-')) {
    throw DataError("unsupported timezone '" + std::string(text) + "' (use UTC or a +HH:MM offset)");
  }
  const int sign = t[0] == '-' ? -1 : 1;
  t.remove_prefix(1);
  int hours = 0;
  int mins = 0;
  auto digits = [&](std::string_view s, int& out) {
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
      throw DataError("unsupported timezone '" + std::string(text) + "'");
    }
  };
  if (const auto colon = t.find(':'); colon != std::string_view::npos) {
    digits(t.substr(0, colon), hours);
    digits(t.substr(colon + 1), mins);
  } else if (t.size() == 4) {
    digits(t.substr(0, 2), hours);
    digits(t.substr(2), mins);
  } else {
    digits(t, hours);
  }
  if (hours > 14 || mins > 59) throw DataError("timezone offset out of range '" + std::string(text) + "'");
  return UtcOffset{std::chrono::minutes{sign * (hours * 60 + mins)}};
}

std::string UtcOffset::to_string() const {
  const auto total = offset.count();
  if (total == 0) return "UTC";
  char buf[32];
  const long long a = total < 0 ? -total : total;
  std::snprintf(buf, sizeof buf, "%c%02lld:%02lld", total < 0 ? '-' : '+', a / 60, a % 60);
  return buf;
}

int local_hour(Timestamp t, UtcOffset tz) {
  using namespace std::chrono;
  const auto local = t + tz.offset;
  const auto since_midnight = local - floor<days>(local);
  return static_cast<int>(duration_cast<hours>(since_midnight).count());
}

}  // namespace viramem
