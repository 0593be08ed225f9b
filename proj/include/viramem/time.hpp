#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace viramem {

using Timestamp = std::chrono::sys_seconds;

/// "YYYY-MM-DDTHH:MM:SSZ"
std::string format_utc(Timestamp t);

/// Accepts "YYYY-MM-DDTHH:MM:SS" followed by "Z" or a "+HH:MM"/"-HH:MM"
/// offset; fractional seconds are truncated. Throws DataError.
Timestamp parse_utc(std::string_view text);

inline Timestamp from_unix_seconds(double seconds) {
  return Timestamp{std::chrono::seconds{static_cast<long long>(seconds)}};
}

/// Fixed offset from UTC. The day/night covariate is evaluated in this
/// offset; IANA zone names other than UTC are not supported.
struct UtcOffset {
  std::chrono::minutes offset{0};

  /// "UTC", "Z", "+05:30", "-0800", "+2"
  static UtcOffset parse(std::string_view text);
  std::string to_string() const;
};

/// Local hour of day in [0, 24) under the given offset.
int local_hour(Timestamp t, UtcOffset tz);

}  // namespace viramem
