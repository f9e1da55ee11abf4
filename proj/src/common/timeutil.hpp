#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace lotwatch {

using Timestamp = std::chrono::sys_seconds;

// "2025-03-01T09:00:00Z"
std::string format_iso8601(Timestamp t);

// Accepts "YYYY-MM-DDTHH:MM:SSZ", "YYYY-MM-DDTHH:MM:SS" (taken as UTC) and
// "YYYY-MM-DD" (midnight UTC). Returns nullopt on anything else.
std::optional<Timestamp> parse_iso8601(std::string_view text);

Timestamp now_utc();

// Seconds between two steady-clock points as double.
inline double seconds_between(std::chrono::steady_clock::time_point a,
                              std::chrono::steady_clock::time_point b) {
  return std::chrono::duration<double>(b - a).count();
}

}  // namespace lotwatch
