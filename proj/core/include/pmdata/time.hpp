#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <string_view>

namespace pmdata {

/// UTC instant with whole-second resolution (block timestamps carry no more).
using Timestamp = std::chrono::sys_seconds;
/// UTC calendar day; day boundaries are UTC midnight.
using Day = std::chrono::sys_days;

/// "2026-01-07T12:00:00Z"
std::string format_iso8601(Timestamp t);
/// Accepts "YYYY-MM-DDTHH:MM:SSZ" (the 'Z' may be replaced by "+00:00").
/// Throws DecodeError on anything else.
Timestamp parse_iso8601(std::string_view text);

/// "2026-01-07"
std::string format_day(Day d);
Day parse_day(std::string_view text);

inline Day day_of(Timestamp t) { return std::chrono::floor<std::chrono::days>(t); }

inline Timestamp from_unix(std::int64_t seconds) {
    return Timestamp{std::chrono::seconds{seconds}};
}
inline std::int64_t to_unix(Timestamp t) { return t.time_since_epoch().count(); }

/// Signed difference in fractional hours.
inline double hours_between(Timestamp from, Timestamp to) {
    return static_cast<double>((to - from).count()) / 3600.0;
}

}  // namespace pmdata
