#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace ghs {

/// A UTC instant at second precision. Forge timestamps carry no finer
/// granularity, so everything stored or queried uses this type.
using Instant = std::chrono::sys_seconds;

/// Millisecond clock reading, used only for rate accounting.
using TimePoint = std::chrono::sys_time<std::chrono::milliseconds>;

using Seconds = std::chrono::seconds;

/// 2008-01-01T00:00:00Z, the earliest instant any mining pass starts from.
inline constexpr Instant kForgeEpoch =
    std::chrono::sys_days{std::chrono::year{2008} / 1 / 1};

/// Parses `YYYY-MM-DD`, `YYYY-MM-DDTHH:MM:SSZ` or `YYYY-MM-DDTHH:MM:SS+00:00`.
/// Fractional seconds are truncated. Returns nullopt on anything else.
std::optional<Instant> parse_instant(std::string_view text);

/// Same as parse_instant but also reports whether the input was date-only.
std::optional<Instant> parse_instant(std::string_view text, bool& date_only);

/// `YYYY-MM-DDTHH:MM:SSZ`
std::string format_instant(Instant t);

/// `YYYY-MM-DD`
std::string format_date(Instant t);

inline bool is_midnight(Instant t) {
  return std::chrono::floor<std::chrono::days>(t) == t;
}

inline Instant to_instant(TimePoint tp) {
  return std::chrono::floor<Seconds>(tp);
}

}  // namespace ghs
