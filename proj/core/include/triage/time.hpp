#pragma once

// Session time model. Absolute timestamps are fractional seconds since the
// Unix epoch (double). Relative times are held in integer microseconds so
// that window boundaries and canonical formatting are exact; one microsecond
// is also the resolution of the canonical 6-fractional-digit serialization.

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace triage {

struct RelTime {
  std::int64_t micros = 0;

  static RelTime from_micros(std::int64_t us) { return RelTime{us}; }
  // Rounds to the nearest microsecond; throws PreEpochError on negative input.
  static RelTime from_seconds(double s);

  double seconds() const { return static_cast<double>(micros) / 1e6; }

  // Shortest decimal form, e.g. "8.1", "0", "12.400001".
  std::string str() const;
  // Fixed 6-fractional-digit form used by the canonical serialization.
  std::string str_fixed6() const;

  auto operator<=>(const RelTime&) const = default;
};

// Exact decimal parse (up to 6 fractional digits kept, further digits
// rounded). Rejects negatives, non-numerics, infinities.
std::optional<RelTime> parse_reltime(std::string_view text);

struct EvidenceWindow {
  RelTime center;
  std::int64_t half_width_micros = 500000;  // +/- 0.5 s

  RelTime lo() const {  // clamped at 0: negative relative times never appear
    std::int64_t v = center.micros - half_width_micros;
    return RelTime{v < 0 ? 0 : v};
  }
  RelTime hi() const { return RelTime{center.micros + half_width_micros}; }
  // Closed on both ends.
  bool contains(RelTime t) const { return t >= lo() && t <= hi(); }
};

// RFC 3339 timestamp ("2026-01-20T12:34:56.789Z", offsets allowed) to
// absolute seconds. Throws ParseError.
double parse_rfc3339(std::string_view text);
std::string format_rfc3339_utc(double abs_seconds);  // 6 fractional digits, 'Z'

// Fixed "%.6f" rendering of an absolute timestamp.
std::string format_abs6(double abs_seconds);

}  // namespace triage
