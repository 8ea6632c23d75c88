#pragma once

#include <compare>
#include <cstdint>
#include <limits>
#include <string>

#include "wsnsim/errors.hpp"

namespace wsnsim {

/// Span of simulated time in integer nanoseconds.
struct Duration {
  std::uint64_t ns = 0;

  static constexpr Duration nanos(std::uint64_t n) { return Duration{n}; }
  static constexpr Duration micros(std::uint64_t n) { return Duration{n * 1000ULL}; }
  static constexpr Duration millis(std::uint64_t n) { return Duration{n * 1000000ULL}; }
  static constexpr Duration secs(std::uint64_t n) { return Duration{n * 1000000000ULL}; }
  /// Rounds to the nearest nanosecond; negative or non-finite input is rejected.
  static Duration from_seconds(double s);

  double seconds() const { return static_cast<double>(ns) * 1e-9; }

  friend constexpr auto operator<=>(Duration, Duration) = default;
};

/// Simulated clock value: nanoseconds since simulation start. Arithmetic is
/// checked; overflow throws TimeOverflow instead of wrapping.
struct SimTime {
  std::uint64_t ticks = 0;

  static constexpr SimTime zero() { return SimTime{0}; }
  static constexpr SimTime max() { return SimTime{std::numeric_limits<std::uint64_t>::max()}; }
  static constexpr SimTime from_ns(std::uint64_t ns) { return SimTime{ns}; }
  static SimTime from_seconds(double s) { return SimTime{Duration::from_seconds(s).ns}; }

  double seconds() const { return static_cast<double>(ticks) * 1e-9; }

  friend constexpr auto operator<=>(SimTime, SimTime) = default;
};

inline SimTime operator+(SimTime t, Duration d) {
  if (d.ns > std::numeric_limits<std::uint64_t>::max() - t.ticks)
    throw TimeOverflow("SimTime overflow: " + std::to_string(t.ticks) + " + " + std::to_string(d.ns));
  return SimTime{t.ticks + d.ns};
}

inline Duration operator+(Duration a, Duration b) {
  if (b.ns > std::numeric_limits<std::uint64_t>::max() - a.ns)
    throw TimeOverflow("Duration overflow");
  return Duration{a.ns + b.ns};
}

/// Elapsed time from `b` to `a`; requires a >= b.
inline Duration operator-(SimTime a, SimTime b) {
  if (a.ticks < b.ticks) throw TimeOverflow("negative SimTime difference");
  return Duration{a.ticks - b.ticks};
}

inline SimTime operator-(SimTime t, Duration d) {
  if (d.ns > t.ticks) throw TimeOverflow("SimTime underflow");
  return SimTime{t.ticks - d.ns};
}

/// Fixed-point seconds with nine decimals, e.g. "1.000000334".
std::string format_seconds(SimTime t);

}  // namespace wsnsim
