#pragma once

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace marketsim {

/// Signed duration in nanoseconds.
using Nanos = std::int64_t;

inline constexpr Nanos kNanosPerMilli = 1'000'000;
inline constexpr Nanos kNanosPerSecond = 1'000'000'000;
/// One discrete time unit of the interactive simulation is 100 ms.
inline constexpr Nanos kNanosPerUnit = 100 * kNanosPerMilli;

class TimeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Nanoseconds since midnight of the simulated date. Never negative.
class SimTime {
 public:
  constexpr SimTime() noexcept = default;
  explicit constexpr SimTime(Nanos nanos) : nanos_(nanos) {
    if (nanos < 0) throw TimeError("SimTime cannot be negative");
  }

  static constexpr SimTime from_hms(int hours, int minutes, int seconds, Nanos nanos = 0) {
    return SimTime(((static_cast<Nanos>(hours) * 60 + minutes) * 60 + seconds) * kNanosPerSecond + nanos);
  }
  static constexpr SimTime from_units(std::int64_t units) { return SimTime(units * kNanosPerUnit); }
  /// Fractional units are rounded to the nearest nanosecond.
  static SimTime from_units(double units);

  constexpr Nanos nanos() const noexcept { return nanos_; }
  /// Whole discrete units elapsed (floor).
  constexpr std::int64_t units() const noexcept { return nanos_ / kNanosPerUnit; }
  double seconds() const noexcept { return static_cast<double>(nanos_) / kNanosPerSecond; }

  constexpr auto operator<=>(const SimTime&) const noexcept = default;

  friend constexpr SimTime operator+(SimTime t, Nanos d) { return SimTime(t.nanos_ + d); }
  friend constexpr SimTime operator-(SimTime t, Nanos d) { return SimTime(t.nanos_ - d); }
  friend constexpr Nanos operator-(SimTime a, SimTime b) noexcept { return a.nanos_ - b.nanos_; }
  constexpr SimTime& operator+=(Nanos d) { return *this = *this + d; }

  /// "HH:MM:SS.nnnnnnnnn"
  std::string to_string() const;

 private:
  Nanos nanos_ = 0;
};

/// Parses decimal seconds ("34200.000000001") into nanoseconds without going
/// through binary floating point. Digits past the ninth decimal are rounded
/// half-to-even.
SimTime parse_decimal_seconds(std::string_view text);

/// Formats as decimal seconds with nine fractional digits; exact inverse of
/// parse_decimal_seconds for nanosecond values.
std::string format_decimal_seconds(SimTime t);

/// Accepts either "HH:MM:SS[.fraction]" or decimal seconds after midnight.
SimTime parse_clock(std::string_view text);

/// Parses a duration: plain decimal seconds, or a number with one of the
/// suffixes ns, us, ms, s, min, units.
Nanos parse_duration(std::string_view text);

}  // namespace marketsim
