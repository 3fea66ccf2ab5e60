#include "marketsim/sim_time.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

namespace marketsim {

namespace {

bool all_digits(std::string_view s) {
  for (char c : s)
    if (c < '0' || c > '9') return false;
  return true;
}

std::int64_t parse_int(std::string_view s, std::string_view whole) {
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw TimeError("invalid number in time value '" + std::string(whole) + "'");
  return value;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

SimTime SimTime::from_units(double units) {
  if (!(units >= 0.0) || !std::isfinite(units)) throw TimeError("time units must be finite and non-negative");
  return SimTime(std::llround(units * static_cast<double>(kNanosPerUnit)));
}

std::string SimTime::to_string() const {
  const Nanos secs = nanos_ / kNanosPerSecond;
  const Nanos frac = nanos_ % kNanosPerSecond;
  char buf[48];
  std::snprintf(buf, sizeof buf, "%02lld:%02lld:%02lld.%09lld", static_cast<long long>(secs / 3600),
                static_cast<long long>((secs / 60) % 60), static_cast<long long>(secs % 60),
                static_cast<long long>(frac));
  return buf;
}

SimTime parse_decimal_seconds(std::string_view text) {
  const std::string_view s = trim(text);
  const auto dot = s.find('.');
  const std::string_view whole = s.substr(0, dot);
  const std::string_view frac = dot == std::string_view::npos ? std::string_view{} : s.substr(dot + 1);
  if (whole.empty() || !all_digits(whole) || !all_digits(frac) || (dot != std::string_view::npos && frac.empty()))
    throw TimeError("malformed decimal seconds '" + std::string(text) + "'");

  Nanos nanos = parse_int(whole, text) * kNanosPerSecond;
  Nanos sub = 0;
  for (std::size_t i = 0; i < 9; ++i) sub = sub * 10 + (i < frac.size() ? frac[i] - '0' : 0);
  if (frac.size() > 9) {
    const int next = frac[9] - '0';
    const bool tail_nonzero = frac.substr(10).find_first_not_of('0') != std::string_view::npos;
    if (next > 5 || (next == 5 && tail_nonzero) || (next == 5 && !tail_nonzero && (sub % 2 == 1))) ++sub;
  }
  return SimTime(nanos + sub);
}

std::string format_decimal_seconds(SimTime t) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%lld.%09lld", static_cast<long long>(t.nanos() / kNanosPerSecond),
                static_cast<long long>(t.nanos() % kNanosPerSecond));
  return buf;
}

SimTime parse_clock(std::string_view text) {
  const std::string_view s = trim(text);
  if (s.find(':') == std::string_view::npos) return parse_decimal_seconds(s);

  const auto c1 = s.find(':');
  const auto c2 = s.find(':', c1 + 1);
  if (c2 == std::string_view::npos) throw TimeError("clock time must be HH:MM:SS, got '" + std::string(text) + "'");
  const std::int64_t h = parse_int(s.substr(0, c1), text);
  const std::int64_t m = parse_int(s.substr(c1 + 1, c2 - c1 - 1), text);
  const SimTime sec = parse_decimal_seconds(s.substr(c2 + 1));
  if (m >= 60 || sec.nanos() >= 60 * kNanosPerSecond)
    throw TimeError("clock field out of range in '" + std::string(text) + "'");
  return SimTime((h * 3600 + m * 60) * kNanosPerSecond + sec.nanos());
}

Nanos parse_duration(std::string_view text) {
  const std::string_view s = trim(text);
  std::size_t split = 0;
  while (split < s.size() && ((s[split] >= '0' && s[split] <= '9') || s[split] == '.')) ++split;
  const std::string_view number = s.substr(0, split);
  const std::string_view suffix = trim(s.substr(split));

  Nanos scale = kNanosPerSecond;
  if (suffix == "ns") scale = 1;
  else if (suffix == "us") scale = 1000;
  else if (suffix == "ms") scale = kNanosPerMilli;
  else if (suffix.empty() || suffix == "s") scale = kNanosPerSecond;
  else if (suffix == "min") scale = 60 * kNanosPerSecond;
  else if (suffix == "units" || suffix == "u") scale = kNanosPerUnit;
  else throw TimeError("unknown duration suffix in '" + std::string(text) + "'");

  // Fixed-point: the integer part and up to nine fractional digits of the unit.
  const SimTime fixed = parse_decimal_seconds(number);
  const Nanos whole = fixed.nanos() / kNanosPerSecond;
  const Nanos frac = fixed.nanos() % kNanosPerSecond;
  return whole * scale + static_cast<Nanos>(std::llround(static_cast<long double>(frac) * scale / kNanosPerSecond));
}

}  // namespace marketsim
