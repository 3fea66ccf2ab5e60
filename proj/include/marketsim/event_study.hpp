#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "marketsim/exchange.hpp"
#include "marketsim/sim_time.hpp"

namespace marketsim {

class EventStudyError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Mid prices on a uniform grid t0 + k * interval. Each sample carries the
/// last quote at or before its time forward; absent while the book is
/// one-sided (or before the first quote).
struct SampledSeries {
  SimTime t0;
  Nanos interval = kNanosPerMilli;
  std::vector<std::optional<double>> values;

  SimTime time_at(std::size_t k) const { return t0 + static_cast<Nanos>(k) * interval; }
};

SampledSeries sample_mid(std::span<const QuoteUpdate> quotes, SimTime t0, Nanos interval, std::size_t count);

/// A subseries indexed by offset from its event: sample k sits at
/// (first_step + k) * interval, so offset 0 is the event itself.
struct AlignedSeries {
  Nanos interval = kNanosPerMilli;
  std::int64_t first_step = 0;
  std::vector<std::optional<double>> values;

  Nanos offset_at(std::size_t k) const { return (first_step + static_cast<std::int64_t>(k)) * interval; }
  /// Value at offset 0; empty if the window excludes it or it is absent.
  std::optional<double> at_event() const;
  bool same_grid(const AlignedSeries& other) const noexcept {
    return interval == other.interval && first_step == other.first_step && values.size() == other.values.size();
  }
};

/// Cuts [event_time - pre, event_time + post] out of `series` and re-indexes
/// it around the event. The event and both bounds must fall on the sampling
/// grid and inside the series.
AlignedSeries extract_window(const SampledSeries& series, SimTime event_time, Nanos pre, Nanos post);

/// Divides every value by the value at offset 0.
AlignedSeries normalize_benchmark(const AlignedSeries& series);
/// Pointwise experimental / baseline.
AlignedSeries normalize_baseline(const AlignedSeries& experimental, const AlignedSeries& baseline);
/// Pointwise (experimental - control) / control.
AlignedSeries paired_impact(const AlignedSeries& experimental, const AlignedSeries& control);

struct EventStudyResult {
  std::vector<Nanos> offsets;
  std::vector<double> mean;
  /// Population standard deviation (divides by n).
  std::vector<double> std;
  std::size_t n = 0;
};

/// Per-offset mean and population standard deviation across subseries that
/// share one grid and have no absent values.
EventStudyResult aggregate(std::span<const AlignedSeries> subseries);

/// CSV with header offset_ms,mean,std,n; values printed with 17 significant
/// digits so they read back exactly.
void write_result_csv(std::ostream& out, const EventStudyResult& result);
EventStudyResult read_result_csv(std::istream& in);

}  // namespace marketsim
