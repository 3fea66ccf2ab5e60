#include "marketsim/event_study.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace marketsim {

SampledSeries sample_mid(std::span<const QuoteUpdate> quotes, SimTime t0, Nanos interval, std::size_t count) {
  if (interval <= 0) throw EventStudyError("sampling interval must be positive");
  SampledSeries series{t0, interval, {}};
  series.values.reserve(count);
  std::size_t next = 0;
  std::optional<double> current;
  for (std::size_t k = 0; k < count; ++k) {
    const SimTime t = series.time_at(k);
    while (next < quotes.size() && quotes[next].at <= t) {
      const auto mid = quotes[next].mid();
      current = mid ? std::optional<double>(mid->value()) : std::nullopt;
      ++next;
    }
    series.values.push_back(current);
  }
  return series;
}

std::optional<double> AlignedSeries::at_event() const {
  if (first_step > 0 || -first_step >= static_cast<std::int64_t>(values.size())) return std::nullopt;
  return values[static_cast<std::size_t>(-first_step)];
}

AlignedSeries extract_window(const SampledSeries& series, SimTime event_time, Nanos pre, Nanos post) {
  const auto fail = [&](const std::string& why) {
    return EventStudyError("event at " + event_time.to_string() + ": " + why);
  };
  if (pre < 0 || post < 0) throw fail("window bounds must be non-negative");
  const Nanos since_start = event_time - series.t0;
  if (since_start % series.interval != 0 || pre % series.interval != 0 || post % series.interval != 0)
    throw fail("window is not aligned to the sampling grid");
  const std::int64_t event_index = since_start / series.interval;
  const std::int64_t before = pre / series.interval;
  const std::int64_t after = post / series.interval;
  if (event_index - before < 0 || event_index + after >= static_cast<std::int64_t>(series.values.size()))
    throw fail("window exceeds the sampled series");

  AlignedSeries out{series.interval, -before, {}};
  const auto first = series.values.begin() + (event_index - before);
  out.values.assign(first, first + (before + after + 1));
  return out;
}

AlignedSeries normalize_benchmark(const AlignedSeries& series) {
  const auto benchmark = series.at_event();
  if (!benchmark || !(*benchmark > 0.0)) throw EventStudyError("benchmark value at offset 0 is missing or not positive");
  AlignedSeries out = series;
  for (auto& v : out.values)
    if (v) *v /= *benchmark;
  return out;
}

AlignedSeries normalize_baseline(const AlignedSeries& experimental, const AlignedSeries& baseline) {
  if (!experimental.same_grid(baseline)) throw EventStudyError("experimental and baseline offsets differ");
  AlignedSeries out = experimental;
  for (std::size_t k = 0; k < out.values.size(); ++k) {
    const auto& b = baseline.values[k];
    if (!b || !(*b > 0.0))
      throw EventStudyError("baseline missing or not positive at offset " + std::to_string(baseline.offset_at(k)) + " ns");
    if (out.values[k]) *out.values[k] /= *b;
  }
  return out;
}

AlignedSeries paired_impact(const AlignedSeries& experimental, const AlignedSeries& control) {
  if (!experimental.same_grid(control)) throw EventStudyError("experimental and control offsets differ");
  AlignedSeries out = experimental;
  for (std::size_t k = 0; k < out.values.size(); ++k) {
    const auto& c = control.values[k];
    const auto& e = experimental.values[k];
    if (!c || !e || *c == 0.0)
      throw EventStudyError("paired series missing a value (or zero control) at offset " +
                            std::to_string(control.offset_at(k)) + " ns");
    out.values[k] = (*e - *c) / *c;
  }
  return out;
}

EventStudyResult aggregate(std::span<const AlignedSeries> subseries) {
  if (subseries.empty()) throw EventStudyError("cannot aggregate an empty collection");
  const AlignedSeries& head = subseries.front();
  for (const auto& s : subseries)
    if (!s.same_grid(head)) throw EventStudyError("subseries have ragged offsets");

  const std::size_t width = head.values.size();
  const double n = static_cast<double>(subseries.size());
  EventStudyResult result;
  result.n = subseries.size();
  result.offsets.resize(width);
  result.mean.assign(width, 0.0);
  result.std.assign(width, 0.0);
  for (std::size_t k = 0; k < width; ++k) {
    result.offsets[k] = head.offset_at(k);
    double sum = 0.0;
    for (const auto& s : subseries) {
      if (!s.values[k]) throw EventStudyError("absent value at offset " + std::to_string(head.offset_at(k)) + " ns");
      sum += *s.values[k];
    }
    const double mean = sum / n;
    double sq = 0.0;
    for (const auto& s : subseries) sq += (*s.values[k] - mean) * (*s.values[k] - mean);
    result.mean[k] = mean;
    result.std[k] = std::sqrt(sq / n);
  }
  return result;
}

void write_result_csv(std::ostream& out, const EventStudyResult& result) {
  out << "offset_ms,mean,std,n\n";
  char buf[128];
  for (std::size_t k = 0; k < result.offsets.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%zu\n",
                  static_cast<double>(result.offsets[k]) / static_cast<double>(kNanosPerMilli), result.mean[k],
                  result.std[k], result.n);
    out << buf;
  }
}

EventStudyResult read_result_csv(std::istream& in) {
  EventStudyResult result;
  std::string line;
  if (!std::getline(in, line) || line.rfind("offset_ms,mean,std,n", 0) != 0)
    throw EventStudyError("missing event-study CSV header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string field[4];
    for (auto& f : field) std::getline(row, f, ',');
    result.offsets.push_back(static_cast<Nanos>(std::llround(std::stod(field[0]) * static_cast<double>(kNanosPerMilli))));
    result.mean.push_back(std::stod(field[1]));
    result.std.push_back(std::stod(field[2]));
    result.n = std::stoul(field[3]);
  }
  return result;
}

}  // namespace marketsim
