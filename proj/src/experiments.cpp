#include "marketsim/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "marketsim/replay.hpp"

namespace marketsim {

namespace {

constexpr AgentId kExchangeId = 0;
constexpr AgentId kReplayId = 1;
constexpr AgentId kExperimentalId = 2;

template <class F>
void parallel_for(std::size_t n, unsigned workers, F&& body) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            body(i);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next = n;
          }
        }
      });
  }
  if (failure) std::rethrow_exception(failure);
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string side_name(Side s) { return s == Side::Buy ? "buy" : "sell"; }

std::size_t grid_count(Nanos span, Nanos interval) { return static_cast<std::size_t>(span / interval) + 1; }

}  // namespace

unsigned worker_count(unsigned configured) {
  unsigned n = configured ? configured : std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("MARKETSIM_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap > 0) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
  }
  return n;
}

std::vector<Side> ExperimentConfig::side_list() const {
  switch (sides) {
    case SideSelection::Buy:
      return {Side::Buy};
    case SideSelection::Sell:
      return {Side::Sell};
    case SideSelection::Both:
      break;
  }
  return {Side::Buy, Side::Sell};
}

void ExperimentConfig::validate() const {
  if (sizes.empty()) throw ConfigError("sizes must not be empty");
  if (trials < 1) throw ConfigError("trials must be at least 1");
  if (sample_interval <= 0 || trial_interval <= 0) throw ConfigError("intervals must be positive");
  if (window_pre < 0 || window_post < 0) throw ConfigError("window bounds must be non-negative");
  if (window_pre % sample_interval != 0 || window_post % sample_interval != 0)
    throw ConfigError("window bounds must be multiples of the sample interval");
  if (latency_ns < 0) throw ConfigError("latency must be non-negative");
  if (mode == ExperimentMode::ReplayImpact) {
    if (!(market_open < market_close)) throw ConfigError("market_open must precede market_close");
    if (trial_end < trial_start) throw ConfigError("trial_end precedes trial_start");
    if ((trial_start - market_open) % sample_interval != 0 || trial_interval % sample_interval != 0)
      throw ConfigError("trial times must fall on the sampling grid");
    if (message_file.empty() != orderbook_file.empty())
      throw ConfigError("message_file and orderbook_file must be given together");
    for (double s : sizes)
      if (!(s >= 0.0)) throw ConfigError("size multipliers must be non-negative");
  } else {
    fundamental.validate();
    population.validate();
    impact.validate();
    for (double g : sizes)
      if (!(g > 0.0)) throw ConfigError("greed values must be positive");
    if (impact.trigger_time > fundamental.horizon) throw ConfigError("impact trigger lies past the horizon");
    const SimTime trigger = SimTime::from_units(impact.trigger_time);
    if (trigger.nanos() < window_pre || trigger + window_post > SimTime::from_units(fundamental.horizon))
      throw ConfigError("capture window exceeds the simulation horizon");
  }
}

ExperimentConfig default_config(ExperimentMode mode) {
  ExperimentConfig c;
  c.mode = mode;
  if (mode == ExperimentMode::IabsImpact) {
    c.sizes = {1.0};
    c.sides = SideSelection::Buy;
    c.trials = 100;
    c.window_pre = 100 * kNanosPerUnit;
    c.window_post = 600 * kNanosPerUnit;
    c.sample_interval = kNanosPerUnit;
  }
  return c;
}

std::vector<SimTime> trial_times(SimTime start, SimTime end, Nanos interval) {
  if (interval <= 0) throw ConfigError("trial interval must be positive");
  std::vector<SimTime> times;
  for (SimTime t = start; t <= end; t += interval) times.push_back(t);
  return times;
}

std::shared_ptr<const lobster::ReplayData> load_replay_input(const ExperimentConfig& config) {
  if (!config.message_file.empty())
    return std::make_shared<const lobster::ReplayData>(
        lobster::load_replay_data(config.message_file, config.orderbook_file));
  const auto day = lobster::generate_synthetic_stream(config.synthetic);
  return std::make_shared<const lobster::ReplayData>(lobster::make_replay_data(day.messages, day.book_rows));
}

ReplayRunResult run_replay_simulation(std::shared_ptr<const lobster::ReplayData> data, const ExperimentConfig& config,
                                      SimTime stop, std::optional<ReplayTrial> trial,
                                      std::vector<PriceLevelVolume>* volume) {
  KernelConfig kc;
  kc.start = config.market_open;
  kc.stop = stop;
  kc.global_seed = config.base_seed;
  kc.latency_ns = config.latency_ns;
  kc.record_log = false;

  // Historical files are already in exchange sequence; keep their order.
  ExchangeAgent exchange(kExchangeId, ExchangeAgent::Options{.size_priority_ties = false});
  exchange.mute_notifications(kReplayId);
  ReplayAgent replay(kReplayId, kExchangeId, std::move(data), config.market_open);
  std::optional<ReplayImpactAgent> experimental;
  std::vector<Agent*> agents{&exchange, &replay};
  if (trial) {
    experimental.emplace(kExperimentalId, kExchangeId, trial->at, trial->side, trial->multiplier);
    agents.push_back(&*experimental);
  }

  SimTime next_sample = config.market_open;
  auto record_until = [&](SimTime limit, const OrderBook& book, bool inclusive) {
    while (inclusive ? next_sample <= limit : next_sample < limit) {
      const L2Snapshot snap = book.snapshot(config.volume_levels);
      for (const auto& level : snap.asks)
        if (!is_empty_level(level)) volume->push_back({next_sample, Side::Sell, level.price, level.volume});
      for (const auto& level : snap.bids)
        if (!is_empty_level(level)) volume->push_back({next_sample, Side::Buy, level.price, level.volume});
      next_sample += config.volume_sample_interval;
    }
  };
  if (volume)
    exchange.set_pre_message_observer(
        [&](SimTime t, const OrderBook& book) { record_until(std::min(t, stop + 1), book, false); });

  Kernel(kc).run(agents);
  if (volume) record_until(stop, exchange.book(), true);

  ReplayRunResult result;
  result.quotes = exchange.quotes();
  result.order_actions = exchange.order_actions();
  result.opening_orders = replay.opening_orders_sent();
  result.events_sent = replay.events_sent();
  if (experimental) {
    result.experimental_submitted = experimental->submitted();
    result.experimental_executed = experimental->executed();
  }
  return result;
}

ExperimentOutput run_replay_impact(const ExperimentConfig& config) {
  config.validate();
  const auto data = load_replay_input(config);
  const auto times = trial_times(config.trial_start, config.trial_end, config.trial_interval);
  if (times.empty()) throw ConfigError("empty trial schedule");

  // Coverage: every window must lie inside replayed, open-market data.
  SimTime first_event = config.market_open;
  SimTime last_event = config.market_open;
  for (const auto& ev : data->events)
    if (ev.time >= config.market_open) {
      first_event = ev.time;
      break;
    }
  if (!data->events.empty()) last_event = data->events.back().time;
  const SimTime coverage_end = std::min(config.market_close, last_event);
  for (SimTime t : times)
    if (t.nanos() - config.window_pre < first_event.nanos() || t + config.window_post > coverage_end)
      throw ConfigError("trial time " + t.to_string() + " outside data coverage [" + first_event.to_string() + ", " +
                        coverage_end.to_string() + "]");

  const SimTime stop = times.back() + config.window_post;
  ExperimentOutput output;
  const ReplayRunResult baseline_run = run_replay_simulation(data, config, stop, std::nullopt, &output.price_level_volume);
  const SampledSeries baseline = sample_mid(baseline_run.quotes, config.market_open, config.sample_interval,
                                            grid_count(stop - config.market_open, config.sample_interval));

  // One curve at a time keeps only `trials` millisecond series in memory.
  const unsigned workers = worker_count(config.threads);
  const std::size_t width = grid_count(config.window_pre + config.window_post, config.sample_interval);
  for (Side side : config.side_list())
    for (double size : config.sizes) {
      std::vector<AlignedSeries> normalized(times.size());
      parallel_for(times.size(), workers, [&](std::size_t i) {
        const SimTime at = times[i];
        const auto run = run_replay_simulation(data, config, at + config.window_post, ReplayTrial{at, side, size});
        const SampledSeries series = sample_mid(run.quotes, at - config.window_pre, config.sample_interval, width);
        normalized[i] = normalize_baseline(extract_window(series, at, config.window_pre, config.window_post),
                                           extract_window(baseline, at, config.window_pre, config.window_post));
      });
      output.curves.push_back(
          Curve{"replay_" + side_name(side), "x" + format_number(size), side, size, aggregate(normalized)});
    }
  return output;
}

IabsRunResult run_iabs_simulation(const ExperimentConfig& config, std::uint64_t seed, Side side, double greed,
                                  bool active, bool record_log) {
  FundamentalSeries oracle(config.fundamental, seed);
  ExchangeAgent exchange(kExchangeId);
  std::vector<std::unique_ptr<ZIAgent>> background;
  std::vector<Agent*> agents{&exchange};
  for (std::size_t i = 0; i < config.population.count; ++i) {
    background.push_back(
        std::make_unique<ZIAgent>(static_cast<AgentId>(i + 1), kExchangeId, config.population, oracle, seed));
    agents.push_back(background.back().get());
  }
  ImpactParams params = config.impact;
  params.side = side;
  params.greed = greed;
  params.active = active;
  ImpactAgent impact(static_cast<AgentId>(config.population.count + 1), kExchangeId, params);
  agents.push_back(&impact);

  KernelConfig kc;
  kc.start = SimTime(0);
  kc.stop = SimTime::from_units(config.fundamental.horizon);
  kc.global_seed = seed;
  kc.latency_ns = config.latency_ns;
  kc.record_log = record_log;

  IabsRunResult result;
  result.log = Kernel(kc).run(agents);
  result.quotes = exchange.quotes();
  result.impact_order = impact.order();
  result.impact_executed = impact.executed();
  for (std::int64_t t = 0; t <= config.fundamental.horizon; ++t) result.fundamental.push_back(oracle.value_at(t));
  for (const auto& agent : background) {
    result.arrivals += agent->arrivals();
    if (agent->first_arrival()) result.first_arrivals.push_back(*agent->first_arrival());
  }
  return result;
}

ExperimentOutput run_iabs_impact(const ExperimentConfig& config) {
  config.validate();
  const SimTime trigger = SimTime::from_units(config.impact.trigger_time);
  const SimTime t0 = trigger - config.window_pre;
  const std::size_t count = grid_count(config.window_pre + config.window_post, config.sample_interval);
  auto window = [&](const IabsRunResult& run) {
    return extract_window(sample_mid(run.quotes, t0, config.sample_interval, count), trigger, config.window_pre,
                          config.window_post);
  };
  const unsigned workers = worker_count(config.threads);

  // The control run does not depend on side or greed (the inactive agent only
  // queries), so one per seed serves every curve.
  std::vector<AlignedSeries> controls(config.trials);
  parallel_for(config.trials, workers, [&](std::size_t k) {
    controls[k] = window(run_iabs_simulation(config, config.base_seed + k, config.impact.side, 1.0, false));
  });

  const auto sides = config.side_list();
  const std::size_t curves = sides.size() * config.sizes.size();
  std::vector<AlignedSeries> impacts(curves * config.trials);
  parallel_for(impacts.size(), workers, [&](std::size_t i) {
    const std::size_t curve = i / config.trials;
    const std::size_t k = i % config.trials;
    const Side side = sides[curve / config.sizes.size()];
    const double greed = config.sizes[curve % config.sizes.size()];
    impacts[i] = paired_impact(window(run_iabs_simulation(config, config.base_seed + k, side, greed, true)), controls[k]);
  });

  ExperimentOutput output;
  for (std::size_t curve = 0; curve < curves; ++curve) {
    const Side side = sides[curve / config.sizes.size()];
    const double greed = config.sizes[curve % config.sizes.size()];
    const std::span<const AlignedSeries> members(impacts.data() + curve * config.trials, config.trials);
    output.curves.push_back(Curve{"iabs_" + side_name(side), "greed_" + format_number(greed), side, greed,
                                  aggregate(members)});
  }
  return output;
}

ExperimentOutput run_experiment(const ExperimentConfig& config) {
  return config.mode == ExperimentMode::ReplayImpact ? run_replay_impact(config) : run_iabs_impact(config);
}

std::vector<std::filesystem::path> emit_csv(const std::vector<Curve>& curves, const std::filesystem::path& dir) {
  if (curves.empty()) throw std::invalid_argument("no results to write");
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  for (const Curve& c : curves) {
    const auto path = dir / (c.figure + "_" + c.label + ".csv");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    write_result_csv(out, c.result);
    written.push_back(path);
  }
  return written;
}

std::vector<std::filesystem::path> emit_svg(const std::vector<Curve>& curves, const std::filesystem::path& dir) {
  if (curves.empty()) throw std::invalid_argument("no results to draw");
  std::filesystem::create_directories(dir);
  std::map<std::string, std::vector<const Curve*>> figures;
  for (const Curve& c : curves) figures[c.figure].push_back(&c);

  static constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  constexpr double kWidth = 800, kHeight = 450, kLeft = 70, kRight = 20, kTop = 40, kBottom = 50;
  constexpr std::size_t kMaxPoints = 2000;

  std::vector<std::filesystem::path> written;
  for (const auto& [name, members] : figures) {
    double x_min = 0, x_max = 0, y_min = 0, y_max = 0;
    bool first = true;
    for (const Curve* c : members)
      for (std::size_t k = 0; k < c->result.offsets.size(); ++k) {
        const double x = static_cast<double>(c->result.offsets[k]) / kNanosPerMilli;
        const double lo = c->result.mean[k] - c->result.std[k];
        const double hi = c->result.mean[k] + c->result.std[k];
        if (first) {
          x_min = x_max = x;
          y_min = lo;
          y_max = hi;
          first = false;
        }
        x_min = std::min(x_min, x);
        x_max = std::max(x_max, x);
        y_min = std::min(y_min, lo);
        y_max = std::max(y_max, hi);
      }
    if (x_max == x_min) x_max = x_min + 1;
    if (y_max == y_min) {
      y_min -= 0.5 * std::max(1e-9, std::abs(y_min));
      y_max += 0.5 * std::max(1e-9, std::abs(y_max));
    }
    auto sx = [&](double x) { return kLeft + (x - x_min) / (x_max - x_min) * (kWidth - kLeft - kRight); };
    auto sy = [&](double y) { return kTop + (y_max - y) / (y_max - y_min) * (kHeight - kTop - kBottom); };

    std::ostringstream svg;
    svg.precision(6);
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
        << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n"
        << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n"
        << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">"
        << name << "</text>\n"
        << "<line x1=\"" << kLeft << "\" y1=\"" << kHeight - kBottom << "\" x2=\"" << kWidth - kRight << "\" y2=\""
        << kHeight - kBottom << "\" stroke=\"black\"/>\n"
        << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << kHeight - kBottom
        << "\" stroke=\"black\"/>\n";
    if (x_min <= 0 && x_max >= 0)
      svg << "<line x1=\"" << sx(0) << "\" y1=\"" << kTop << "\" x2=\"" << sx(0) << "\" y2=\"" << kHeight - kBottom
          << "\" stroke=\"gray\" stroke-dasharray=\"4 4\"/>\n";
    svg << "<text x=\"" << kLeft << "\" y=\"" << kHeight - 15 << "\" font-family=\"sans-serif\" font-size=\"12\">"
        << x_min << " ms</text>\n"
        << "<text x=\"" << kWidth - kRight << "\" y=\"" << kHeight - 15
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">" << x_max << " ms</text>\n"
        << "<text x=\"5\" y=\"" << kTop + 10 << "\" font-family=\"sans-serif\" font-size=\"12\">" << y_max << "</text>\n"
        << "<text x=\"5\" y=\"" << kHeight - kBottom << "\" font-family=\"sans-serif\" font-size=\"12\">" << y_min
        << "</text>\n";

    for (std::size_t m = 0; m < members.size(); ++m) {
      const EventStudyResult& r = members[m]->result;
      const char* color = kColors[m % std::size(kColors)];
      const std::size_t stride = std::max<std::size_t>(1, (r.offsets.size() + kMaxPoints - 1) / kMaxPoints);
      std::vector<std::size_t> idx;
      for (std::size_t k = 0; k < r.offsets.size(); k += stride) idx.push_back(k);
      if (!idx.empty() && idx.back() != r.offsets.size() - 1) idx.push_back(r.offsets.size() - 1);

      auto x_of = [&](std::size_t k) { return sx(static_cast<double>(r.offsets[k]) / kNanosPerMilli); };
      svg << "<polygon fill=\"" << color << "\" fill-opacity=\"0.15\" stroke=\"none\" points=\"";
      for (std::size_t k : idx) svg << x_of(k) << ',' << sy(r.mean[k] + r.std[k]) << ' ';
      for (auto it = idx.rbegin(); it != idx.rend(); ++it) svg << x_of(*it) << ',' << sy(r.mean[*it] - r.std[*it]) << ' ';
      svg << "\"/>\n<path fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" d=\"";
      for (std::size_t j = 0; j < idx.size(); ++j)
        svg << (j ? " L" : "M") << x_of(idx[j]) << ' ' << sy(r.mean[idx[j]]);
      svg << "\"/>\n<text x=\"" << kWidth - kRight - 10 << "\" y=\"" << kTop + 16 * (m + 1)
          << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\" fill=\"" << color << "\">"
          << members[m]->label << " (n=" << r.n << ")</text>\n";
    }
    svg << "</svg>\n";

    const auto path = dir / (name + ".svg");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << svg.str();
    written.push_back(path);
  }
  return written;
}

std::filesystem::path emit_price_level_volume(const std::vector<PriceLevelVolume>& rows,
                                              const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto path = dir / "replay_price_level_volume.csv";
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "time_s,side,price,log_volume\n";
  char buf[96];
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof buf, "%s,%s,%lld,%.17g\n", format_decimal_seconds(row.at).c_str(),
                  side_name(row.side).c_str(), static_cast<long long>(row.price),
                  std::log(static_cast<double>(row.volume)));
    out << buf;
  }
  return path;
}

}  // namespace marketsim
