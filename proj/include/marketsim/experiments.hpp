#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "marketsim/agents.hpp"
#include "marketsim/event_study.hpp"
#include "marketsim/exchange.hpp"
#include "marketsim/lobster.hpp"
#include "marketsim/oracle.hpp"

namespace marketsim {

enum class ExperimentMode { ReplayImpact, IabsImpact };
enum class SideSelection { Buy, Sell, Both };

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Everything an impact experiment needs. Replay mode uses the data, schedule
/// and size multipliers; interactive mode uses the fundamental, population and
/// impact settings with `sizes` as the greed grid.
struct ExperimentConfig {
  ExperimentMode mode = ExperimentMode::ReplayImpact;

  // Replay data. When message_file is empty a synthetic day is generated.
  std::string message_file;
  std::string orderbook_file;
  lobster::SyntheticConfig synthetic;
  SimTime market_open = SimTime::from_hms(9, 30, 0);
  SimTime market_close = SimTime::from_hms(10, 30, 0);
  SimTime trial_start = SimTime::from_hms(9, 45, 0);
  SimTime trial_end = SimTime::from_hms(9, 53, 15);
  Nanos trial_interval = 5 * kNanosPerSecond;
  Nanos latency_ns = 0;
  Nanos volume_sample_interval = kNanosPerSecond;
  std::size_t volume_levels = 10;

  std::vector<double> sizes{2.0};
  SideSelection sides = SideSelection::Both;
  std::size_t trials = 100;
  std::uint64_t base_seed = 1;
  Nanos window_pre = 10 * kNanosPerSecond;
  Nanos window_post = 60 * kNanosPerSecond;
  Nanos sample_interval = kNanosPerMilli;

  // Interactive simulation.
  FundamentalParams fundamental;
  ZIPopulation population;
  ImpactParams impact;

  std::string output_dir = "out";
  /// Worker threads; 0 = hardware concurrency. MARKETSIM_THREADS caps it.
  unsigned threads = 0;

  std::vector<Side> side_list() const;
  void validate() const;
};

/// Defaults for each mode (interactive windows are in 100 ms units).
ExperimentConfig default_config(ExperimentMode mode);
/// Flat JSON object; unknown keys are rejected. Keys are documented in the README.
/// With `mode` given, a "mode" key in the file must agree with it.
ExperimentConfig parse_config(const std::string& json_text, std::optional<ExperimentMode> mode = std::nullopt);
ExperimentConfig load_config(const std::filesystem::path& path, std::optional<ExperimentMode> mode = std::nullopt);

/// start, start + interval, ... up to and including end.
std::vector<SimTime> trial_times(SimTime start, SimTime end, Nanos interval);

/// One aggregated curve; curves sharing `figure` are drawn together.
struct Curve {
  std::string figure;
  std::string label;
  Side side = Side::Buy;
  double size = 0.0;
  EventStudyResult result;
};

struct PriceLevelVolume {
  SimTime at;
  Side side = Side::Buy;
  Price price = 0;
  Quantity volume = 0;
};

struct ExperimentOutput {
  std::vector<Curve> curves;
  std::vector<PriceLevelVolume> price_level_volume;
};

/// Replay data for a config: parsed files, or the synthetic day.
std::shared_ptr<const lobster::ReplayData> load_replay_input(const ExperimentConfig& config);

struct ReplayTrial {
  SimTime at;
  Side side = Side::Buy;
  double multiplier = 0.0;
};

struct ReplayRunResult {
  std::vector<QuoteUpdate> quotes;
  std::size_t order_actions = 0;
  std::size_t opening_orders = 0;
  std::size_t events_sent = 0;
  Quantity experimental_submitted = 0;
  Quantity experimental_executed = 0;
};

/// One replay simulation from market open to `stop`, optionally with the
/// experimental agent's order.
ReplayRunResult run_replay_simulation(std::shared_ptr<const lobster::ReplayData> data, const ExperimentConfig& config,
                                      SimTime stop, std::optional<ReplayTrial> trial,
                                      std::vector<PriceLevelVolume>* volume = nullptr);

ExperimentOutput run_replay_impact(const ExperimentConfig& config);

struct IabsRunResult {
  std::vector<QuoteUpdate> quotes;
  SimulationLog log;
  std::optional<OrderDecision> impact_order;
  Quantity impact_executed = 0;
  std::vector<std::int64_t> fundamental;
  std::size_t arrivals = 0;
  std::vector<SimTime> first_arrivals;
};

/// One interactive simulation with the given seed; the impact agent is always
/// present and trades only when `active`.
IabsRunResult run_iabs_simulation(const ExperimentConfig& config, std::uint64_t seed, Side side, double greed,
                                  bool active, bool record_log = false);

/// Experimental-control pair for trial k uses seed base_seed + k.
ExperimentOutput run_iabs_impact(const ExperimentConfig& config);

ExperimentOutput run_experiment(const ExperimentConfig& config);

/// One CSV per curve, named <figure>_<label>.csv. Returns the paths written.
std::vector<std::filesystem::path> emit_csv(const std::vector<Curve>& curves, const std::filesystem::path& dir);
/// One SVG per figure: a +/-1 std band polygon and one mean path per curve.
std::vector<std::filesystem::path> emit_svg(const std::vector<Curve>& curves, const std::filesystem::path& dir);
/// time_s,side,price,log_volume
std::filesystem::path emit_price_level_volume(const std::vector<PriceLevelVolume>& rows,
                                              const std::filesystem::path& dir);

/// Effective worker count for a config value, honouring MARKETSIM_THREADS.
unsigned worker_count(unsigned configured);

}  // namespace marketsim
