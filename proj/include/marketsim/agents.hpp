#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <vector>

#include "marketsim/kernel.hpp"
#include "marketsim/oracle.hpp"
#include "marketsim/random.hpp"

namespace marketsim {

/// Posterior over the current fundamental value.
struct FundamentalBelief {
  double mean = 0.0;
  double variance = 0.0;
  std::int64_t last_update = 0;
};

/// Propagates the belief `elapsed` units through the mean-reverting dynamics,
/// then merges one observation with noise variance `obs_noise_sq` by
/// precision weighting. An infinite noise variance leaves the propagated
/// belief untouched. `last_update` is not modified.
FundamentalBelief belief_update(const FundamentalBelief& belief, double observation, std::int64_t elapsed,
                                double obs_noise_sq, const FundamentalParams& fundamental);

/// Expected fundamental at the horizon given the belief at time `now`,
/// rounded to an integer price.
std::int64_t project_final(const FundamentalBelief& belief, std::int64_t now, const FundamentalParams& fundamental);

struct ZIParams {
  Price surplus_min = 0;
  Price surplus_max = 2000;
  double eta = 1.0;
  double obs_noise_sq = 1e6;
  /// Mean arrivals per time unit.
  double arrival_rate = 0.05;
  int q_max = 10;
  /// 2 * q_max non-increasing increments; entry q_max + h values the unit
  /// that takes holdings from h to h + 1.
  std::vector<Price> private_values;

  void validate() const;
};

/// Ranges a ZI population is drawn from; each agent draws its own parameters
/// from its own stream at construction.
struct ZIPopulation {
  std::size_t count = 100;
  Price surplus_min_lo = 0;
  Price surplus_min_hi = 1000;
  Price surplus_width_lo = 1000;
  Price surplus_width_hi = 4000;
  std::vector<double> eta_choices{0.2, 0.5, 0.8, 1.0};
  double obs_noise_sq = 1e6;
  double arrival_rate = 0.05;
  int q_max = 10;
  double private_value_sd = 1000.0;
  /// First arrival is uniform on [0, first_arrival_max] units.
  double first_arrival_max = 100.0;

  void validate() const;
};

ZIParams draw_zi_params(const ZIPopulation& population, RandomStream& rng);

struct Quotes {
  std::optional<Price> bid;
  std::optional<Price> ask;
};

struct OrderDecision {
  Side side = Side::Buy;
  Price price = 0;
  Quantity quantity = 0;
  /// Priced at (or through) the opposite inside quote.
  bool marketable = false;
  friend bool operator==(const OrderDecision&, const OrderDecision&) = default;
};

/// Private value of the next unit bought or sold from `holdings`; empty when
/// the trade would push |holdings| past q_max.
std::optional<Price> private_value_increment(const ZIParams& params, int holdings, Side side);

/// Deterministic core of a ZI arrival. Valuation v = final_estimate + private
/// increment. Takes the inside quote when it already offers at least
/// eta * requested_surplus, otherwise rests at v -/+ requested_surplus.
std::optional<OrderDecision> zi_decide(const ZIParams& params, int holdings, std::int64_t final_estimate,
                                       const Quotes& quotes, Side side, Price requested_surplus);

/// Draws the side (fair coin) and requested surplus (uniform on the agent's
/// extents), then applies zi_decide. Always consumes exactly two draws.
std::optional<OrderDecision> zi_act(const ZIParams& params, int holdings, std::int64_t final_estimate,
                                    const Quotes& quotes, RandomStream& rng);

/// Order ids owned by an agent: agent id in the high 32 bits.
constexpr OrderId agent_order_id(AgentId agent, std::uint32_t seq) noexcept {
  return (static_cast<OrderId>(agent) << 32) | seq;
}

/// Zero-intelligence background trader with a Bayesian fundamental estimate.
/// On each arrival it cancels everything outstanding, asks for the spread,
/// and on the reply observes the oracle, updates its belief and acts.
class ZIAgent : public Agent {
 public:
  /// Draws its parameters from agent_stream(global_seed, id).
  ZIAgent(AgentId id, AgentId exchange, const ZIPopulation& population, FundamentalSeries& oracle,
          std::uint64_t global_seed);
  ZIAgent(AgentId id, AgentId exchange, ZIParams params, FundamentalSeries& oracle, RandomStream rng,
          double first_arrival_max = 100.0);

  void on_wakeup(Kernel& kernel, SimTime now) override;
  void on_message(Kernel& kernel, const Message& msg) override;

  const ZIParams& params() const noexcept { return params_; }
  int holdings() const noexcept { return holdings_; }
  const FundamentalBelief& belief() const noexcept { return belief_; }
  const std::set<OrderId>& outstanding() const noexcept { return outstanding_; }
  std::size_t arrivals() const noexcept { return arrivals_; }
  std::optional<SimTime> first_arrival() const noexcept { return first_arrival_; }

  /// For tests: pretend these orders are resting.
  void assume_outstanding(OrderId id) { outstanding_.insert(id); }

 private:
  void act(Kernel& kernel, const SpreadReply& reply);

  AgentId exchange_;
  FundamentalSeries* oracle_;
  RandomStream rng_;
  ZIParams params_;
  double first_arrival_max_;
  FundamentalBelief belief_;
  int holdings_ = 0;
  std::set<OrderId> outstanding_;
  std::uint32_t next_seq_ = 1;
  bool started_ = false;
  std::size_t arrivals_ = 0;
  std::optional<SimTime> first_arrival_;
};

struct ImpactParams {
  std::int64_t trigger_time = 200;
  Side side = Side::Buy;
  double greed = 1.0;
  double band_fraction = 0.01;
  /// false = control run: the agent queries but never trades.
  bool active = true;
  /// Send an unbounded market order instead of a limit at the band edge.
  bool market_order = false;

  void validate() const;
};

/// Size = floor(greed * band volume); priced at the far edge of the band.
/// Empty when inactive or when the band holds no volume.
std::optional<OrderDecision> impact_act(const ImpactParams& params, const DepthReply& depth);

/// Experimental agent of the interactive simulation: at the trigger time it
/// asks for liquidity within the band and takes a greed-scaled share of it.
/// Any unfilled remainder is discarded.
class ImpactAgent : public Agent {
 public:
  ImpactAgent(AgentId id, AgentId exchange, ImpactParams params);

  void on_wakeup(Kernel& kernel, SimTime now) override;
  void on_message(Kernel& kernel, const Message& msg) override;

  const ImpactParams& params() const noexcept { return params_; }
  bool queried() const noexcept { return queried_; }
  std::optional<OrderDecision> order() const noexcept { return order_; }
  Quantity executed() const noexcept { return executed_; }

 private:
  AgentId exchange_;
  ImpactParams params_;
  bool started_ = false;
  bool queried_ = false;
  std::optional<OrderDecision> order_;
  Quantity executed_ = 0;
};

/// ceil(multiplier * inside_size), 0 for a non-positive multiplier.
Quantity replay_order_size(double multiplier, Quantity inside_size);

/// Experimental agent of the replay backtest: at `at`, after every historical
/// event with the same timestamp, sends one market order sized relative to
/// the opposite inside level.
class ReplayImpactAgent : public Agent {
 public:
  ReplayImpactAgent(AgentId id, AgentId exchange, SimTime at, Side side, double multiplier);

  void on_wakeup(Kernel& kernel, SimTime now) override;
  void on_message(Kernel& kernel, const Message& msg) override;

  Quantity inside_size() const noexcept { return inside_size_; }
  Quantity submitted() const noexcept { return submitted_; }
  Quantity executed() const noexcept { return executed_; }

 private:
  AgentId exchange_;
  SimTime at_;
  Side side_;
  double multiplier_;
  bool started_ = false;
  Quantity inside_size_ = 0;
  Quantity submitted_ = 0;
  Quantity executed_ = 0;
};

}  // namespace marketsim
