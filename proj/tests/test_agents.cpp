#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "marketsim/agents.hpp"
#include "marketsim/exchange.hpp"
#include "marketsim/experiments.hpp"

using namespace marketsim;

namespace {

FundamentalParams fundamental(double kappa = 0.05, double sigma_sq = 1e4, std::int64_t horizon = 1000) {
  FundamentalParams f;
  f.kappa = kappa;
  f.sigma_shock_sq = sigma_sq;
  f.horizon = horizon;
  return f;
}

ZIParams flat_params(int q_max = 10) {
  ZIParams p;
  p.q_max = q_max;
  p.private_values.assign(static_cast<std::size_t>(2 * q_max), 0);
  return p;
}

/// Answers spread queries with a fixed reply and keeps everything else.
class FakeExchange : public Agent {
 public:
  FakeExchange(AgentId id, SpreadReply reply) : Agent(id), reply_(reply) {}
  void on_wakeup(Kernel&, SimTime) override {}
  void on_message(Kernel& k, const Message& m) override {
    received.push_back(m);
    if (std::holds_alternative<QuerySpread>(m.payload)) k.send(id(), m.sender, reply_);
  }
  std::vector<Message> received;

 private:
  SpreadReply reply_;
};

}  // namespace

TEST_CASE("belief update matches a step-by-step recomputation") {
  const auto f = fundamental(0.05, 1e4);
  const FundamentalBelief prior{101'000.0, 2.5e5, 0};
  const double obs = 99'500.0, noise = 1e6;

  double m = prior.mean, v = prior.variance;
  for (int i = 0; i < 3; ++i) {
    m = 0.95 * m + 0.05 * 100'000.0;
    v = 0.95 * 0.95 * v + 1e4;
  }
  const double k = v / (v + noise);
  const double expected_mean = m + k * (obs - m);
  const double expected_var = (1.0 - k) * v;

  const auto post = belief_update(prior, obs, 3, noise, f);
  CHECK(post.mean == doctest::Approx(expected_mean).epsilon(1e-10));
  CHECK(post.variance == doctest::Approx(expected_var).epsilon(1e-10));
  CHECK(post.last_update == 0);

  const auto ignored = belief_update(prior, obs, 3, std::numeric_limits<double>::infinity(), f);
  CHECK(ignored.mean == doctest::Approx(m).epsilon(1e-12));
  CHECK(ignored.variance == doctest::Approx(v).epsilon(1e-12));

  // No uncertainty left and nothing elapsed: the observation carries no weight.
  const auto certain = belief_update(FundamentalBelief{100'300.0, 0.0, 0}, obs, 0, noise, fundamental(0.05, 0.0));
  CHECK(certain.mean == 100'300.0);
  CHECK(certain.variance == 0.0);

  const auto exact = belief_update(prior, obs, 3, 0.0, f);
  CHECK(exact.mean == doctest::Approx(obs).epsilon(1e-12));
  CHECK(exact.variance == 0.0);

  CHECK_THROWS(belief_update(prior, obs, -1, noise, f));
}

TEST_CASE("projection to the horizon") {
  const FundamentalBelief b{101'000.0, 1.0, 0};
  CHECK(project_final(b, 1000, fundamental()) == 101'000);
  CHECK(project_final(b, 3, fundamental(1.0)) == 100'000);
  CHECK(project_final(b, 800, fundamental()) == std::llround(100'000.0 + 1000.0 * std::pow(0.95, 200)));
  CHECK(project_final(b, 800, fundamental()) == 100'000);
  CHECK_THROWS(project_final(b, 1001, fundamental()));
}

TEST_CASE("private value indexing") {
  ZIParams p = flat_params(2);
  p.private_values = {40, 30, 20, 10};
  CHECK(private_value_increment(p, 0, Side::Buy) == 20);
  CHECK(private_value_increment(p, 0, Side::Sell) == 30);
  CHECK(private_value_increment(p, 1, Side::Buy) == 10);
  CHECK(private_value_increment(p, -2, Side::Sell) == std::nullopt);
  CHECK(private_value_increment(p, 2, Side::Buy) == std::nullopt);
  CHECK(private_value_increment(p, -2, Side::Buy) == 40);
}

TEST_CASE("ZI decisions") {
  ZIParams p = flat_params();
  const Quotes quotes{99'000, 100'500};

  p.eta = 0.0;
  CHECK(zi_decide(p, 0, 101'000, quotes, Side::Buy, 500) == OrderDecision{Side::Buy, 100'500, 1, true});
  CHECK(zi_decide(p, 0, 98'000, quotes, Side::Sell, 500) == OrderDecision{Side::Sell, 99'000, 1, true});

  p.eta = 1.0;
  // The ask leaves one tick less surplus than requested: rest at v - R.
  const Price v = 100'000, r = 600;
  CHECK(zi_decide(p, 0, v, Quotes{std::nullopt, v - r + 1}, Side::Buy, r) == OrderDecision{Side::Buy, v - r, 1, false});
  CHECK(zi_decide(p, 0, v, Quotes{std::nullopt, v - r}, Side::Buy, r) == OrderDecision{Side::Buy, v - r, 1, true});
  CHECK(zi_decide(p, 0, v, Quotes{}, Side::Sell, r) == OrderDecision{Side::Sell, v + r, 1, false});

  CHECK(zi_decide(p, 10, v, quotes, Side::Buy, r) == std::nullopt);
  CHECK(zi_decide(p, -10, v, quotes, Side::Sell, r) == std::nullopt);
  CHECK(zi_decide(p, 10, v, quotes, Side::Sell, r).has_value());
}

TEST_CASE("ZI orders never cross the agent's own valuation") {
  RandomStream rng(21);
  ZIPopulation pop;
  for (int i = 0; i < 20'000; ++i) {
    const ZIParams p = draw_zi_params(pop, rng);
    const int holdings = static_cast<int>(rng.uniform_int(-p.q_max, p.q_max));
    const std::int64_t estimate = rng.uniform_int(95'000, 105'000);
    Quotes q;
    if (rng.coin()) q.bid = rng.uniform_int(94'000, 104'000);
    if (rng.coin()) q.ask = (q.bid ? *q.bid : 94'000) + rng.uniform_int(1, 3000);
    const Side side = rng.coin() ? Side::Buy : Side::Sell;
    const auto d = zi_decide(p, holdings, estimate, q, side, rng.uniform_int(p.surplus_min, p.surplus_max));
    if (!d) continue;
    const Price value = estimate + *private_value_increment(p, holdings, side);
    if (side == Side::Buy) REQUIRE(d->price <= value);
    else REQUIRE(d->price >= value);
    REQUIRE(d->quantity == 1);
  }
}

TEST_CASE("zi_act draws side then surplus") {
  ZIParams p = flat_params();
  p.surplus_min = 100;
  p.surplus_max = 900;
  RandomStream a(5), b(5);
  const auto d = zi_act(p, 0, 100'000, Quotes{}, a);
  const Side side = b.coin() ? Side::Buy : Side::Sell;
  const Price surplus = std::llround(b.uniform(100.0, 900.0));
  CHECK(d == zi_decide(p, 0, 100'000, Quotes{}, side, surplus));
  CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("population draws respect their ranges") {
  ZIPopulation pop;
  RandomStream rng(2);
  for (int i = 0; i < 500; ++i) {
    const auto p = draw_zi_params(pop, rng);
    CHECK(p.surplus_min >= pop.surplus_min_lo);
    CHECK(p.surplus_min <= pop.surplus_min_hi);
    CHECK(p.surplus_max - p.surplus_min >= pop.surplus_width_lo);
    CHECK(p.surplus_max - p.surplus_min <= pop.surplus_width_hi);
    CHECK(std::find(pop.eta_choices.begin(), pop.eta_choices.end(), p.eta) != pop.eta_choices.end());
  }
  ZIParams bad = flat_params();
  bad.private_values[0] = -5;
  CHECK_THROWS(bad.validate());
}

TEST_CASE("an arrival cancels resting orders before acting") {
  FundamentalSeries oracle(fundamental(), 1);
  FakeExchange exchange(0, SpreadReply{99'000, 101'000, 5, 5});
  ZIAgent zi(1, 0, flat_params(), oracle, RandomStream(4), 0.0);
  zi.assume_outstanding(agent_order_id(1, 900));
  zi.assume_outstanding(agent_order_id(1, 901));
  Agent* agents[] = {&exchange, &zi};
  KernelConfig kc;
  kc.start = SimTime(0);
  kc.stop = SimTime(1);
  Kernel(kc).run(agents);

  REQUIRE(exchange.received.size() == 4);
  CHECK(std::get<CancelOrder>(exchange.received[0].payload).order_id == agent_order_id(1, 900));
  CHECK(std::get<CancelOrder>(exchange.received[1].payload).order_id == agent_order_id(1, 901));
  CHECK(std::holds_alternative<QuerySpread>(exchange.received[2].payload));
  CHECK(std::holds_alternative<LimitOrderSubmit>(exchange.received[3].payload));
  CHECK(zi.arrivals() == 1);
}

TEST_CASE("exact observations pin the belief to the fundamental") {
  ZIPopulation pop;
  pop.count = 20;
  pop.obs_noise_sq = 0.0;
  FundamentalSeries oracle(fundamental(), 8);
  ExchangeAgent exchange(0);
  std::vector<std::unique_ptr<ZIAgent>> zi;
  std::vector<Agent*> agents{&exchange};
  for (AgentId id = 1; id <= pop.count; ++id) {
    zi.push_back(std::make_unique<ZIAgent>(id, 0, pop, oracle, 8));
    agents.push_back(zi.back().get());
  }
  KernelConfig kc;
  kc.start = SimTime(0);
  kc.stop = SimTime::from_units(std::int64_t{1000});
  kc.record_log = false;
  Kernel(kc).run(agents);
  for (const auto& a : zi) {
    REQUIRE(a->arrivals() > 0);
    CHECK(a->belief().mean == doctest::Approx(static_cast<double>(oracle.value_at(a->belief().last_update))).epsilon(1e-12));
  }
}

TEST_CASE("arrival counts match the Poisson rate") {
  const auto config = default_config(ExperimentMode::IabsImpact);
  const double agents = static_cast<double>(config.population.count);
  const double horizon = static_cast<double>(config.fundamental.horizon);
  const double first_mean = config.population.first_arrival_max / 2.0;
  const double expected = agents * (1.0 + config.population.arrival_rate * (horizon - first_mean));
  double total = 0;
  const int seeds = 20;
  for (int s = 1; s <= seeds; ++s)
    total += static_cast<double>(run_iabs_simulation(config, static_cast<std::uint64_t>(s), Side::Buy, 1.0, false).arrivals);
  CHECK(std::abs(total / seeds - expected) / expected < 0.10);
}

TEST_CASE("impact sizing") {
  DepthReply depth;
  depth.side = Side::Sell;
  depth.side_empty = false;
  depth.levels = {{100'000, 300}, {100'500, 200}};
  depth.total_volume = 500;
  ImpactParams p;

  const auto full = impact_act(p, depth);
  REQUIRE(full);
  CHECK(full->quantity == 500);
  CHECK(full->side == Side::Buy);
  CHECK(full->price == 101'000);

  p.greed = 0.5;
  depth.total_volume = 501;
  CHECK(impact_act(p, depth)->quantity == 250);

  p.active = false;
  CHECK(!impact_act(p, depth));
  p.active = true;
  depth.side_empty = true;
  CHECK(!impact_act(p, depth));

  p.greed = 0.0;
  CHECK_THROWS(p.validate());
}

TEST_CASE("control runs query depth without trading") {
  auto config = default_config(ExperimentMode::IabsImpact);
  const auto run = run_iabs_simulation(config, 3, Side::Buy, 1.0, false, true);
  const auto impact_id = static_cast<AgentId>(config.population.count + 1);
  std::size_t queries = 0, orders = 0;
  for (const auto& m : run.log) {
    if (m.sender != impact_id) continue;
    if (std::holds_alternative<QueryDepth>(m.payload)) ++queries;
    if (std::holds_alternative<LimitOrderSubmit>(m.payload) || std::holds_alternative<MarketOrderSubmit>(m.payload))
      ++orders;
  }
  CHECK(queries == 1);
  CHECK(orders == 0);
  CHECK(!run.impact_order);
}

TEST_CASE("replay order sizing") {
  CHECK(replay_order_size(2.0, 150) == 300);
  CHECK(replay_order_size(0.5, 3) == 2);
  CHECK(replay_order_size(0.0, 150) == 0);
  CHECK(replay_order_size(1.0, 0) == 0);
}
