#include "marketsim/agents.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "marketsim/order_book.hpp"

namespace marketsim {

FundamentalBelief belief_update(const FundamentalBelief& belief, double observation, std::int64_t elapsed,
                                double obs_noise_sq, const FundamentalParams& f) {
  if (elapsed < 0) throw std::invalid_argument("belief update with negative elapsed time");
  const double decay = 1.0 - f.kappa;
  const double a = std::pow(decay, static_cast<double>(elapsed));
  const double r_bar = static_cast<double>(f.r_bar);

  FundamentalBelief out = belief;
  out.mean = (1.0 - a) * r_bar + a * belief.mean;
  // Shock variance accumulated over `elapsed` steps: sigma^2 * sum_{i<elapsed} decay^(2i).
  const double shock = f.kappa == 0.0 ? static_cast<double>(elapsed) * f.sigma_shock_sq
                                      : f.sigma_shock_sq * (1.0 - a * a) / (1.0 - decay * decay);
  out.variance = a * a * belief.variance + shock;

  if (std::isinf(obs_noise_sq)) return out;
  const double denom = out.variance + obs_noise_sq;
  if (denom == 0.0) return out;
  const double weight = out.variance / denom;
  out.mean += weight * (observation - out.mean);
  out.variance = out.variance * obs_noise_sq / denom;
  return out;
}

std::int64_t project_final(const FundamentalBelief& belief, std::int64_t now, const FundamentalParams& f) {
  if (now > f.horizon) throw std::invalid_argument("projection time past the horizon");
  const double a = std::pow(1.0 - f.kappa, static_cast<double>(f.horizon - now));
  return std::llround((1.0 - a) * static_cast<double>(f.r_bar) + a * belief.mean);
}

void ZIParams::validate() const {
  if (surplus_min < 0 || surplus_min > surplus_max) throw std::invalid_argument("need 0 <= surplus_min <= surplus_max");
  if (!(eta >= 0.0 && eta <= 1.0)) throw std::invalid_argument("eta must lie in [0, 1]");
  if (!(obs_noise_sq >= 0.0)) throw std::invalid_argument("observation variance must be non-negative");
  if (!(arrival_rate > 0.0)) throw std::invalid_argument("arrival rate must be positive");
  if (q_max < 1) throw std::invalid_argument("q_max must be at least 1");
  if (private_values.size() != static_cast<std::size_t>(2 * q_max))
    throw std::invalid_argument("private value vector must hold 2 * q_max entries");
  if (!std::is_sorted(private_values.begin(), private_values.end(), std::greater<>()))
    throw std::invalid_argument("private values must be non-increasing");
}

void ZIPopulation::validate() const {
  if (surplus_min_lo < 0 || surplus_min_lo > surplus_min_hi || surplus_width_lo < 0 ||
      surplus_width_lo > surplus_width_hi)
    throw std::invalid_argument("invalid surplus ranges");
  if (eta_choices.empty()) throw std::invalid_argument("eta_choices must not be empty");
  if (!(arrival_rate > 0.0) || q_max < 1 || !(private_value_sd >= 0.0) || !(first_arrival_max >= 0.0))
    throw std::invalid_argument("invalid ZI population parameters");
}

ZIParams draw_zi_params(const ZIPopulation& pop, RandomStream& rng) {
  pop.validate();
  ZIParams p;
  p.surplus_min = std::llround(rng.uniform(static_cast<double>(pop.surplus_min_lo), static_cast<double>(pop.surplus_min_hi)));
  p.surplus_max = p.surplus_min + std::llround(rng.uniform(static_cast<double>(pop.surplus_width_lo),
                                                           static_cast<double>(pop.surplus_width_hi)));
  p.eta = pop.eta_choices[static_cast<std::size_t>(
      std::min<double>(std::floor(rng.uniform() * static_cast<double>(pop.eta_choices.size())),
                       static_cast<double>(pop.eta_choices.size() - 1)))];
  p.obs_noise_sq = pop.obs_noise_sq;
  p.arrival_rate = pop.arrival_rate;
  p.q_max = pop.q_max;
  p.private_values.resize(static_cast<std::size_t>(2 * pop.q_max));
  for (auto& v : p.private_values) v = std::llround(rng.normal(0.0, pop.private_value_sd));
  std::sort(p.private_values.begin(), p.private_values.end(), std::greater<>());
  p.validate();
  return p;
}

std::optional<Price> private_value_increment(const ZIParams& params, int holdings, Side side) {
  if (side == Side::Buy) {
    if (holdings + 1 > params.q_max) return std::nullopt;
    return params.private_values[static_cast<std::size_t>(params.q_max + holdings)];
  }
  if (holdings - 1 < -params.q_max) return std::nullopt;
  return params.private_values[static_cast<std::size_t>(params.q_max + holdings - 1)];
}

std::optional<OrderDecision> zi_decide(const ZIParams& params, int holdings, std::int64_t final_estimate,
                                       const Quotes& quotes, Side side, Price requested_surplus) {
  const auto increment = private_value_increment(params, holdings, side);
  if (!increment) return std::nullopt;
  const Price value = final_estimate + *increment;
  const double threshold = params.eta * static_cast<double>(requested_surplus);

  if (side == Side::Buy) {
    if (quotes.ask && static_cast<double>(value - *quotes.ask) >= threshold)
      return OrderDecision{Side::Buy, *quotes.ask, 1, true};
    const Price price = value - requested_surplus;
    if (price <= 0) return std::nullopt;
    return OrderDecision{Side::Buy, price, 1, quotes.ask && price >= *quotes.ask};
  }
  if (quotes.bid && static_cast<double>(*quotes.bid - value) >= threshold)
    return OrderDecision{Side::Sell, *quotes.bid, 1, true};
  const Price price = value + requested_surplus;
  if (price <= 0) return std::nullopt;
  return OrderDecision{Side::Sell, price, 1, quotes.bid && price <= *quotes.bid};
}

std::optional<OrderDecision> zi_act(const ZIParams& params, int holdings, std::int64_t final_estimate,
                                    const Quotes& quotes, RandomStream& rng) {
  const Side side = rng.coin() ? Side::Buy : Side::Sell;
  const Price surplus = std::llround(rng.uniform(static_cast<double>(params.surplus_min),
                                                 static_cast<double>(params.surplus_max)));
  return zi_decide(params, holdings, final_estimate, quotes, side, surplus);
}

ZIAgent::ZIAgent(AgentId id, AgentId exchange, const ZIPopulation& population, FundamentalSeries& oracle,
                 std::uint64_t global_seed)
    : Agent(id),
      exchange_(exchange),
      oracle_(&oracle),
      rng_(agent_stream(global_seed, id)),
      params_(draw_zi_params(population, rng_)),
      first_arrival_max_(population.first_arrival_max),
      belief_{static_cast<double>(oracle.params().r_bar), 0.0, 0} {}

ZIAgent::ZIAgent(AgentId id, AgentId exchange, ZIParams params, FundamentalSeries& oracle, RandomStream rng,
                 double first_arrival_max)
    : Agent(id),
      exchange_(exchange),
      oracle_(&oracle),
      rng_(std::move(rng)),
      params_(std::move(params)),
      first_arrival_max_(first_arrival_max),
      belief_{static_cast<double>(oracle.params().r_bar), 0.0, 0} {
  params_.validate();
}

void ZIAgent::on_wakeup(Kernel& kernel, SimTime now) {
  if (!started_) {
    started_ = true;
    kernel.wakeup_at(id(), now + SimTime::from_units(rng_.uniform(0.0, first_arrival_max_)).nanos());
    return;
  }
  if (!first_arrival_) first_arrival_ = now;
  ++arrivals_;
  for (OrderId order : outstanding_) kernel.send(id(), exchange_, CancelOrder{order});
  kernel.send(id(), exchange_, QuerySpread{});
  kernel.wakeup_at(id(), now + SimTime::from_units(rng_.exponential(params_.arrival_rate)).nanos());
}

void ZIAgent::act(Kernel& kernel, const SpreadReply& reply) {
  const FundamentalParams& f = oracle_->params();
  const std::int64_t t = std::min(kernel.now().units(), f.horizon);
  const auto observation = oracle_->observe(t, params_.obs_noise_sq, rng_);
  belief_ = belief_update(belief_, static_cast<double>(observation), t - belief_.last_update, params_.obs_noise_sq, f);
  belief_.last_update = t;
  const std::int64_t estimate = project_final(belief_, t, f);

  const auto decision = zi_act(params_, holdings_, estimate, Quotes{reply.best_bid, reply.best_ask}, rng_);
  if (!decision) return;
  const OrderId order = agent_order_id(id(), next_seq_++);
  outstanding_.insert(order);
  kernel.send(id(), exchange_, LimitOrderSubmit{order, decision->side, decision->price, decision->quantity, false});
}

void ZIAgent::on_message(Kernel& kernel, const Message& msg) {
  if (const auto* reply = std::get_if<SpreadReply>(&msg.payload)) {
    act(kernel, *reply);
  } else if (const auto* exec = std::get_if<OrderExecuted>(&msg.payload)) {
    holdings_ += static_cast<int>(exec->side == Side::Buy ? exec->quantity : -exec->quantity);
    if (exec->remaining == 0) outstanding_.erase(exec->order_id);
  } else if (const auto* accepted = std::get_if<OrderAccepted>(&msg.payload)) {
    if (accepted->rested == 0) outstanding_.erase(accepted->order_id);
  } else if (const auto* cancelled = std::get_if<OrderCancelled>(&msg.payload)) {
    outstanding_.erase(cancelled->order_id);
  }
}

void ImpactParams::validate() const {
  if (trigger_time < 0) throw std::invalid_argument("impact trigger time must be non-negative");
  if (!(greed > 0.0)) throw std::invalid_argument("greed must be positive");
  if (!(band_fraction >= 0.0)) throw std::invalid_argument("band fraction must be non-negative");
}

std::optional<OrderDecision> impact_act(const ImpactParams& params, const DepthReply& depth) {
  if (!params.active || depth.side_empty || depth.levels.empty() || depth.total_volume <= 0) return std::nullopt;
  const auto quantity =
      static_cast<Quantity>(std::floor(params.greed * static_cast<double>(depth.total_volume) + 1e-9));
  if (quantity <= 0) return std::nullopt;
  return OrderDecision{params.side, band_limit(depth.side, depth.levels.front().price, params.band_fraction), quantity,
                       true};
}

ImpactAgent::ImpactAgent(AgentId id, AgentId exchange, ImpactParams params)
    : Agent(id), exchange_(exchange), params_(params) {
  params_.validate();
}

void ImpactAgent::on_wakeup(Kernel& kernel, SimTime now) {
  if (!started_) {
    started_ = true;
    kernel.wakeup_at(id(), std::max(now, SimTime::from_units(params_.trigger_time)));
    return;
  }
  queried_ = true;
  kernel.send(id(), exchange_, QueryDepth{opposite(params_.side), params_.band_fraction});
}

void ImpactAgent::on_message(Kernel& kernel, const Message& msg) {
  if (const auto* depth = std::get_if<DepthReply>(&msg.payload)) {
    order_ = impact_act(params_, *depth);
    if (!order_) return;
    const OrderId order = agent_order_id(id(), 1);
    if (params_.market_order)
      kernel.send(id(), exchange_, MarketOrderSubmit{order, order_->side, order_->quantity});
    else
      kernel.send(id(), exchange_, LimitOrderSubmit{order, order_->side, order_->price, order_->quantity, true});
  } else if (const auto* exec = std::get_if<OrderExecuted>(&msg.payload)) {
    executed_ += exec->quantity;
  }
}

Quantity replay_order_size(double multiplier, Quantity inside_size) {
  if (!(multiplier > 0.0) || inside_size <= 0) return 0;
  return static_cast<Quantity>(std::ceil(multiplier * static_cast<double>(inside_size) - 1e-9));
}

ReplayImpactAgent::ReplayImpactAgent(AgentId id, AgentId exchange, SimTime at, Side side, double multiplier)
    : Agent(id), exchange_(exchange), at_(at), side_(side), multiplier_(multiplier) {}

void ReplayImpactAgent::on_wakeup(Kernel& kernel, SimTime now) {
  if (!started_) {
    started_ = true;
    kernel.wakeup_at(id(), std::max(now, at_), Phase::Late);
    return;
  }
  kernel.send(id(), exchange_, QuerySpread{});
}

void ReplayImpactAgent::on_message(Kernel& kernel, const Message& msg) {
  if (const auto* reply = std::get_if<SpreadReply>(&msg.payload)) {
    inside_size_ = side_ == Side::Buy ? reply->ask_size : reply->bid_size;
    submitted_ = replay_order_size(multiplier_, inside_size_);
    if (submitted_ > 0) kernel.send(id(), exchange_, MarketOrderSubmit{agent_order_id(id(), 1), side_, submitted_});
  } else if (const auto* exec = std::get_if<OrderExecuted>(&msg.payload)) {
    executed_ += exec->quantity;
  }
}

}  // namespace marketsim
