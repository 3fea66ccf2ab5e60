#include "marketsim/order_book.hpp"

#include <cmath>
#include <string>

namespace marketsim {

namespace {
// Slack for the floating-point product in band_limit; far below one price unit.
constexpr long double kBandSlack = 1e-6L;
}  // namespace

Price band_limit(Side book_side, Price inside, double fraction) {
  if (!(fraction >= 0.0)) throw OrderBookError("band fraction must be non-negative");
  const long double p = static_cast<long double>(inside);
  if (book_side == Side::Sell) return static_cast<Price>(std::floor(p * (1.0L + fraction) + kBandSlack));
  return static_cast<Price>(std::ceil(p * (1.0L - fraction) - kBandSlack));
}

template <class Levels>
void OrderBook::match(Levels& levels, Side taker_side, OrderId taker_id, AgentId taker_owner, Quantity& remaining,
                      std::optional<Price> limit, SimTime at, std::vector<Fill>& fills) {
  while (remaining > 0 && !levels.empty()) {
    auto level_it = levels.begin();
    const Price price = level_it->first;
    if (limit && (taker_side == Side::Buy ? price > *limit : price < *limit)) break;

    Level& level = level_it->second;
    while (remaining > 0 && !level.queue.empty()) {
      Order& maker = level.queue.front();
      const Quantity qty = std::min(remaining, maker.quantity);
      maker.quantity -= qty;
      level.volume -= qty;
      remaining -= qty;
      fills.push_back(Fill{taker_id, maker.id, price, qty, at, taker_side, taker_owner, maker.owner, maker.quantity});
      if (maker.quantity == 0) {
        index_.erase(maker.id);
        level.queue.pop_front();
      }
    }
    if (level.queue.empty()) levels.erase(level_it);
  }
}

void OrderBook::rest(const Order& order) {
  auto place = [&](auto& levels) {
    Level& level = levels[order.price];
    level.queue.push_back(order);
    level.volume += order.quantity;
    index_.emplace(order.id, Locator{order.side, order.price, std::prev(level.queue.end())});
  };
  if (order.side == Side::Buy)
    place(bids_);
  else
    place(asks_);
}

LimitResult OrderBook::submit_limit(const Order& order, bool immediate_or_cancel) {
  if (order.quantity <= 0) throw OrderBookError("limit order quantity must be positive");
  if (order.price <= 0) throw OrderBookError("limit order price must be positive");
  if (index_.contains(order.id)) throw OrderBookError("duplicate order id " + std::to_string(order.id));

  LimitResult result;
  Quantity remaining = order.quantity;
  if (order.side == Side::Buy)
    match(asks_, Side::Buy, order.id, order.owner, remaining, order.price, order.entered_at, result.fills);
  else
    match(bids_, Side::Sell, order.id, order.owner, remaining, order.price, order.entered_at, result.fills);

  if (remaining > 0 && !immediate_or_cancel) {
    Order resting = order;
    resting.quantity = remaining;
    rest(resting);
    result.rested_quantity = remaining;
  }
  return result;
}

std::vector<Fill> OrderBook::submit_market(Side side, Quantity quantity, SimTime at, OrderId taker_id,
                                           AgentId taker_owner) {
  if (quantity <= 0) throw OrderBookError("market order quantity must be positive");
  std::vector<Fill> fills;
  Quantity remaining = quantity;
  if (side == Side::Buy)
    match(asks_, side, taker_id, taker_owner, remaining, std::nullopt, at, fills);
  else
    match(bids_, side, taker_id, taker_owner, remaining, std::nullopt, at, fills);
  return fills;
}

void OrderBook::erase(std::unordered_map<OrderId, Locator>::iterator loc) {
  auto drop = [&](auto& levels) {
    auto level_it = levels.find(loc->second.price);
    Level& level = level_it->second;
    level.volume -= loc->second.it->quantity;
    level.queue.erase(loc->second.it);
    if (level.queue.empty()) levels.erase(level_it);
  };
  if (loc->second.side == Side::Buy)
    drop(bids_);
  else
    drop(asks_);
  index_.erase(loc);
}

Quantity OrderBook::cancel(OrderId id) {
  auto loc = index_.find(id);
  if (loc == index_.end()) return 0;
  const Quantity open = loc->second.it->quantity;
  erase(loc);
  return open;
}

Quantity OrderBook::partial_cancel(OrderId id, Quantity quantity) {
  if (quantity <= 0) throw OrderBookError("partial cancel quantity must be positive");
  auto loc = index_.find(id);
  if (loc == index_.end()) return 0;
  Order& order = *loc->second.it;
  if (quantity >= order.quantity) {
    const Quantity open = order.quantity;
    erase(loc);
    return open;
  }
  order.quantity -= quantity;
  if (order.side == Side::Buy)
    bids_.find(order.price)->second.volume -= quantity;
  else
    asks_.find(order.price)->second.volume -= quantity;
  return quantity;
}

std::optional<Price> OrderBook::best_bid() const {
  if (bids_.empty()) return std::nullopt;
  return bids_.begin()->first;
}

std::optional<Price> OrderBook::best_ask() const {
  if (asks_.empty()) return std::nullopt;
  return asks_.begin()->first;
}

std::optional<MidPrice> OrderBook::mid_price() const {
  if (bids_.empty() || asks_.empty()) return std::nullopt;
  return MidPrice{bids_.begin()->first + asks_.begin()->first};
}

std::optional<Price> OrderBook::spread() const {
  if (bids_.empty() || asks_.empty()) return std::nullopt;
  return asks_.begin()->first - bids_.begin()->first;
}

Quantity OrderBook::inside_volume(Side side) const {
  if (side == Side::Buy) return bids_.empty() ? 0 : bids_.begin()->second.volume;
  return asks_.empty() ? 0 : asks_.begin()->second.volume;
}

DepthResult OrderBook::depth_within(Side side, double fraction) const {
  auto collect = [&](const auto& levels) {
    if (levels.empty()) throw EmptySideError(std::string("no resting ") + (side == Side::Buy ? "bids" : "asks"));
    const Price limit = band_limit(side, levels.begin()->first, fraction);
    DepthResult out;
    for (const auto& [price, level] : levels) {
      if (side == Side::Sell ? price > limit : price < limit) break;
      out.levels.push_back({price, level.volume});
      out.total_volume += level.volume;
    }
    return out;
  };
  return side == Side::Buy ? collect(bids_) : collect(asks_);
}

L2Snapshot OrderBook::snapshot(std::size_t n_levels) const {
  if (n_levels == 0) throw OrderBookError("snapshot needs at least one level");
  L2Snapshot snap;
  snap.asks.assign(n_levels, LevelVolume{kEmptyAskPrice, 0});
  snap.bids.assign(n_levels, LevelVolume{kEmptyBidPrice, 0});
  std::size_t i = 0;
  for (auto it = asks_.begin(); it != asks_.end() && i < n_levels; ++it, ++i) snap.asks[i] = {it->first, it->second.volume};
  i = 0;
  for (auto it = bids_.begin(); it != bids_.end() && i < n_levels; ++it, ++i) snap.bids[i] = {it->first, it->second.volume};
  return snap;
}

const Order* OrderBook::find(OrderId id) const {
  auto loc = index_.find(id);
  return loc == index_.end() ? nullptr : &*loc->second.it;
}

Quantity OrderBook::total_volume(Side side) const {
  Quantity total = 0;
  if (side == Side::Buy)
    for (const auto& [p, level] : bids_) total += level.volume;
  else
    for (const auto& [p, level] : asks_) total += level.volume;
  return total;
}

std::vector<Order> OrderBook::resting_orders(Side side) const {
  std::vector<Order> out;
  auto gather = [&](const auto& levels) {
    for (const auto& [p, level] : levels) out.insert(out.end(), level.queue.begin(), level.queue.end());
  };
  if (side == Side::Buy)
    gather(bids_);
  else
    gather(asks_);
  return out;
}

}  // namespace marketsim
