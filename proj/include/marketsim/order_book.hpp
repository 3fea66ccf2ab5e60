#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <list>
#include <map>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "marketsim/sim_time.hpp"
#include "marketsim/types.hpp"

namespace marketsim {

struct Order {
  OrderId id = 0;
  Side side = Side::Buy;
  Price price = 0;
  Quantity quantity = 0;
  SimTime entered_at;
  AgentId owner = 0;
  friend bool operator==(const Order&, const Order&) = default;
};

struct Fill {
  OrderId taker_order_id = 0;
  OrderId maker_order_id = 0;
  Price price = 0;
  Quantity quantity = 0;
  SimTime at;
  Side taker_side = Side::Buy;
  AgentId taker_owner = 0;
  AgentId maker_owner = 0;
  /// Maker's open quantity after this fill.
  Quantity maker_remaining = 0;
  friend bool operator==(const Fill&, const Fill&) = default;
};

struct LimitResult {
  std::vector<Fill> fills;
  Quantity rested_quantity = 0;
};

/// Mid price held exactly as twice its value, so half ticks are representable.
struct MidPrice {
  std::int64_t twice = 0;
  double value() const noexcept { return static_cast<double>(twice) / 2.0; }
  auto operator<=>(const MidPrice&) const = default;
};

struct DepthResult {
  std::vector<LevelVolume> levels;
  Quantity total_volume = 0;
};

/// LOBSTER placeholder values for missing levels.
inline constexpr Price kEmptyAskPrice = 9'999'999'999;
inline constexpr Price kEmptyBidPrice = -9'999'999'999;

/// Top-n levels per side; absent levels carry the LOBSTER sentinel price and
/// zero size.
struct L2Snapshot {
  std::vector<LevelVolume> asks;
  std::vector<LevelVolume> bids;
  std::size_t depth() const noexcept { return asks.size(); }
  friend bool operator==(const L2Snapshot&, const L2Snapshot&) = default;
};

inline bool is_empty_level(const LevelVolume& level) noexcept {
  return level.volume == 0 && (level.price == kEmptyAskPrice || level.price == kEmptyBidPrice);
}

class OrderBookError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown by depth queries against a side with no resting orders.
class EmptySideError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Last price inside the liquidity band of `fraction` around `inside` on
/// `book_side`: asks extend up to inside*(1+fraction), bids down to
/// inside*(1-fraction). Inclusive.
Price band_limit(Side book_side, Price inside, double fraction);

/// Single-instrument limit order book with price/time priority. Prices are
/// integers throughout; market orders never rest.
class OrderBook {
 public:
  LimitResult submit_limit(const Order& order, bool immediate_or_cancel = false);
  std::vector<Fill> submit_market(Side side, Quantity quantity, SimTime at = {}, OrderId taker_id = 0,
                                  AgentId taker_owner = 0);

  /// Removes a resting order; returns its open quantity, or 0 if unknown.
  Quantity cancel(OrderId id);
  /// Reduces open quantity by min(quantity, open) without losing queue
  /// position; removes the order when nothing remains.
  Quantity partial_cancel(OrderId id, Quantity quantity);

  std::optional<Price> best_bid() const;
  std::optional<Price> best_ask() const;
  std::optional<MidPrice> mid_price() const;
  std::optional<Price> spread() const;
  /// Aggregate volume at the inside level of `side`, 0 if empty.
  Quantity inside_volume(Side side) const;

  DepthResult depth_within(Side side, double fraction) const;
  L2Snapshot snapshot(std::size_t n_levels) const;

  bool contains(OrderId id) const { return index_.contains(id); }
  const Order* find(OrderId id) const;
  std::size_t order_count() const noexcept { return index_.size(); }
  std::size_t level_count(Side side) const noexcept { return side == Side::Buy ? bids_.size() : asks_.size(); }
  Quantity total_volume(Side side) const;
  /// Resting orders of one side in priority order.
  std::vector<Order> resting_orders(Side side) const;

 private:
  struct Level {
    std::list<Order> queue;
    Quantity volume = 0;
  };
  using BidLevels = std::map<Price, Level, std::greater<>>;
  using AskLevels = std::map<Price, Level, std::less<>>;
  struct Locator {
    Side side;
    Price price;
    std::list<Order>::iterator it;
  };

  template <class Levels>
  void match(Levels& levels, Side taker_side, OrderId taker_id, AgentId taker_owner, Quantity& remaining,
             std::optional<Price> limit, SimTime at, std::vector<Fill>& fills);
  void rest(const Order& order);
  void erase(std::unordered_map<OrderId, Locator>::iterator loc);

  BidLevels bids_;
  AskLevels asks_;
  std::unordered_map<OrderId, Locator> index_;
};

}  // namespace marketsim
