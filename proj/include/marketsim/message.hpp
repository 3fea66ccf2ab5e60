#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "marketsim/sim_time.hpp"
#include "marketsim/types.hpp"

namespace marketsim {

// Agent-to-exchange requests.

struct LimitOrderSubmit {
  OrderId order_id = 0;
  Side side = Side::Buy;
  Price price = 0;
  Quantity quantity = 0;
  /// Unfilled remainder is discarded instead of resting.
  bool immediate_or_cancel = false;
  friend bool operator==(const LimitOrderSubmit&, const LimitOrderSubmit&) = default;
};

struct MarketOrderSubmit {
  OrderId order_id = 0;
  Side side = Side::Buy;
  Quantity quantity = 0;
  friend bool operator==(const MarketOrderSubmit&, const MarketOrderSubmit&) = default;
};

struct CancelOrder {
  OrderId order_id = 0;
  friend bool operator==(const CancelOrder&, const CancelOrder&) = default;
};

struct PartialCancelOrder {
  OrderId order_id = 0;
  Quantity quantity = 0;
  friend bool operator==(const PartialCancelOrder&, const PartialCancelOrder&) = default;
};

/// Liquidity within `fraction` of the inside quote on `side` of the book.
struct QueryDepth {
  Side side = Side::Sell;
  double fraction = 0.01;
  friend bool operator==(const QueryDepth&, const QueryDepth&) = default;
};

struct QuerySpread {
  friend bool operator==(const QuerySpread&, const QuerySpread&) = default;
};

// Exchange-to-agent replies and notifications.

struct DepthReply {
  Side side = Side::Sell;
  bool side_empty = true;
  std::vector<LevelVolume> levels;
  Quantity total_volume = 0;
  friend bool operator==(const DepthReply&, const DepthReply&) = default;
};

struct SpreadReply {
  std::optional<Price> best_bid;
  std::optional<Price> best_ask;
  Quantity bid_size = 0;
  Quantity ask_size = 0;
  friend bool operator==(const SpreadReply&, const SpreadReply&) = default;
};

struct OrderAccepted {
  OrderId order_id = 0;
  Quantity rested = 0;
  friend bool operator==(const OrderAccepted&, const OrderAccepted&) = default;
};

struct OrderExecuted {
  OrderId order_id = 0;
  Side side = Side::Buy;
  Price price = 0;
  Quantity quantity = 0;
  /// Open quantity left on the order after this fill.
  Quantity remaining = 0;
  friend bool operator==(const OrderExecuted&, const OrderExecuted&) = default;
};

struct OrderCancelled {
  OrderId order_id = 0;
  Quantity quantity = 0;
  friend bool operator==(const OrderCancelled&, const OrderCancelled&) = default;
};

struct Wakeup {
  friend bool operator==(const Wakeup&, const Wakeup&) = default;
};

using Payload = std::variant<LimitOrderSubmit, MarketOrderSubmit, CancelOrder, PartialCancelOrder, QueryDepth,
                             DepthReply, QuerySpread, SpreadReply, OrderAccepted, OrderExecuted, OrderCancelled,
                             Wakeup>;

struct Message {
  AgentId sender = 0;
  AgentId recipient = 0;
  SimTime sent_at;
  SimTime deliver_at;
  Payload payload;
  friend bool operator==(const Message&, const Message&) = default;
};

std::string_view payload_kind(const Payload& payload);

/// Semicolon-separated key=value rendering of the payload's fields; empty for
/// payloads without fields. Used by the simulation log CSV.
std::string payload_fields(const Payload& payload);

}  // namespace marketsim
