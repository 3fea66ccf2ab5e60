#pragma once

#include <functional>
#include <optional>
#include <unordered_set>
#include <vector>

#include "marketsim/kernel.hpp"
#include "marketsim/order_book.hpp"

namespace marketsim {

/// Inside quotes immediately after a book change.
struct QuoteUpdate {
  SimTime at;
  std::optional<Price> bid;
  std::optional<Price> ask;

  std::optional<MidPrice> mid() const {
    if (!bid || !ask) return std::nullopt;
    return MidPrice{*bid + *ask};
  }
  friend bool operator==(const QuoteUpdate&, const QuoteUpdate&) = default;
};

/// Outcome of one order action handled by the exchange.
struct HandledAction {
  SimTime at;
  AgentId sender = 0;
  /// The submission, cancel or partial cancel as delivered.
  Payload request;
  std::vector<Fill> fills;
  /// Quantity left resting by a limit submission.
  Quantity rested = 0;
  /// Quantity removed by a cancel or partial cancel.
  Quantity cancelled = 0;
};

/// The exchange: owns the order book, answers queries, and notifies order
/// owners of executions and cancellations.
///
/// With size_priority_ties enabled, submissions that arrive at the same
/// timestamp are buffered and executed largest quantity first (insertion
/// order among equal sizes). Any non-submission message flushes the buffer
/// before it is handled, so cancels and queries still observe every earlier
/// submission.
class ExchangeAgent : public Agent {
 public:
  struct Options {
    bool size_priority_ties = true;
  };
  using Observer = std::function<void(SimTime, const OrderBook&)>;
  using ActionObserver = std::function<void(const HandledAction&, const OrderBook&)>;

  explicit ExchangeAgent(AgentId id) : ExchangeAgent(id, Options{}) {}
  ExchangeAgent(AgentId id, Options options) : Agent(id), options_(options) {}

  void on_wakeup(Kernel& kernel, SimTime now) override;
  void on_message(Kernel& kernel, const Message& msg) override;

  const OrderBook& book() const noexcept { return book_; }
  /// Quote history; the first entry is the state at the exchange's first wakeup.
  const std::vector<QuoteUpdate>& quotes() const noexcept { return quotes_; }
  std::size_t fill_count() const noexcept { return fill_count_; }
  Quantity traded_volume() const noexcept { return traded_volume_; }
  /// Order submissions, cancels and partial cancels handled so far.
  std::size_t order_actions() const noexcept { return order_actions_; }

  /// Suppress notifications addressed to `agent` (e.g. a replay agent that
  /// never reads them).
  void mute_notifications(AgentId agent) { muted_.insert(agent); }
  /// Called with the book as it stands before each delivered message.
  void set_pre_message_observer(Observer observer) { observer_ = std::move(observer); }
  /// Called after every order action with the book as it stands afterwards.
  void set_action_observer(ActionObserver observer) { action_observer_ = std::move(observer); }

 private:
  void handle(Kernel& kernel, const Message& msg);
  void flush(Kernel& kernel);
  void notify(Kernel& kernel, AgentId recipient, Payload payload);
  void report_fills(Kernel& kernel, const std::vector<Fill>& fills, Quantity taker_quantity);
  void record_quote(SimTime now);

  Options options_;
  OrderBook book_;
  std::vector<QuoteUpdate> quotes_;
  std::vector<Message> pending_;
  bool flush_scheduled_ = false;
  std::unordered_set<AgentId> muted_;
  Observer observer_;
  ActionObserver action_observer_;
  std::size_t fill_count_ = 0;
  Quantity traded_volume_ = 0;
  std::size_t order_actions_ = 0;
};

}  // namespace marketsim
