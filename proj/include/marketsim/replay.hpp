#pragma once

#include <array>
#include <memory>

#include "marketsim/exchange.hpp"
#include "marketsim/kernel.hpp"
#include "marketsim/lobster.hpp"

namespace marketsim {

/// Plays historical order flow into the exchange. At the first event time at
/// or after market open it submits the reconstructed opening book, then every
/// event is sent when simulated time reaches its timestamp. It never looks at
/// market state.
class ReplayAgent : public Agent {
 public:
  ReplayAgent(AgentId id, AgentId exchange, std::shared_ptr<const lobster::ReplayData> data, SimTime market_open);

  void on_wakeup(Kernel& kernel, SimTime now) override;

  std::size_t opening_orders_sent() const noexcept { return opening_sent_; }
  std::size_t events_sent() const noexcept { return events_sent_; }
  /// Events before market open that were skipped.
  std::size_t events_skipped() const noexcept { return skipped_; }
  /// Historical events with no book action, indexed by LOBSTER event type.
  const std::array<std::size_t, 8>& noop_counts() const noexcept { return noops_; }
  bool finished() const noexcept { return cursor_ >= data_->events.size(); }

 private:
  void open(Kernel& kernel);

  AgentId exchange_;
  std::shared_ptr<const lobster::ReplayData> data_;
  SimTime market_open_;
  lobster::IdAllocator ids_;
  std::size_t cursor_ = 0;
  bool started_ = false;
  bool opened_ = false;
  std::size_t opening_sent_ = 0;
  std::size_t events_sent_ = 0;
  std::size_t skipped_ = 0;
  std::array<std::size_t, 8> noops_{};
};

/// Writes the order actions of a live exchange as a LOBSTER message stream
/// with matching order-book rows: fills become visible executions of the
/// maker, resting remainders become submissions, and cancels become deletions
/// or partial cancellations. The first message is an empty-book cross at
/// `start`, so make_replay_data yields an empty opening book.
class StreamRecorder {
 public:
  StreamRecorder(SimTime start, std::size_t levels);

  void record(const HandledAction& action, const OrderBook& book);
  void attach(ExchangeAgent& exchange);

  const std::vector<lobster::Event>& messages() const noexcept { return messages_; }
  const std::vector<L2Snapshot>& book_rows() const noexcept { return rows_; }
  /// Actions after which the rebuilt book disagreed with the exchange's.
  std::size_t divergences() const noexcept { return divergences_; }

 private:
  void emit(const lobster::Event& ev);

  std::size_t levels_;
  OrderBook shadow_;
  std::vector<lobster::Event> messages_;
  std::vector<L2Snapshot> rows_;
  std::size_t divergences_ = 0;
};

}  // namespace marketsim
