#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "marketsim/message.hpp"
#include "marketsim/order_book.hpp"
#include "marketsim/sim_time.hpp"

namespace marketsim::lobster {

enum class EventType : int {
  Submission = 1,
  PartialCancel = 2,
  Deletion = 3,
  VisibleExecution = 4,
  HiddenExecution = 5,
  Cross = 6,
  Halt = 7,
};

/// One row of a LOBSTER message file.
struct Event {
  SimTime time;
  EventType type = EventType::Submission;
  OrderId order_id = 0;
  Quantity size = 0;
  Price price = 0;
  /// 1 = buy, -1 = sell
  int direction = 1;

  Side side() const noexcept { return direction > 0 ? Side::Buy : Side::Sell; }
  friend bool operator==(const Event&, const Event&) = default;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

struct ParseWarning {
  std::size_t line = 0;
  std::string message;
};

/// Parses a message file: six comma-separated columns
/// time,type,order_id,size,price,direction. Blank lines are skipped.
/// Decreasing timestamps are reported through `warnings`, not rejected.
std::vector<Event> parse_messages(std::istream& in, std::vector<ParseWarning>* warnings = nullptr);
std::vector<Event> read_messages(const std::filesystem::path& path, std::vector<ParseWarning>* warnings = nullptr);
void write_messages(std::ostream& out, std::span<const Event> events);

/// Parses an order-book file: 4 x n_levels columns per row in the order
/// ask_price_1,ask_size_1,bid_price_1,bid_size_1,... . Either sign of the
/// 9999999999 placeholder is accepted for a missing level.
std::vector<L2Snapshot> parse_orderbook(std::istream& in);
std::vector<L2Snapshot> read_orderbook(const std::filesystem::path& path);
void write_orderbook_row(std::ostream& out, const L2Snapshot& row);

/// Hands out order ids from a range known to be disjoint from historical ids.
class IdAllocator {
 public:
  explicit IdAllocator(OrderId first) noexcept : next_(first) {}
  OrderId next() noexcept { return next_++; }
  OrderId peek() const noexcept { return next_; }

 private:
  OrderId next_;
};

/// First id past every id appearing in `events` (at least `floor`).
OrderId first_free_id(std::span<const Event> events, OrderId floor = 1);

/// One limit order per occupied level, sized to the level's volume. Submitting
/// them to an empty book reproduces the snapshot. Throws if the snapshot is
/// crossed.
std::vector<Order> reconstruct_opening_book(const L2Snapshot& snapshot, IdAllocator& ids, SimTime at = {},
                                            AgentId owner = 0);

/// Historical event with no effect on the visible book (hidden execution,
/// cross, halt).
struct NoAction {
  EventType type = EventType::HiddenExecution;
  friend bool operator==(const NoAction&, const NoAction&) = default;
};

using ExchangeAction = std::variant<NoAction, LimitOrderSubmit, CancelOrder, PartialCancelOrder>;

/// Submission -> limit order; partial cancel and visible execution -> partial
/// cancel of the executed/cancelled size; deletion -> cancel; others no-op.
ExchangeAction event_to_action(const Event& ev);

/// Applies an action directly to a book (no kernel involved).
void apply_action(OrderBook& book, const ExchangeAction& action, SimTime at, AgentId owner = 0);

struct StreamStats {
  std::size_t total_events = 0;
  std::size_t unique_order_ids = 0;
  std::size_t new_buy_limits = 0;
  std::size_t new_sell_limits = 0;
  double mean_interarrival_new_ms = 0.0;
  std::size_t cancel_count = 0;
  double mean_interarrival_cancel_ms = 0.0;

  std::size_t new_limits() const noexcept { return new_buy_limits + new_sell_limits; }
};

/// Counts and mean interarrival times: new limits are type 1, cancels are
/// types 2 and 3. Mean interarrival is (last - first) / (count - 1).
StreamStats stream_stats(std::span<const Event> events);

/// Poisson event rates per second of simulated time.
struct SyntheticRates {
  double new_limit_per_s = 41'554.0 / 3600.0;
  double cancel_per_s = 38'791.0 / 3600.0;
  double execution_per_s = (86'615.0 - 41'554.0 - 38'791.0) / 3600.0;
  /// Share of executions reported as hidden (type 5).
  double hidden_share = 0.1;
};

struct SyntheticConfig {
  std::uint64_t seed = 1;
  SimTime open = SimTime::from_hms(9, 30, 0);
  Nanos duration = 3600 * kNanosPerSecond;
  SyntheticRates rates;
  Price initial_mid = 1'000'000;  // $100.00
  Price tick = 100;
  std::size_t opening_levels = 10;
  std::size_t snapshot_levels = 10;
  /// New limit orders land uniformly within this many ticks behind the
  /// reference quote.
  std::size_t depth_levels = 50;
  /// Mean and spread of order sizes (shares, multiples of 100).
  Quantity lot = 100;
  std::int64_t max_lots = 10;
  /// Per-event standard deviation of the reference price walk, in ticks.
  double walk_ticks = 0.05;
};

/// A generated message file and the matching order-book file: book_rows[k]
/// is the book after messages[k].
struct SyntheticDay {
  std::vector<Event> messages;
  std::vector<L2Snapshot> book_rows;
};

/// Replay input: the opening book and the events that follow it.
struct ReplayData {
  L2Snapshot opening;
  std::vector<Event> events;
};

/// LOBSTER files describe the book after each message, so the first row is
/// the opening book and the first message is already reflected in it.
ReplayData make_replay_data(std::span<const Event> messages, std::span<const L2Snapshot> book_rows);
ReplayData load_replay_data(const std::filesystem::path& message_file, const std::filesystem::path& orderbook_file);

/// Poisson limit/cancel/execution flow around a random-walk reference price,
/// recorded from an order book maintained alongside so the stream replays
/// without unknown ids.
SyntheticDay generate_synthetic_stream(const SyntheticConfig& config);

}  // namespace marketsim::lobster
