#include "marketsim/lobster.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

#include "marketsim/random.hpp"

namespace marketsim::lobster {

namespace {

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

template <class Int>
Int parse_field(std::string_view field, std::size_t line, const char* name) {
  while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
  while (!field.empty() && (field.back() == ' ' || field.back() == '\r' || field.back() == '\t')) field.remove_suffix(1);
  Int value{};
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty())
    throw ParseError(line, std::string("invalid ") + name + " '" + std::string(field) + "'");
  return value;
}

bool blank(std::string_view line) { return line.find_first_not_of(" \t\r") == std::string_view::npos; }

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return in;
}

}  // namespace

std::vector<Event> parse_messages(std::istream& in, std::vector<ParseWarning>* warnings) {
  std::vector<Event> events;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const auto fields = split_csv(line);
    if (fields.size() != 6)
      throw ParseError(line_no, "expected 6 columns, found " + std::to_string(fields.size()));

    Event ev;
    try {
      ev.time = parse_decimal_seconds(fields[0]);
    } catch (const TimeError& e) {
      throw ParseError(line_no, e.what());
    }
    const int type = parse_field<int>(fields[1], line_no, "event type");
    if (type < 1 || type > 7) throw ParseError(line_no, "event type out of range: " + std::to_string(type));
    ev.type = static_cast<EventType>(type);
    ev.order_id = parse_field<OrderId>(fields[2], line_no, "order id");
    ev.size = parse_field<Quantity>(fields[3], line_no, "size");
    ev.price = parse_field<Price>(fields[4], line_no, "price");
    ev.direction = parse_field<int>(fields[5], line_no, "direction");
    if (ev.direction != 1 && ev.direction != -1)
      throw ParseError(line_no, "direction must be 1 or -1, found " + std::to_string(ev.direction));
    if (ev.size < 0 || (type <= 4 && ev.size == 0)) throw ParseError(line_no, "size must be positive");
    if (ev.type == EventType::Submission && ev.price <= 0) throw ParseError(line_no, "submission price must be positive");

    if (!events.empty() && ev.time < events.back().time && warnings)
      warnings->push_back({line_no, "timestamp decreases from " + format_decimal_seconds(events.back().time) + " to " +
                                        format_decimal_seconds(ev.time)});
    events.push_back(ev);
  }
  return events;
}

std::vector<Event> read_messages(const std::filesystem::path& path, std::vector<ParseWarning>* warnings) {
  auto in = open_input(path);
  return parse_messages(in, warnings);
}

void write_messages(std::ostream& out, std::span<const Event> events) {
  for (const Event& ev : events)
    out << format_decimal_seconds(ev.time) << ',' << static_cast<int>(ev.type) << ',' << ev.order_id << ',' << ev.size
        << ',' << ev.price << ',' << ev.direction << '\n';
}

std::vector<L2Snapshot> parse_orderbook(std::istream& in) {
  std::vector<L2Snapshot> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const auto fields = split_csv(line);
    if (fields.size() % 4 != 0 || fields.empty())
      throw ParseError(line_no, "order-book row needs a multiple of 4 columns, found " + std::to_string(fields.size()));
    if (!rows.empty() && fields.size() / 4 != rows.front().depth())
      throw ParseError(line_no, "inconsistent number of levels");
    L2Snapshot row;
    for (std::size_t i = 0; i < fields.size(); i += 4) {
      LevelVolume ask{parse_field<Price>(fields[i], line_no, "ask price"),
                      parse_field<Quantity>(fields[i + 1], line_no, "ask size")};
      LevelVolume bid{parse_field<Price>(fields[i + 2], line_no, "bid price"),
                      parse_field<Quantity>(fields[i + 3], line_no, "bid size")};
      // Normalize either placeholder sign to the canonical one per side.
      if (ask.volume == 0 && std::llabs(ask.price) == kEmptyAskPrice) ask.price = kEmptyAskPrice;
      if (bid.volume == 0 && std::llabs(bid.price) == kEmptyAskPrice) bid.price = kEmptyBidPrice;
      row.asks.push_back(ask);
      row.bids.push_back(bid);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<L2Snapshot> read_orderbook(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_orderbook(in);
}

void write_orderbook_row(std::ostream& out, const L2Snapshot& row) {
  for (std::size_t i = 0; i < row.depth(); ++i) {
    if (i) out << ',';
    out << row.asks[i].price << ',' << row.asks[i].volume << ',' << row.bids[i].price << ',' << row.bids[i].volume;
  }
  out << '\n';
}

OrderId first_free_id(std::span<const Event> events, OrderId floor) {
  OrderId next = floor;
  for (const Event& ev : events) next = std::max(next, ev.order_id + 1);
  return next;
}

std::vector<Order> reconstruct_opening_book(const L2Snapshot& snapshot, IdAllocator& ids, SimTime at, AgentId owner) {
  std::optional<Price> best_ask;
  std::optional<Price> best_bid;
  for (const auto& level : snapshot.asks)
    if (!is_empty_level(level)) best_ask = best_ask ? std::min(*best_ask, level.price) : level.price;
  for (const auto& level : snapshot.bids)
    if (!is_empty_level(level)) best_bid = best_bid ? std::max(*best_bid, level.price) : level.price;
  if (best_ask && best_bid && *best_bid >= *best_ask)
    throw std::invalid_argument("crossed opening snapshot: bid " + std::to_string(*best_bid) +
                                " >= ask " + std::to_string(*best_ask));

  std::vector<Order> orders;
  for (const auto& level : snapshot.asks)
    if (!is_empty_level(level)) orders.push_back(Order{ids.next(), Side::Sell, level.price, level.volume, at, owner});
  for (const auto& level : snapshot.bids)
    if (!is_empty_level(level)) orders.push_back(Order{ids.next(), Side::Buy, level.price, level.volume, at, owner});
  return orders;
}

ExchangeAction event_to_action(const Event& ev) {
  switch (ev.type) {
    case EventType::Submission:
      return LimitOrderSubmit{ev.order_id, ev.side(), ev.price, ev.size, false};
    case EventType::PartialCancel:
    case EventType::VisibleExecution:
      return PartialCancelOrder{ev.order_id, ev.size};
    case EventType::Deletion:
      return CancelOrder{ev.order_id};
    case EventType::HiddenExecution:
    case EventType::Cross:
    case EventType::Halt:
      break;
  }
  return NoAction{ev.type};
}

void apply_action(OrderBook& book, const ExchangeAction& action, SimTime at, AgentId owner) {
  std::visit(
      [&](const auto& a) {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, LimitOrderSubmit>)
          book.submit_limit(Order{a.order_id, a.side, a.price, a.quantity, at, owner}, a.immediate_or_cancel);
        else if constexpr (std::is_same_v<T, CancelOrder>)
          book.cancel(a.order_id);
        else if constexpr (std::is_same_v<T, PartialCancelOrder>)
          book.partial_cancel(a.order_id, a.quantity);
      },
      action);
}

StreamStats stream_stats(std::span<const Event> events) {
  StreamStats stats;
  stats.total_events = events.size();
  std::unordered_set<OrderId> ids;
  std::optional<SimTime> first_new, last_new, first_cancel, last_cancel;
  for (const Event& ev : events) {
    ids.insert(ev.order_id);
    if (ev.type == EventType::Submission) {
      (ev.direction > 0 ? stats.new_buy_limits : stats.new_sell_limits)++;
      if (!first_new) first_new = ev.time;
      last_new = ev.time;
    } else if (ev.type == EventType::PartialCancel || ev.type == EventType::Deletion) {
      ++stats.cancel_count;
      if (!first_cancel) first_cancel = ev.time;
      last_cancel = ev.time;
    }
  }
  stats.unique_order_ids = ids.size();
  auto mean_gap_ms = [](std::optional<SimTime> first, std::optional<SimTime> last, std::size_t n) {
    if (n < 2) return 0.0;
    return static_cast<double>(*last - *first) / static_cast<double>(n - 1) / static_cast<double>(kNanosPerMilli);
  };
  stats.mean_interarrival_new_ms = mean_gap_ms(first_new, last_new, stats.new_limits());
  stats.mean_interarrival_cancel_ms = mean_gap_ms(first_cancel, last_cancel, stats.cancel_count);
  return stats;
}

ReplayData make_replay_data(std::span<const Event> messages, std::span<const L2Snapshot> book_rows) {
  if (book_rows.empty()) throw std::invalid_argument("order-book file has no rows; opening book unavailable");
  ReplayData data;
  data.opening = book_rows.front();
  if (!messages.empty()) data.events.assign(messages.begin() + 1, messages.end());
  return data;
}

ReplayData load_replay_data(const std::filesystem::path& message_file, const std::filesystem::path& orderbook_file) {
  const auto messages = read_messages(message_file);
  const auto rows = read_orderbook(orderbook_file);
  return make_replay_data(messages, rows);
}

namespace {

/// Order book plus a random-access list of live ids, so the generator can
/// pick cancellation targets uniformly.
class GeneratorBook {
 public:
  OrderBook book;

  void track(OrderId id) {
    slot_[id] = live_.size();
    live_.push_back(id);
  }
  void sync(OrderId id) {
    if (book.contains(id)) return;
    auto it = slot_.find(id);
    if (it == slot_.end()) return;
    const std::size_t pos = it->second;
    live_[pos] = live_.back();
    slot_[live_[pos]] = pos;
    live_.pop_back();
    slot_.erase(it);
  }
  std::size_t size() const noexcept { return live_.size(); }
  OrderId at(std::size_t i) const { return live_[i]; }

 private:
  std::vector<OrderId> live_;
  std::unordered_map<OrderId, std::size_t> slot_;
};

}  // namespace

SyntheticDay generate_synthetic_stream(const SyntheticConfig& cfg) {
  const double total_rate = cfg.rates.new_limit_per_s + cfg.rates.cancel_per_s + cfg.rates.execution_per_s;
  if (!(cfg.rates.new_limit_per_s > 0 && cfg.rates.cancel_per_s > 0 && cfg.rates.execution_per_s > 0))
    throw std::invalid_argument("synthetic rates must be positive");
  if (cfg.tick <= 0 || cfg.lot <= 0 || cfg.max_lots < 1 || cfg.snapshot_levels == 0 || cfg.depth_levels == 0)
    throw std::invalid_argument("invalid synthetic book parameters");

  RandomStream rng(cfg.seed, kExperimentStreamKey);
  GeneratorBook gen;
  SyntheticDay day;
  OrderId next_id = 1;
  // Resting-order count the cancellation mix steers toward.
  const double target_orders = 20.0 * static_cast<double>(cfg.depth_levels);

  auto emit = [&](const Event& ev) {
    apply_action(gen.book, event_to_action(ev), ev.time);
    if (ev.type == EventType::Submission) gen.track(ev.order_id);
    gen.sync(ev.order_id);
    day.messages.push_back(ev);
    day.book_rows.push_back(gen.book.snapshot(cfg.snapshot_levels));
  };
  auto random_size = [&] { return cfg.lot * rng.uniform_int(1, cfg.max_lots); };

  // Opening auction print, then the opening ladder built from fresh orders.
  emit(Event{cfg.open, EventType::Cross, 0, 0, cfg.initial_mid, 1});
  const Price anchor = cfg.initial_mid / cfg.tick * cfg.tick;
  for (std::size_t level = 0; level < cfg.opening_levels; ++level) {
    const Price offset = static_cast<Price>(level + 1) * cfg.tick;
    for (int side = 0; side < 2; ++side) {
      const std::int64_t count = rng.uniform_int(1, 3);
      for (std::int64_t k = 0; k < count; ++k)
        emit(Event{cfg.open, EventType::Submission, next_id++, random_size(), side == 0 ? anchor + offset : anchor - offset,
                   side == 0 ? -1 : 1});
    }
  }

  double reference = static_cast<double>(anchor) / static_cast<double>(cfg.tick);  // in ticks
  const SimTime end = cfg.open + cfg.duration;
  SimTime now = cfg.open;
  while (true) {
    now += static_cast<Nanos>(std::llround(rng.exponential(total_rate) * kNanosPerSecond));
    if (now > end) break;

    reference += rng.normal(0.0, cfg.walk_ticks);
    if (auto mid = gen.book.mid_price())
      reference += 0.05 * (mid->value() / static_cast<double>(cfg.tick) - reference);

    const double pick = rng.uniform() * total_rate;
    if (pick < cfg.rates.new_limit_per_s) {
      const bool buy = rng.coin();
      const auto depth = static_cast<Price>(rng.uniform_int(0, static_cast<std::int64_t>(cfg.depth_levels) - 1));
      const Quantity size = random_size();
      Price price;
      if (buy) {
        price = static_cast<Price>(std::floor(reference - 1.0)) * cfg.tick - depth * cfg.tick;
        if (auto ask = gen.book.best_ask()) price = std::min(price, *ask - cfg.tick);
      } else {
        price = static_cast<Price>(std::ceil(reference + 1.0)) * cfg.tick + depth * cfg.tick;
        if (auto bid = gen.book.best_bid()) price = std::max(price, *bid + cfg.tick);
      }
      if (price <= 0) continue;
      emit(Event{now, EventType::Submission, next_id++, size, price, buy ? 1 : -1});
    } else if (pick < cfg.rates.new_limit_per_s + cfg.rates.cancel_per_s) {
      if (gen.size() == 0) continue;
      const OrderId id = gen.at(static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(gen.size()) - 1)));
      const Order& order = *gen.book.find(id);
      const bool full = rng.uniform() < static_cast<double>(gen.size()) / target_orders || order.quantity == 1;
      const Quantity size =
          full ? order.quantity
               : std::max<Quantity>(1, static_cast<Quantity>(static_cast<double>(order.quantity) * rng.uniform(0.1, 0.5)));
      emit(Event{now, full ? EventType::Deletion : EventType::PartialCancel, id, size, order.price,
                 order.side == Side::Buy ? 1 : -1});
    } else {
      const Side hit = rng.coin() ? Side::Buy : Side::Sell;  // resting side that trades
      const bool hidden = rng.uniform() < cfg.rates.hidden_share;
      const auto best = hit == Side::Buy ? gen.book.best_bid() : gen.book.best_ask();
      if (!best) continue;
      const int direction = hit == Side::Buy ? 1 : -1;
      if (hidden) {
        emit(Event{now, EventType::HiddenExecution, next_id++, random_size(), *best, direction});
        continue;
      }
      const Order front = gen.book.resting_orders(hit).front();
      const Quantity size =
          rng.uniform() < 0.6 || front.quantity == 1 ? front.quantity : rng.uniform_int(1, front.quantity - 1);
      emit(Event{now, EventType::VisibleExecution, front.id, size, front.price, direction});
    }
  }
  return day;
}

}  // namespace marketsim::lobster
