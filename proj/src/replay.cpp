#include "marketsim/replay.hpp"

#include <algorithm>
#include <stdexcept>

namespace marketsim {

ReplayAgent::ReplayAgent(AgentId id, AgentId exchange, std::shared_ptr<const lobster::ReplayData> data,
                         SimTime market_open)
    : Agent(id),
      exchange_(exchange),
      data_(std::move(data)),
      market_open_(market_open),
      ids_(data_ ? lobster::first_free_id(data_->events) : 1) {
  if (!data_) throw std::invalid_argument("replay agent needs an opening snapshot and event stream");
}

void ReplayAgent::open(Kernel& kernel) {
  opened_ = true;
  for (const Order& order : lobster::reconstruct_opening_book(data_->opening, ids_, kernel.now(), id())) {
    kernel.send(id(), exchange_, LimitOrderSubmit{order.id, order.side, order.price, order.quantity, false});
    ++opening_sent_;
  }
}

void ReplayAgent::on_wakeup(Kernel& kernel, SimTime now) {
  const auto& events = data_->events;
  if (!started_) {
    started_ = true;
    while (cursor_ < events.size() && events[cursor_].time < market_open_) {
      ++cursor_;
      ++skipped_;
    }
    const SimTime first = cursor_ < events.size() ? std::max(events[cursor_].time, now) : std::max(market_open_, now);
    kernel.wakeup_at(id(), first);
    return;
  }

  if (!opened_) open(kernel);

  while (cursor_ < events.size() && events[cursor_].time <= now) {
    const lobster::Event& ev = events[cursor_++];
    std::visit(
        [&](const auto& action) {
          using T = std::decay_t<decltype(action)>;
          if constexpr (std::is_same_v<T, lobster::NoAction>)
            ++noops_[static_cast<std::size_t>(action.type)];
          else
            kernel.send(id(), exchange_, action);
        },
        lobster::event_to_action(ev));
    ++events_sent_;
  }
  if (cursor_ < events.size()) kernel.wakeup_at(id(), events[cursor_].time);
}

StreamRecorder::StreamRecorder(SimTime start, std::size_t levels) : levels_(levels) {
  if (levels == 0) throw std::invalid_argument("recorder needs at least one level");
  emit(lobster::Event{start, lobster::EventType::Cross, 0, 0, 0, 1});
}

void StreamRecorder::emit(const lobster::Event& ev) {
  lobster::apply_action(shadow_, lobster::event_to_action(ev), ev.time);
  messages_.push_back(ev);
  rows_.push_back(shadow_.snapshot(levels_));
}

void StreamRecorder::attach(ExchangeAgent& exchange) {
  exchange.set_action_observer([this](const HandledAction& a, const OrderBook& book) { record(a, book); });
}

void StreamRecorder::record(const HandledAction& action, const OrderBook& book) {
  using lobster::Event;
  using lobster::EventType;
  auto direction = [](Side s) { return s == Side::Buy ? 1 : -1; };

  for (const Fill& f : action.fills)
    emit(Event{action.at, EventType::VisibleExecution, f.maker_order_id, f.quantity, f.price,
               direction(opposite(f.taker_side))});

  if (const auto* lim = std::get_if<LimitOrderSubmit>(&action.request)) {
    if (action.rested > 0)
      emit(Event{action.at, EventType::Submission, lim->order_id, action.rested, lim->price, direction(lim->side)});
  } else if (action.cancelled > 0) {
    const OrderId id = std::holds_alternative<CancelOrder>(action.request)
                           ? std::get<CancelOrder>(action.request).order_id
                           : std::get<PartialCancelOrder>(action.request).order_id;
    const Order* order = shadow_.find(id);
    if (!order) {
      ++divergences_;
      return;
    }
    const EventType type = order->quantity == action.cancelled ? EventType::Deletion : EventType::PartialCancel;
    emit(Event{action.at, type, id, action.cancelled, order->price, direction(order->side)});
  }

  const auto mine = shadow_.resting_orders(Side::Buy);
  const auto theirs = book.resting_orders(Side::Buy);
  const auto mine_s = shadow_.resting_orders(Side::Sell);
  const auto theirs_s = book.resting_orders(Side::Sell);
  auto same = [](const std::vector<Order>& a, const std::vector<Order>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (a[i].id != b[i].id || a[i].price != b[i].price || a[i].quantity != b[i].quantity) return false;
    return true;
  };
  if (!same(mine, theirs) || !same(mine_s, theirs_s)) ++divergences_;
}

}  // namespace marketsim
