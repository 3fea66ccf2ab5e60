#include "marketsim/exchange.hpp"

#include <algorithm>

namespace marketsim {

namespace {

bool is_submission(const Payload& p) {
  return std::holds_alternative<LimitOrderSubmit>(p) || std::holds_alternative<MarketOrderSubmit>(p);
}

Quantity submission_quantity(const Payload& p) {
  if (const auto* lim = std::get_if<LimitOrderSubmit>(&p)) return lim->quantity;
  return std::get<MarketOrderSubmit>(p).quantity;
}

}  // namespace

void ExchangeAgent::on_wakeup(Kernel& kernel, SimTime now) {
  if (observer_) observer_(now, book_);
  if (flush_scheduled_) {
    flush(kernel);
    return;
  }
  record_quote(now);
}

void ExchangeAgent::on_message(Kernel& kernel, const Message& msg) {
  if (observer_) observer_(msg.deliver_at, book_);
  if (options_.size_priority_ties && is_submission(msg.payload)) {
    pending_.push_back(msg);
    if (!flush_scheduled_) {
      kernel.wakeup_at(id(), kernel.now());
      flush_scheduled_ = true;
    }
    return;
  }
  flush(kernel);
  handle(kernel, msg);
}

void ExchangeAgent::flush(Kernel& kernel) {
  flush_scheduled_ = false;
  if (pending_.empty()) return;
  std::vector<Message> batch;
  batch.swap(pending_);
  std::stable_sort(batch.begin(), batch.end(), [](const Message& a, const Message& b) {
    return submission_quantity(a.payload) > submission_quantity(b.payload);
  });
  for (const Message& m : batch) handle(kernel, m);
}

void ExchangeAgent::notify(Kernel& kernel, AgentId recipient, Payload payload) {
  if (recipient == id() || muted_.contains(recipient)) return;
  kernel.send(id(), recipient, std::move(payload));
}

void ExchangeAgent::report_fills(Kernel& kernel, const std::vector<Fill>& fills, Quantity taker_quantity) {
  Quantity taker_remaining = taker_quantity;
  for (const Fill& f : fills) {
    taker_remaining -= f.quantity;
    ++fill_count_;
    traded_volume_ += f.quantity;
    notify(kernel, f.taker_owner, OrderExecuted{f.taker_order_id, f.taker_side, f.price, f.quantity, taker_remaining});
    notify(kernel, f.maker_owner,
           OrderExecuted{f.maker_order_id, opposite(f.taker_side), f.price, f.quantity, f.maker_remaining});
  }
}

void ExchangeAgent::handle(Kernel& kernel, const Message& msg) {
  const SimTime now = kernel.now();
  HandledAction action{now, msg.sender, msg.payload, {}, 0, 0};
  bool order_action = true;
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, LimitOrderSubmit>) {
          LimitResult result =
              book_.submit_limit(Order{p.order_id, p.side, p.price, p.quantity, now, msg.sender}, p.immediate_or_cancel);
          action.fills = std::move(result.fills);
          action.rested = result.rested_quantity;
          report_fills(kernel, action.fills, p.quantity);
          notify(kernel, msg.sender, OrderAccepted{p.order_id, result.rested_quantity});
        } else if constexpr (std::is_same_v<T, MarketOrderSubmit>) {
          action.fills = book_.submit_market(p.side, p.quantity, now, p.order_id, msg.sender);
          report_fills(kernel, action.fills, p.quantity);
          notify(kernel, msg.sender, OrderAccepted{p.order_id, 0});
        } else if constexpr (std::is_same_v<T, CancelOrder>) {
          action.cancelled = book_.cancel(p.order_id);
          notify(kernel, msg.sender, OrderCancelled{p.order_id, action.cancelled});
        } else if constexpr (std::is_same_v<T, PartialCancelOrder>) {
          action.cancelled = book_.partial_cancel(p.order_id, p.quantity);
          notify(kernel, msg.sender, OrderCancelled{p.order_id, action.cancelled});
        } else if constexpr (std::is_same_v<T, QueryDepth>) {
          order_action = false;
          DepthReply reply;
          reply.side = p.side;
          try {
            DepthResult depth = book_.depth_within(p.side, p.fraction);
            reply.side_empty = false;
            reply.levels = std::move(depth.levels);
            reply.total_volume = depth.total_volume;
          } catch (const EmptySideError&) {
            reply.side_empty = true;
          }
          notify(kernel, msg.sender, std::move(reply));
        } else if constexpr (std::is_same_v<T, QuerySpread>) {
          order_action = false;
          notify(kernel, msg.sender,
                 SpreadReply{book_.best_bid(), book_.best_ask(), book_.inside_volume(Side::Buy),
                             book_.inside_volume(Side::Sell)});
        } else {
          // Replies and notifications addressed to the exchange are ignored.
          order_action = false;
        }
      },
      msg.payload);
  if (order_action) {
    ++order_actions_;
    if (action_observer_) action_observer_(action, book_);
  }
  record_quote(now);
}

void ExchangeAgent::record_quote(SimTime now) {
  const auto bid = book_.best_bid();
  const auto ask = book_.best_ask();
  if (!quotes_.empty() && quotes_.back().bid == bid && quotes_.back().ask == ask) return;
  quotes_.push_back(QuoteUpdate{now, bid, ask});
}

}  // namespace marketsim
