#include "marketsim/message.hpp"

#include <sstream>

namespace marketsim {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

std::string price_or_dash(const std::optional<Price>& p) { return p ? std::to_string(*p) : "-"; }

}  // namespace

std::string_view payload_kind(const Payload& payload) {
  return std::visit(Overloaded{
                        [](const LimitOrderSubmit&) { return std::string_view("LimitOrderSubmit"); },
                        [](const MarketOrderSubmit&) { return std::string_view("MarketOrderSubmit"); },
                        [](const CancelOrder&) { return std::string_view("CancelOrder"); },
                        [](const PartialCancelOrder&) { return std::string_view("PartialCancelOrder"); },
                        [](const QueryDepth&) { return std::string_view("QueryDepth"); },
                        [](const DepthReply&) { return std::string_view("DepthReply"); },
                        [](const QuerySpread&) { return std::string_view("QuerySpread"); },
                        [](const SpreadReply&) { return std::string_view("SpreadReply"); },
                        [](const OrderAccepted&) { return std::string_view("OrderAccepted"); },
                        [](const OrderExecuted&) { return std::string_view("OrderExecuted"); },
                        [](const OrderCancelled&) { return std::string_view("OrderCancelled"); },
                        [](const Wakeup&) { return std::string_view("Wakeup"); },
                    },
                    payload);
}

std::string payload_fields(const Payload& payload) {
  std::ostringstream out;
  std::visit(Overloaded{
                 [&](const LimitOrderSubmit& p) {
                   out << "id=" << p.order_id << ";side=" << to_string(p.side) << ";price=" << p.price
                       << ";qty=" << p.quantity << ";ioc=" << (p.immediate_or_cancel ? 1 : 0);
                 },
                 [&](const MarketOrderSubmit& p) {
                   out << "id=" << p.order_id << ";side=" << to_string(p.side) << ";qty=" << p.quantity;
                 },
                 [&](const CancelOrder& p) { out << "id=" << p.order_id; },
                 [&](const PartialCancelOrder& p) { out << "id=" << p.order_id << ";qty=" << p.quantity; },
                 [&](const QueryDepth& p) { out << "side=" << to_string(p.side) << ";fraction=" << p.fraction; },
                 [&](const DepthReply& p) {
                   out << "side=" << to_string(p.side) << ";empty=" << (p.side_empty ? 1 : 0)
                       << ";total=" << p.total_volume << ";levels=";
                   for (std::size_t i = 0; i < p.levels.size(); ++i)
                     out << (i ? "|" : "") << p.levels[i].price << "x" << p.levels[i].volume;
                 },
                 [&](const QuerySpread&) {},
                 [&](const SpreadReply& p) {
                   out << "bid=" << price_or_dash(p.best_bid) << ";bid_size=" << p.bid_size
                       << ";ask=" << price_or_dash(p.best_ask) << ";ask_size=" << p.ask_size;
                 },
                 [&](const OrderAccepted& p) { out << "id=" << p.order_id << ";rested=" << p.rested; },
                 [&](const OrderExecuted& p) {
                   out << "id=" << p.order_id << ";side=" << to_string(p.side) << ";price=" << p.price
                       << ";qty=" << p.quantity << ";remaining=" << p.remaining;
                 },
                 [&](const OrderCancelled& p) { out << "id=" << p.order_id << ";qty=" << p.quantity; },
                 [&](const Wakeup&) {},
             },
             payload);
  return out.str();
}

}  // namespace marketsim
