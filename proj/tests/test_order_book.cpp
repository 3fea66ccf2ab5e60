#include <doctest.h>

#include "book_scripts.hpp"
#include "marketsim/order_book.hpp"

using namespace marketsim;

namespace {

Order limit(OrderId id, Side side, Price price, Quantity qty, Nanos t = 0) {
  return Order{id, side, price, qty, SimTime(t), 7};
}

constexpr Price usd(double dollars) { return static_cast<Price>(dollars * 10'000.0 + 0.5); }

}  // namespace

TEST_CASE("limit into empty book rests") {
  OrderBook book;
  const auto r = book.submit_limit(limit(1, Side::Buy, usd(10.00), 100));
  CHECK(r.fills.empty());
  CHECK(r.rested_quantity == 100);
  CHECK(book.best_bid() == usd(10.00));
  CHECK_FALSE(book.best_ask());
}

TEST_CASE("time priority within a level") {
  OrderBook book;
  book.submit_limit(limit(1, Side::Sell, usd(10.01), 100, 1));
  book.submit_limit(limit(2, Side::Sell, usd(10.01), 50, 2));
  const auto r = book.submit_limit(limit(3, Side::Buy, usd(10.01), 120, 3));
  REQUIRE(r.fills.size() == 2);
  CHECK(r.fills[0].maker_order_id == 1);
  CHECK(r.fills[0].quantity == 100);
  CHECK(r.fills[1].maker_order_id == 2);
  CHECK(r.fills[1].quantity == 20);
  CHECK(r.fills[0].price == usd(10.01));
  CHECK(r.fills[1].price == usd(10.01));
  CHECK(r.rested_quantity == 0);
  CHECK(book.find(2)->quantity == 30);
}

TEST_CASE("limit stops at its price and rests the remainder") {
  OrderBook book;
  book.submit_limit(limit(1, Side::Sell, usd(10.01), 50));
  book.submit_limit(limit(2, Side::Sell, usd(10.02), 50));
  const auto r = book.submit_limit(limit(3, Side::Buy, usd(10.01), 80));
  REQUIRE(r.fills.size() == 1);
  CHECK(r.fills[0].quantity == 50);
  CHECK(r.rested_quantity == 30);
  CHECK(book.best_bid() == usd(10.01));
  CHECK(book.best_ask() == usd(10.02));
}

TEST_CASE("duplicate ids and bad orders are rejected") {
  OrderBook book;
  book.submit_limit(limit(1, Side::Buy, 100, 10));
  CHECK_THROWS_AS(book.submit_limit(limit(1, Side::Buy, 100, 10)), OrderBookError);
  CHECK_THROWS_AS(book.submit_limit(limit(2, Side::Buy, 0, 10)), OrderBookError);
  CHECK_THROWS_AS(book.submit_limit(limit(3, Side::Buy, 100, 0)), OrderBookError);
}

TEST_CASE("market orders") {
  OrderBook book;
  CHECK(book.submit_market(Side::Buy, 10).empty());

  book.submit_limit(limit(1, Side::Sell, usd(10.01), 100));
  book.submit_limit(limit(2, Side::Sell, usd(10.02), 200));
  const auto fills = book.submit_market(Side::Buy, 150);
  REQUIRE(fills.size() == 2);
  CHECK(fills[0].price == usd(10.01));
  CHECK(fills[0].quantity == 100);
  CHECK(fills[1].price == usd(10.02));
  CHECK(fills[1].quantity == 50);

  SUBCASE("exactly the remaining depth empties the side") {
    const auto rest = book.submit_market(Side::Buy, 150);
    CHECK(rest.size() == 1);
    CHECK_FALSE(book.best_ask());
    CHECK(book.order_count() == 0);
  }
}

TEST_CASE("cancel") {
  OrderBook book;
  book.submit_limit(limit(1, Side::Buy, 100, 70));
  CHECK(book.cancel(1) == 70);
  CHECK_FALSE(book.contains(1));
  CHECK(book.cancel(1) == 0);

  book.submit_limit(limit(2, Side::Sell, 200, 40));
  book.submit_market(Side::Buy, 40);
  CHECK(book.cancel(2) == 0);
}

TEST_CASE("partial cancel keeps queue position") {
  OrderBook book;
  book.submit_limit(limit(1, Side::Sell, 200, 100, 1));
  book.submit_limit(limit(2, Side::Sell, 200, 100, 2));
  CHECK(book.partial_cancel(1, 30) == 30);
  CHECK(book.find(1)->quantity == 70);
  const auto fills = book.submit_market(Side::Buy, 10);
  REQUIRE(fills.size() == 1);
  CHECK(fills[0].maker_order_id == 1);

  CHECK(book.partial_cancel(2, 150) == 100);
  CHECK_FALSE(book.contains(2));
  CHECK(book.partial_cancel(99, 5) == 0);
  CHECK_THROWS(book.partial_cancel(1, 0));
}

TEST_CASE("quotes, mid and spread") {
  OrderBook book;
  CHECK_FALSE(book.mid_price());
  CHECK_FALSE(book.spread());
  book.submit_limit(limit(1, Side::Buy, 100000, 10));
  CHECK_FALSE(book.mid_price());
  book.submit_limit(limit(2, Side::Sell, 100200, 10));
  CHECK(book.mid_price()->value() == 100100.0);
  CHECK(book.spread() == 200);
  book.submit_limit(limit(3, Side::Sell, 100100, 10));
  CHECK(book.mid_price()->twice == 200100);
  CHECK(book.mid_price()->value() == 100050.0);
}

TEST_CASE("depth within a band") {
  OrderBook book;
  book.submit_limit(limit(1, Side::Sell, usd(10.00), 100));
  book.submit_limit(limit(2, Side::Sell, usd(10.05), 50));
  book.submit_limit(limit(3, Side::Sell, usd(10.20), 75));
  const auto d = book.depth_within(Side::Sell, 0.01);
  REQUIRE(d.levels.size() == 2);
  CHECK(d.levels[0].price == usd(10.00));
  CHECK(d.levels[1].price == usd(10.05));
  CHECK(d.total_volume == 150);

  CHECK(book.depth_within(Side::Sell, 0.0).total_volume == 100);
  CHECK_THROWS_AS(book.depth_within(Side::Buy, 0.01), EmptySideError);

  SUBCASE("boundary is inclusive") {
    book.submit_limit(limit(4, Side::Sell, usd(10.10), 5));
    CHECK(book.depth_within(Side::Sell, 0.01).total_volume == 155);
  }
  SUBCASE("bid side") {
    book.submit_limit(limit(5, Side::Buy, usd(9.90), 10));
    book.submit_limit(limit(6, Side::Buy, usd(9.80), 10));
    book.submit_limit(limit(7, Side::Buy, usd(9.8), 5));
    // 9.90 * 0.99 = 9.801, so 9.80 falls outside.
    CHECK(book.depth_within(Side::Buy, 0.01).total_volume == 10);
  }
  SUBCASE("single level regardless of fraction") {
    OrderBook one;
    one.submit_limit(limit(1, Side::Buy, 500, 9));
    CHECK(one.depth_within(Side::Buy, 0.5).total_volume == 9);
    CHECK(one.depth_within(Side::Buy, 1e-9).total_volume == 9);
  }
}

TEST_CASE("band limits") {
  CHECK(band_limit(Side::Sell, 100000, 0.01) == 101000);
  CHECK(band_limit(Side::Buy, 100000, 0.01) == 99000);
  CHECK(band_limit(Side::Sell, 100000, 0.0) == 100000);
}

TEST_CASE("snapshots") {
  OrderBook book;
  const auto empty = book.snapshot(1);
  CHECK(empty.asks[0].price == kEmptyAskPrice);
  CHECK(empty.bids[0].price == kEmptyBidPrice);
  CHECK(empty.asks[0].volume == 0);
  CHECK(is_empty_level(empty.bids[0]));

  book.submit_limit(limit(1, Side::Sell, 10100, 5));
  book.submit_limit(limit(2, Side::Sell, 10100, 7));
  book.submit_limit(limit(3, Side::Buy, 9900, 3));
  const auto snap = book.snapshot(2);
  const L2Snapshot manual{{{10100, 12}, {kEmptyAskPrice, 0}}, {{9900, 3}, {kEmptyBidPrice, 0}}};
  CHECK(snap == manual);
  const auto top = book.snapshot(1);
  CHECK(top.asks[0].price == *book.best_ask());
  CHECK(top.bids[0].price == *book.best_bid());
  CHECK_THROWS(book.snapshot(0));
}

TEST_CASE("fills never exceed open quantity and pay the maker price") {
  OrderBook book;
  book.submit_limit(limit(1, Side::Buy, 9900, 40));
  book.submit_limit(limit(2, Side::Buy, 10000, 30));
  const auto r = book.submit_limit(limit(3, Side::Sell, 9800, 100));
  REQUIRE(r.fills.size() == 2);
  CHECK(r.fills[0].price == 10000);
  CHECK(r.fills[0].quantity == 30);
  CHECK(r.fills[0].maker_remaining == 0);
  CHECK(r.fills[1].price == 9900);
  CHECK(r.fills[1].quantity == 40);
  CHECK(r.rested_quantity == 30);
  CHECK(book.best_ask() == 9800);
}

TEST_CASE("FIFO among same-price makers") {
  OrderBook book;
  for (OrderId id = 1; id <= 20; ++id) book.submit_limit(limit(id, Side::Sell, 500, 3, static_cast<Nanos>(id)));
  book.partial_cancel(5, 1);
  book.cancel(9);
  const auto fills = book.submit_market(Side::Buy, 1000);
  OrderId last = 0;
  for (const auto& f : fills) {
    CHECK(f.maker_order_id > last);
    last = f.maker_order_id;
  }
  CHECK(fills.size() == 19);
}

TEST_CASE("random scripts agree with the reference matcher") {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const auto report = testing::run_book_script(seed);
    INFO("seed " << seed);
    CHECK_MESSAGE(report.mismatch.empty(), report.mismatch);
  }
}
