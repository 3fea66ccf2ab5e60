#include <doctest.h>

#include <functional>
#include <memory>
#include <sstream>

#include "marketsim/kernel.hpp"
#include "marketsim/random.hpp"

using namespace marketsim;

namespace {

/// Agent whose reactions are supplied by the test.
class Scripted : public Agent {
 public:
  using WakeFn = std::function<void(Kernel&, SimTime)>;
  using MsgFn = std::function<void(Kernel&, const Message&)>;

  explicit Scripted(AgentId id, WakeFn wake = {}, MsgFn msg = {}) : Agent(id), wake_(std::move(wake)), msg_(std::move(msg)) {}
  void on_wakeup(Kernel& k, SimTime now) override {
    ++wakeups;
    if (wake_) wake_(k, now);
  }
  void on_message(Kernel& k, const Message& m) override {
    received.push_back(m);
    if (msg_) msg_(k, m);
  }

  int wakeups = 0;
  std::vector<Message> received;

 private:
  WakeFn wake_;
  MsgFn msg_;
};

KernelConfig config(Nanos stop = kNanosPerSecond) {
  KernelConfig c;
  c.start = SimTime(0);
  c.stop = SimTime(stop);
  c.global_seed = 42;
  return c;
}

}  // namespace

TEST_CASE("SimTime arithmetic and formatting") {
  CHECK_THROWS_AS(SimTime(-1), TimeError);
  CHECK_THROWS_AS(SimTime(5) - Nanos{6}, TimeError);
  CHECK(SimTime::from_hms(9, 30, 0).nanos() == 34'200 * kNanosPerSecond);
  CHECK(SimTime::from_units(std::int64_t{3}).nanos() == 300'000'000);
  CHECK(SimTime::from_units(2.5).nanos() == 250'000'000);
  CHECK(SimTime(399'999'999).units() == 3);
  CHECK(SimTime::from_hms(9, 45, 0, 7).to_string() == "09:45:00.000000007");
  CHECK(SimTime(1) < SimTime(2));
  CHECK(SimTime(10) - SimTime(4) == 6);
}

TEST_CASE("decimal seconds parse exactly") {
  CHECK(parse_decimal_seconds("34200.000000001").nanos() == 34'200'000'000'001);
  CHECK(parse_decimal_seconds("34200").nanos() == 34'200 * kNanosPerSecond);
  CHECK(parse_decimal_seconds("0.5").nanos() == 500'000'000);
  // Past the ninth decimal: half to even.
  CHECK(parse_decimal_seconds("1.0000000005").nanos() == 1'000'000'000);
  CHECK(parse_decimal_seconds("1.0000000015").nanos() == 1'000'000'002);
  CHECK(parse_decimal_seconds("1.00000000051").nanos() == 1'000'000'001);
  CHECK_THROWS_AS(parse_decimal_seconds("12a"), TimeError);
  CHECK_THROWS_AS(parse_decimal_seconds("-1"), TimeError);
  CHECK(format_decimal_seconds(SimTime(34'200'000'000'001)) == "34200.000000001");
  for (Nanos n : {Nanos{0}, Nanos{1}, Nanos{999'999'999}, Nanos{57'600'123'456'789}})
    CHECK(parse_decimal_seconds(format_decimal_seconds(SimTime(n))).nanos() == n);
}

TEST_CASE("clock and duration strings") {
  CHECK(parse_clock("09:53:15") == SimTime::from_hms(9, 53, 15));
  CHECK(parse_clock("09:30:00.25") == SimTime::from_hms(9, 30, 0, 250'000'000));
  CHECK(parse_clock("34200") == SimTime::from_hms(9, 30, 0));
  CHECK_THROWS(parse_clock("09:61:00"));
  CHECK(parse_duration("5s") == 5 * kNanosPerSecond);
  CHECK(parse_duration("1ms") == kNanosPerMilli);
  CHECK(parse_duration("250us") == 250'000);
  CHECK(parse_duration("7ns") == 7);
  CHECK(parse_duration("2min") == 120 * kNanosPerSecond);
  CHECK(parse_duration("600units") == 600 * kNanosPerUnit);
  CHECK(parse_duration("1.5") == 1'500'000'000);
  CHECK_THROWS(parse_duration("3 parsecs"));
}

TEST_CASE("agent streams") {
  auto a = agent_stream(1, 5);
  auto b = agent_stream(1, 5);
  for (int i = 0; i < 1000; ++i) REQUIRE(a.next_u64() == b.next_u64());

  auto five = agent_stream(1, 5);
  auto six = agent_stream(1, 6);
  bool differs = false;
  for (int i = 0; i < 10; ++i) differs |= five.next_u64() != six.next_u64();
  CHECK(differs);

  auto other_seed = agent_stream(2, 5);
  auto again = agent_stream(1, 5);
  CHECK(other_seed.next_u64() != again.next_u64());
}

TEST_CASE("an agent's stream does not depend on the roster") {
  // Each agent records its first draws; agent 5 must see the same numbers
  // whether the run has 10 or 11 agents.
  auto draws_of_agent5 = [](int roster) {
    std::vector<std::unique_ptr<Scripted>> agents;
    std::vector<std::uint64_t> seen;
    std::vector<Agent*> ptrs;
    for (int i = 0; i < roster; ++i) {
      const auto id = static_cast<AgentId>(i);
      agents.push_back(std::make_unique<Scripted>(id, [id, &seen](Kernel& k, SimTime) {
        auto rng = agent_stream(k.config().global_seed, id);
        if (id == 5)
          for (int j = 0; j < 16; ++j) seen.push_back(rng.next_u64());
      }));
      ptrs.push_back(agents.back().get());
    }
    run_simulation(config(), ptrs);
    return seen;
  };
  CHECK(draws_of_agent5(10) == draws_of_agent5(11));
}

TEST_CASE("kernel run basics") {
  SUBCASE("zero agents") { CHECK(run_simulation(config(), {}).empty()); }
  SUBCASE("one idle agent") {
    Scripted a(1);
    Agent* agents[] = {&a};
    const auto log = run_simulation(config(), agents);
    REQUIRE(log.size() == 1);
    CHECK(std::holds_alternative<Wakeup>(log[0].payload));
    CHECK(a.wakeups == 1);
  }
  SUBCASE("duplicate ids") {
    Scripted a(1), b(1);
    Agent* agents[] = {&a, &b};
    CHECK_THROWS_AS(run_simulation(config(), agents), SimulationError);
  }
  SUBCASE("invalid config") {
    KernelConfig c = config();
    c.stop = c.start;
    CHECK_THROWS(Kernel{c});
    c = config();
    c.latency_ns = -1;
    CHECK_THROWS(Kernel{c});
  }
}

TEST_CASE("equal-time messages keep insertion order") {
  Scripted receiver(2);
  Scripted sender(1, [](Kernel& k, SimTime) {
    k.send(1, 2, CancelOrder{10});
    k.send(1, 2, CancelOrder{11});
  });
  Agent* agents[] = {&sender, &receiver};
  run_simulation(config(), agents);
  REQUIRE(receiver.received.size() == 2);
  CHECK(std::get<CancelOrder>(receiver.received[0].payload).order_id == 10);
  CHECK(std::get<CancelOrder>(receiver.received[1].payload).order_id == 11);
}

TEST_CASE("late phase runs after normal messages at the same time") {
  std::vector<int> order;
  Scripted late(1, [&](Kernel& k, SimTime now) {
    if (now == SimTime(0)) k.wakeup_at(1, SimTime(100), Phase::Late);
    else order.push_back(1);
  });
  Scripted normal(2, [&](Kernel& k, SimTime now) {
    if (now == SimTime(0)) k.wakeup_at(2, SimTime(100));
    else order.push_back(2);
  });
  Agent* agents[] = {&late, &normal};
  run_simulation(config(), agents);
  CHECK(order == std::vector<int>{2, 1});
}

TEST_CASE("scheduling into the past fails") {
  Scripted a(1, [](Kernel& k, SimTime now) {
    if (now == SimTime(0)) k.wakeup_at(1, SimTime(500));
    else k.schedule_message(Message{1, 1, now, SimTime(10), Wakeup{}});
  });
  Agent* agents[] = {&a};
  CHECK_THROWS_AS(run_simulation(config(), agents), SimulationError);
}

TEST_CASE("agent failures identify the message") {
  Scripted a(3, [](Kernel&, SimTime) { throw std::runtime_error("boom"); });
  Agent* agents[] = {&a};
  try {
    run_simulation(config(), agents);
    FAIL("expected an error");
  } catch (const SimulationError& e) {
    const std::string what = e.what();
    CHECK(what.find("agent 3") != std::string::npos);
    CHECK(what.find("Wakeup") != std::string::npos);
    CHECK(what.find("boom") != std::string::npos);
  }
}

TEST_CASE("stop time is inclusive") {
  int late_wakeups = 0;
  Scripted a(1, [&](Kernel& k, SimTime now) {
    if (now == SimTime(0)) {
      k.wakeup_at(1, SimTime(kNanosPerSecond));
      k.wakeup_at(1, SimTime(kNanosPerSecond + 1));
    } else {
      ++late_wakeups;
    }
  });
  Agent* agents[] = {&a};
  const auto log = run_simulation(config(kNanosPerSecond), agents);
  CHECK(late_wakeups == 1);
  CHECK(log.back().deliver_at == SimTime(kNanosPerSecond));
}

TEST_CASE("latency and computation delay") {
  KernelConfig c = config();
  c.latency_ns = 1000;
  c.pair_latency_ns[{1, 3}] = 50;
  c.computation_delay_ns[1] = 7;
  Scripted two(2), three(3);
  Scripted one(1, [](Kernel& k, SimTime) {
    k.send(1, 2, QuerySpread{});
    k.send(1, 3, QuerySpread{});
  });
  Agent* agents[] = {&one, &two, &three};
  run_simulation(c, agents);
  REQUIRE(two.received.size() == 1);
  REQUIRE(three.received.size() == 1);
  CHECK(two.received[0].deliver_at.nanos() == 1007);
  CHECK(three.received[0].deliver_at.nanos() == 57);
  CHECK(two.received[0].sent_at.nanos() == 0);
}

TEST_CASE("logs are deterministic, ordered and causal") {
  auto run_once = [] {
    std::vector<std::unique_ptr<Scripted>> agents;
    std::vector<Agent*> ptrs;
    for (AgentId id = 0; id < 6; ++id) {
      auto rng = std::make_shared<RandomStream>(agent_stream(9, id));
      agents.push_back(std::make_unique<Scripted>(
          id,
          [id, rng](Kernel& k, SimTime) {
            k.send(id, static_cast<AgentId>(rng->uniform_int(0, 5)), QuerySpread{});
            k.wakeup_at(id, k.now() + static_cast<Nanos>(rng->exponential(1e-7)));
          },
          [id, rng](Kernel& k, const Message& m) {
            if (std::holds_alternative<QuerySpread>(m.payload) && rng->coin())
              k.send(id, m.sender, SpreadReply{std::nullopt, 100, 0, 5});
          }));
      ptrs.push_back(agents.back().get());
    }
    KernelConfig c = config(5 * kNanosPerSecond);
    c.latency_ns = 3;
    return run_simulation(c, ptrs);
  };
  const auto a = run_once();
  const auto b = run_once();
  CHECK(a.size() > 100);
  CHECK(a == b);
  std::ostringstream ca, cb;
  write_log_csv(ca, a);
  write_log_csv(cb, b);
  CHECK(ca.str() == cb.str());
  for (std::size_t i = 1; i < a.size(); ++i) {
    CHECK(a[i - 1].deliver_at <= a[i].deliver_at);
    CHECK(a[i].sent_at <= a[i].deliver_at);
  }
}

TEST_CASE("log CSV layout") {
  SimulationLog log{Message{1, 0, SimTime(5), SimTime(9), LimitOrderSubmit{12, Side::Sell, 1000100, 300, false}}};
  std::ostringstream out;
  write_log_csv(out, log);
  const std::string text = out.str();
  CHECK(text.rfind("deliver_at_ns,sender,recipient,payload_kind,payload_fields\n", 0) == 0);
  CHECK(text.find("9,1,0,LimitOrderSubmit,") != std::string::npos);
  CHECK(text.find("id=12;side=") != std::string::npos);
}
