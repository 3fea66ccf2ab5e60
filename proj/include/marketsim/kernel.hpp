#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

#include "marketsim/message.hpp"
#include "marketsim/random.hpp"
#include "marketsim/sim_time.hpp"

namespace marketsim {

struct KernelConfig {
  SimTime start;
  SimTime stop;
  std::uint64_t global_seed = 0;
  /// Network latency applied to every message unless overridden per pair.
  Nanos latency_ns = 0;
  std::map<std::pair<AgentId, AgentId>, Nanos> pair_latency_ns;
  std::map<AgentId, Nanos> computation_delay_ns;
  /// When false the run returns an empty log (agents and the exchange still
  /// see every message).
  bool record_log = true;

  void validate() const;
};

/// Every delivered message, in delivery order.
using SimulationLog = std::vector<Message>;

class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Ordering class among messages delivered at the same instant. All Normal
/// messages at a timestamp are delivered before any Late ones; within a class
/// insertion order decides.
enum class Phase : std::uint8_t { Normal = 0, Late = 1 };

class Kernel;

class Agent {
 public:
  explicit Agent(AgentId id) noexcept : id_(id) {}
  virtual ~Agent() = default;
  Agent(const Agent&) = delete;
  Agent& operator=(const Agent&) = delete;

  AgentId id() const noexcept { return id_; }

  virtual void on_wakeup(Kernel& kernel, SimTime now) = 0;
  virtual void on_message(Kernel& /*kernel*/, const Message& /*msg*/) {}

 private:
  AgentId id_;
};

/// Single-threaded discrete-event engine. Messages are delivered in
/// (deliver_at, phase, insertion sequence) order; the stop time is inclusive.
class Kernel {
 public:
  explicit Kernel(KernelConfig config);

  /// Seeds one Wakeup per agent at config.start (in the given order) and runs
  /// until the queue drains or the next message lies after config.stop.
  SimulationLog run(std::span<Agent* const> agents);

  SimTime now() const noexcept { return now_; }
  const KernelConfig& config() const noexcept { return config_; }

  /// sent_at = now, deliver_at = now + latency(sender, recipient) + computation_delay(sender).
  void send(AgentId sender, AgentId recipient, Payload payload, Phase phase = Phase::Normal);
  /// Self-addressed Wakeup at an absolute time (no latency applied).
  void wakeup_at(AgentId agent, SimTime at, Phase phase = Phase::Normal);
  /// Low-level enqueue; throws SimulationError if msg.deliver_at < now.
  void schedule_message(Message msg, Phase phase = Phase::Normal);

  Nanos delay(AgentId sender, AgentId recipient) const;
  std::size_t pending() const noexcept { return queue_.size(); }

 private:
  struct Entry {
    Message msg;
    Phase phase;
    std::uint64_t seq;
  };
  struct Later {
    bool operator()(const Entry& a, const Entry& b) const noexcept {
      if (a.msg.deliver_at != b.msg.deliver_at) return a.msg.deliver_at > b.msg.deliver_at;
      if (a.phase != b.phase) return a.phase > b.phase;
      return a.seq > b.seq;
    }
  };

  KernelConfig config_;
  SimTime now_;
  std::uint64_t next_seq_ = 0;
  std::vector<Entry> queue_;  // binary heap under Later
  std::unordered_map<AgentId, Agent*> agents_;
};

/// Convenience wrapper: Kernel(config).run(agents).
SimulationLog run_simulation(const KernelConfig& config, std::span<Agent* const> agents);

/// CSV with header deliver_at_ns,sender,recipient,payload_kind,payload_fields.
void write_log_csv(std::ostream& out, const SimulationLog& log);

}  // namespace marketsim
