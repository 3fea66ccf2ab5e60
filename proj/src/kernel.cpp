#include "marketsim/kernel.hpp"

#include <algorithm>
#include <ostream>
#include <string>

namespace marketsim {

void KernelConfig::validate() const {
  if (!(start < stop)) throw std::invalid_argument("kernel start must precede stop");
  if (latency_ns < 0) throw std::invalid_argument("latency must be non-negative");
  for (const auto& [pair, ns] : pair_latency_ns)
    if (ns < 0) throw std::invalid_argument("pair latency must be non-negative");
  for (const auto& [agent, ns] : computation_delay_ns)
    if (ns < 0) throw std::invalid_argument("computation delay must be non-negative");
}

Kernel::Kernel(KernelConfig config) : config_(std::move(config)), now_(config_.start) { config_.validate(); }

Nanos Kernel::delay(AgentId sender, AgentId recipient) const {
  Nanos latency = config_.latency_ns;
  if (auto it = config_.pair_latency_ns.find({sender, recipient}); it != config_.pair_latency_ns.end())
    latency = it->second;
  Nanos compute = 0;
  if (auto it = config_.computation_delay_ns.find(sender); it != config_.computation_delay_ns.end())
    compute = it->second;
  return latency + compute;
}

void Kernel::schedule_message(Message msg, Phase phase) {
  if (msg.deliver_at < now_)
    throw SimulationError("message scheduled into the past: deliver_at " + msg.deliver_at.to_string() + " < now " +
                          now_.to_string());
  if (msg.deliver_at < msg.sent_at) throw SimulationError("message delivered before it was sent");
  queue_.push_back(Entry{std::move(msg), phase, next_seq_++});
  std::push_heap(queue_.begin(), queue_.end(), Later{});
}

void Kernel::send(AgentId sender, AgentId recipient, Payload payload, Phase phase) {
  schedule_message(Message{sender, recipient, now_, now_ + delay(sender, recipient), std::move(payload)}, phase);
}

void Kernel::wakeup_at(AgentId agent, SimTime at, Phase phase) {
  schedule_message(Message{agent, agent, now_, at, Wakeup{}}, phase);
}

SimulationLog Kernel::run(std::span<Agent* const> agents) {
  agents_.clear();
  queue_.clear();
  next_seq_ = 0;
  now_ = config_.start;
  for (Agent* agent : agents) {
    if (!agents_.emplace(agent->id(), agent).second)
      throw SimulationError("duplicate agent id " + std::to_string(agent->id()));
  }
  for (Agent* agent : agents) wakeup_at(agent->id(), config_.start);

  SimulationLog log;
  while (!queue_.empty()) {
    if (queue_.front().msg.deliver_at > config_.stop) break;
    std::pop_heap(queue_.begin(), queue_.end(), Later{});
    Message msg = std::move(queue_.back().msg);
    queue_.pop_back();
    now_ = msg.deliver_at;

    auto it = agents_.find(msg.recipient);
    if (it == agents_.end())
      throw SimulationError("message " + std::string(payload_kind(msg.payload)) + " addressed to unknown agent " +
                            std::to_string(msg.recipient));
    try {
      if (std::holds_alternative<Wakeup>(msg.payload))
        it->second->on_wakeup(*this, now_);
      else
        it->second->on_message(*this, msg);
    } catch (const SimulationError&) {
      throw;
    } catch (const std::exception& e) {
      throw SimulationError("agent " + std::to_string(msg.recipient) + " failed handling " +
                            std::string(payload_kind(msg.payload)) + " from agent " + std::to_string(msg.sender) +
                            " at " + now_.to_string() + ": " + e.what());
    }
    if (config_.record_log) log.push_back(std::move(msg));
  }
  return log;
}

SimulationLog run_simulation(const KernelConfig& config, std::span<Agent* const> agents) {
  return Kernel(config).run(agents);
}

void write_log_csv(std::ostream& out, const SimulationLog& log) {
  out << "deliver_at_ns,sender,recipient,payload_kind,payload_fields\n";
  for (const Message& m : log)
    out << m.deliver_at.nanos() << ',' << m.sender << ',' << m.recipient << ',' << payload_kind(m.payload) << ','
        << payload_fields(m.payload) << '\n';
}

}  // namespace marketsim
