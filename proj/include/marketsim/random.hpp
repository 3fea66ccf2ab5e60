#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace marketsim {

/// SplitMix64 finalizer; a bijection on 64-bit integers.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for the stream identified by (global_seed, stream_key). Depends on
/// nothing else, so adding or removing agents never shifts another agent's
/// stream.
constexpr std::uint64_t derive_stream_seed(std::uint64_t global_seed, std::uint64_t stream_key) noexcept {
  return splitmix64(splitmix64(global_seed) ^ splitmix64(stream_key ^ 0x5851f42d4c957f2dULL));
}

/// Key of the fundamental-value process' private stream; outside any agent id.
inline constexpr std::uint64_t kOracleStreamKey = std::numeric_limits<std::uint64_t>::max();
/// Key reserved for experiment-level draws (e.g. synthetic data).
inline constexpr std::uint64_t kExperimentStreamKey = std::numeric_limits<std::uint64_t>::max() - 1;

/// A reproducible pseudo-random stream. Holds its own distribution state so
/// that equal call sequences produce equal draws.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}
  RandomStream(std::uint64_t global_seed, std::uint64_t stream_key)
      : engine_(derive_stream_seed(global_seed, stream_key)) {}

  std::uint64_t next_u64() { return engine_(); }
  double uniform() { return unit_(engine_); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * unit_(engine_); }
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(engine_);
  }
  bool coin() { return uniform() < 0.5; }
  /// Always consumes one standard-normal variate, including when stddev is 0.
  double normal(double mean, double stddev) { return mean + stddev * normal_(engine_); }
  double exponential(double rate) { return std::exponential_distribution<double>(rate)(engine_); }
  std::int64_t poisson(double mean) { return std::poisson_distribution<std::int64_t>(mean)(engine_); }
  std::size_t geometric(double p) { return std::geometric_distribution<std::size_t>(p)(engine_); }

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::uniform_real_distribution<double> unit_{0.0, 1.0};
  std::normal_distribution<double> normal_;
};

inline RandomStream agent_stream(std::uint64_t global_seed, std::uint64_t agent_id) {
  return RandomStream(global_seed, agent_id);
}

}  // namespace marketsim
