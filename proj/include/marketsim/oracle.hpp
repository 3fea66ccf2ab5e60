#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "marketsim/random.hpp"

namespace marketsim {

/// Parameters of the discrete mean-reverting fundamental value process.
/// Defaults are implementation choices, not measured values.
struct FundamentalParams {
  std::int64_t r_bar = 100'000;  // $10.00 in 10^-4 units
  double kappa = 0.05;
  double sigma_shock_sq = 1e4;
  std::int64_t horizon = 1000;
  double obs_noise_sq = 1e6;

  void validate() const;
};

/// Unobservable fundamental value series:
///   r_0 = r_bar
///   r_t = max(0, round(kappa * r_bar + (1 - kappa) * r_{t-1} + u_t)),  u_t ~ N(0, sigma_shock_sq)
/// Values are generated on demand from a dedicated stream and memoized, so the
/// path depends only on (global_seed, params).
class FundamentalSeries {
 public:
  FundamentalSeries(FundamentalParams params, std::uint64_t global_seed);

  /// Throws std::out_of_range unless 0 <= t <= horizon.
  std::int64_t value_at(std::int64_t t);
  /// value_at(t) plus N(0, obs_noise_sq) noise drawn from the caller's stream,
  /// rounded to an integer price.
  std::int64_t observe(std::int64_t t, double obs_noise_sq, RandomStream& agent_rng);

  const FundamentalParams& params() const noexcept { return params_; }

  /// Writes "t,value" for t = 0..horizon.
  void write_csv(std::ostream& out);

 private:
  FundamentalParams params_;
  RandomStream rng_;
  std::vector<std::int64_t> values_;
};

}  // namespace marketsim
