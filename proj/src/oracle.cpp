#include "marketsim/oracle.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

namespace marketsim {

void FundamentalParams::validate() const {
  if (r_bar <= 0) throw std::invalid_argument("r_bar must be positive");
  if (!(kappa >= 0.0 && kappa <= 1.0)) throw std::invalid_argument("kappa must lie in [0, 1]");
  if (!(sigma_shock_sq >= 0.0) || !(obs_noise_sq >= 0.0)) throw std::invalid_argument("variances must be non-negative");
  if (horizon < 0) throw std::invalid_argument("horizon must be non-negative");
}

FundamentalSeries::FundamentalSeries(FundamentalParams params, std::uint64_t global_seed)
    : params_(params), rng_(global_seed, kOracleStreamKey) {
  params_.validate();
  values_.reserve(static_cast<std::size_t>(params_.horizon) + 1);
  values_.push_back(params_.r_bar);
}

std::int64_t FundamentalSeries::value_at(std::int64_t t) {
  if (t < 0 || t > params_.horizon)
    throw std::out_of_range("fundamental time " + std::to_string(t) + " outside [0, " +
                            std::to_string(params_.horizon) + "]");
  const double shock_sd = std::sqrt(params_.sigma_shock_sq);
  const double r_bar = static_cast<double>(params_.r_bar);
  while (static_cast<std::int64_t>(values_.size()) <= t) {
    const double prev = static_cast<double>(values_.back());
    const double next = params_.kappa * r_bar + (1.0 - params_.kappa) * prev + rng_.normal(0.0, shock_sd);
    values_.push_back(std::max<std::int64_t>(0, std::llround(next)));
  }
  return values_[static_cast<std::size_t>(t)];
}

std::int64_t FundamentalSeries::observe(std::int64_t t, double obs_noise_sq, RandomStream& agent_rng) {
  if (!(obs_noise_sq >= 0.0)) throw std::invalid_argument("observation variance must be non-negative");
  const std::int64_t truth = value_at(t);
  return truth + std::llround(agent_rng.normal(0.0, std::sqrt(obs_noise_sq)));
}

void FundamentalSeries::write_csv(std::ostream& out) {
  out << "t,value\n";
  for (std::int64_t t = 0; t <= params_.horizon; ++t) out << t << ',' << value_at(t) << '\n';
}

}  // namespace marketsim
