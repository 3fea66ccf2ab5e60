#include <doctest.h>

#include <cmath>
#include <memory>

#include "marketsim/agents.hpp"
#include "marketsim/event_study.hpp"
#include "marketsim/exchange.hpp"

using namespace marketsim;

namespace {

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxx > 0 && syy > 0 ? sxy / std::sqrt(sxx * syy) : 0.0;
}

double tracking_correlation(std::uint64_t seed) {
  const FundamentalParams fp;
  const ZIPopulation pop;
  FundamentalSeries oracle(fp, seed);
  ExchangeAgent exchange(0);
  std::vector<std::unique_ptr<ZIAgent>> zi;
  std::vector<Agent*> agents{&exchange};
  for (AgentId id = 1; id <= pop.count; ++id) {
    zi.push_back(std::make_unique<ZIAgent>(id, 0, pop, oracle, seed));
    agents.push_back(zi.back().get());
  }
  KernelConfig kc;
  kc.start = SimTime(0);
  kc.stop = SimTime::from_units(fp.horizon);
  kc.global_seed = seed;
  kc.record_log = false;
  Kernel(kc).run(agents);

  const auto mids = sample_mid(exchange.quotes(), SimTime(0), kNanosPerUnit, static_cast<std::size_t>(fp.horizon) + 1);
  std::vector<double> mid, fundamental;
  for (std::size_t t = 0; t < mids.values.size(); ++t)
    if (mids.values[t]) {
      mid.push_back(*mids.values[t]);
      fundamental.push_back(static_cast<double>(oracle.value_at(static_cast<std::int64_t>(t))));
    }
  return pearson(mid, fundamental);
}

}  // namespace

TEST_CASE("mid price tracks the fundamental under default parameters") {
  int tracking = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const double rho = tracking_correlation(seed);
    MESSAGE("seed " << seed << " correlation " << rho);
    if (rho > 0.5) ++tracking;
  }
  CHECK(tracking >= 8);
}
