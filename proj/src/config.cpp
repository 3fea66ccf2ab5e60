#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <json.hpp>

#include "marketsim/experiments.hpp"

namespace marketsim {

namespace {

using nlohmann::json;

std::string describe(const std::string& key, const std::string& why) { return "config key '" + key + "': " + why; }

SimTime as_clock(const std::string& key, const json& v) {
  try {
    if (v.is_string()) return parse_clock(v.get<std::string>());
    if (v.is_number()) return SimTime::from_units(v.get<double>() * 10.0);
  } catch (const std::exception& e) {
    throw ConfigError(describe(key, e.what()));
  }
  throw ConfigError(describe(key, "expected a clock string or seconds"));
}

// Strings take a unit suffix; bare numbers are seconds.
Nanos as_duration(const std::string& key, const json& v) {
  try {
    if (v.is_string()) return parse_duration(v.get<std::string>());
    if (v.is_number()) return SimTime::from_units(v.get<double>() * 10.0).nanos();
  } catch (const std::exception& e) {
    throw ConfigError(describe(key, e.what()));
  }
  throw ConfigError(describe(key, "expected a duration"));
}

template <class T>
T as(const std::string& key, const json& v) {
  try {
    return v.get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(describe(key, e.what()));
  }
}

Side parse_side(const std::string& key, const std::string& s) {
  if (s == "buy") return Side::Buy;
  if (s == "sell") return Side::Sell;
  throw ConfigError(describe(key, "side must be buy or sell, got '" + s + "'"));
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text, std::optional<ExperimentMode> forced) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");

  ExperimentMode mode = forced.value_or(ExperimentMode::ReplayImpact);
  if (auto it = doc.find("mode"); it != doc.end()) {
    const auto m = as<std::string>("mode", *it);
    if (m == "replay_impact" || m == "replay-impact")
      mode = ExperimentMode::ReplayImpact;
    else if (m == "iabs_impact" || m == "iabs-impact")
      mode = ExperimentMode::IabsImpact;
    else
      throw ConfigError(describe("mode", "expected replay_impact or iabs_impact"));
    if (forced && *forced != mode) throw ConfigError(describe("mode", "does not match the subcommand"));
  }
  ExperimentConfig c = default_config(mode);

  using Setter = std::function<void(const std::string&, const json&)>;
  const std::map<std::string, Setter> setters{
      {"mode", [](auto&, auto&) {}},
      {"message_file", [&](auto& k, auto& v) { c.message_file = as<std::string>(k, v); }},
      {"orderbook_file", [&](auto& k, auto& v) { c.orderbook_file = as<std::string>(k, v); }},
      {"synthetic_seed", [&](auto& k, auto& v) { c.synthetic.seed = as<std::uint64_t>(k, v); }},
      {"synthetic_duration", [&](auto& k, auto& v) { c.synthetic.duration = as_duration(k, v); }},
      {"market_open",
       [&](auto& k, auto& v) {
         c.market_open = as_clock(k, v);
         c.synthetic.open = c.market_open;
       }},
      {"market_close", [&](auto& k, auto& v) { c.market_close = as_clock(k, v); }},
      {"trial_start", [&](auto& k, auto& v) { c.trial_start = as_clock(k, v); }},
      {"trial_end", [&](auto& k, auto& v) { c.trial_end = as_clock(k, v); }},
      {"trial_interval", [&](auto& k, auto& v) { c.trial_interval = as_duration(k, v); }},
      {"sizes", [&](auto& k, auto& v) { c.sizes = as<std::vector<double>>(k, v); }},
      {"sides",
       [&](auto& k, auto& v) {
         const auto s = as<std::string>(k, v);
         if (s == "both")
           c.sides = SideSelection::Both;
         else
           c.sides = parse_side(k, s) == Side::Buy ? SideSelection::Buy : SideSelection::Sell;
       }},
      {"trials", [&](auto& k, auto& v) { c.trials = as<std::size_t>(k, v); }},
      {"base_seed", [&](auto& k, auto& v) { c.base_seed = as<std::uint64_t>(k, v); }},
      {"window_pre", [&](auto& k, auto& v) { c.window_pre = as_duration(k, v); }},
      {"window_post", [&](auto& k, auto& v) { c.window_post = as_duration(k, v); }},
      {"sample_interval", [&](auto& k, auto& v) { c.sample_interval = as_duration(k, v); }},
      {"latency_ns", [&](auto& k, auto& v) { c.latency_ns = as<Nanos>(k, v); }},
      {"output_dir", [&](auto& k, auto& v) { c.output_dir = as<std::string>(k, v); }},
      {"threads", [&](auto& k, auto& v) { c.threads = as<unsigned>(k, v); }},
      {"volume_sample_interval", [&](auto& k, auto& v) { c.volume_sample_interval = as_duration(k, v); }},
      {"volume_levels", [&](auto& k, auto& v) { c.volume_levels = as<std::size_t>(k, v); }},
      {"horizon", [&](auto& k, auto& v) { c.fundamental.horizon = as<std::int64_t>(k, v); }},
      {"r_bar", [&](auto& k, auto& v) { c.fundamental.r_bar = as<std::int64_t>(k, v); }},
      {"kappa", [&](auto& k, auto& v) { c.fundamental.kappa = as<double>(k, v); }},
      {"sigma_shock_sq", [&](auto& k, auto& v) { c.fundamental.sigma_shock_sq = as<double>(k, v); }},
      {"obs_noise_sq",
       [&](auto& k, auto& v) {
         c.fundamental.obs_noise_sq = as<double>(k, v);
         c.population.obs_noise_sq = c.fundamental.obs_noise_sq;
       }},
      {"zi_count", [&](auto& k, auto& v) { c.population.count = as<std::size_t>(k, v); }},
      {"zi_surplus_min_lo", [&](auto& k, auto& v) { c.population.surplus_min_lo = as<Price>(k, v); }},
      {"zi_surplus_min_hi", [&](auto& k, auto& v) { c.population.surplus_min_hi = as<Price>(k, v); }},
      {"zi_surplus_width_lo", [&](auto& k, auto& v) { c.population.surplus_width_lo = as<Price>(k, v); }},
      {"zi_surplus_width_hi", [&](auto& k, auto& v) { c.population.surplus_width_hi = as<Price>(k, v); }},
      {"zi_eta_choices", [&](auto& k, auto& v) { c.population.eta_choices = as<std::vector<double>>(k, v); }},
      {"zi_arrival_rate", [&](auto& k, auto& v) { c.population.arrival_rate = as<double>(k, v); }},
      {"zi_q_max", [&](auto& k, auto& v) { c.population.q_max = as<int>(k, v); }},
      {"zi_private_value_sd", [&](auto& k, auto& v) { c.population.private_value_sd = as<double>(k, v); }},
      {"zi_first_arrival_max", [&](auto& k, auto& v) { c.population.first_arrival_max = as<double>(k, v); }},
      {"trigger_time", [&](auto& k, auto& v) { c.impact.trigger_time = as<std::int64_t>(k, v); }},
      {"band_fraction", [&](auto& k, auto& v) { c.impact.band_fraction = as<double>(k, v); }},
      {"impact_market_order", [&](auto& k, auto& v) { c.impact.market_order = as<bool>(k, v); }},
  };

  for (const auto& [key, value] : doc.items()) {
    const auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError("unknown config key '" + key + "'");
    it->second(key, value);
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path, std::optional<ExperimentMode> mode) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), mode);
}

}  // namespace marketsim
