#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "marketsim/experiments.hpp"

namespace {

using namespace marketsim;

int run_impact(const std::string& config_path, ExperimentMode mode) {
  const ExperimentConfig config = load_config(config_path, mode);
  const ExperimentOutput out = run_experiment(config);
  for (const auto& p : emit_csv(out.curves, config.output_dir)) std::cout << p.string() << '\n';
  for (const auto& p : emit_svg(out.curves, config.output_dir)) std::cout << p.string() << '\n';
  if (mode == ExperimentMode::ReplayImpact) {
    std::cout << emit_price_level_volume(out.price_level_volume, config.output_dir).string() << '\n';
  } else {
    FundamentalSeries fundamental(config.fundamental, config.base_seed);
    const auto path = std::filesystem::path(config.output_dir) / "iabs_fundamental.csv";
    std::ofstream f(path);
    fundamental.write_csv(f);
    std::cout << path.string() << '\n';
  }
  return 0;
}

int run_stats(const std::string& messages) {
  std::vector<lobster::ParseWarning> warnings;
  const auto events = lobster::read_messages(messages, &warnings);
  for (const auto& w : warnings) std::cerr << "warning: line " << w.line << ": " << w.message << '\n';
  const auto s = lobster::stream_stats(events);
  std::printf("total_events %zu\n", s.total_events);
  std::printf("unique_order_ids %zu\n", s.unique_order_ids);
  std::printf("new_limit_orders %zu\n", s.new_limits());
  std::printf("new_buy_limit_orders %zu\n", s.new_buy_limits);
  std::printf("new_sell_limit_orders %zu\n", s.new_sell_limits);
  std::printf("mean_interarrival_new_ms %.3f\n", s.mean_interarrival_new_ms);
  std::printf("cancellations %zu\n", s.cancel_count);
  std::printf("mean_interarrival_cancel_ms %.3f\n", s.mean_interarrival_cancel_ms);
  return 0;
}

int run_generate(std::uint64_t seed, const std::string& out_prefix, const std::string& duration) {
  lobster::SyntheticConfig config;
  config.seed = seed;
  if (!duration.empty()) config.duration = parse_duration(duration);
  const auto day = lobster::generate_synthetic_stream(config);
  const std::filesystem::path prefix(out_prefix);
  if (prefix.has_parent_path()) std::filesystem::create_directories(prefix.parent_path());
  const std::string message_path = out_prefix + "_message_" + std::to_string(config.snapshot_levels) + ".csv";
  const std::string book_path = out_prefix + "_orderbook_" + std::to_string(config.snapshot_levels) + ".csv";
  std::ofstream messages(message_path);
  std::ofstream book(book_path);
  if (!messages || !book) throw std::runtime_error("cannot write output files under " + out_prefix);
  lobster::write_messages(messages, day.messages);
  for (const auto& row : day.book_rows) lobster::write_orderbook_row(book, row);
  std::cout << message_path << '\n' << book_path << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deterministic agent-based market simulator"};
  app.require_subcommand(1);

  std::string replay_config;
  auto* replay = app.add_subcommand("replay-impact", "Market-replay impact backtest");
  replay->add_option("--config", replay_config, "JSON config file")->required()->check(CLI::ExistingFile);

  std::string iabs_config;
  auto* iabs = app.add_subcommand("iabs-impact", "Interactive agent-based impact experiment");
  iabs->add_option("--config", iabs_config, "JSON config file")->required()->check(CLI::ExistingFile);

  std::string messages;
  auto* stats = app.add_subcommand("stats", "Summary statistics of a LOBSTER message file");
  stats->add_option("--messages", messages, "Message file")->required()->check(CLI::ExistingFile);

  std::uint64_t seed = 1;
  std::string out = "synthetic";
  std::string duration;
  auto* gen = app.add_subcommand("gen-synthetic", "Write a synthetic LOBSTER message/order-book pair");
  gen->add_option("--seed", seed, "Generator seed");
  gen->add_option("--out", out, "Output prefix; writes <out>_message_10.csv and <out>_orderbook_10.csv");
  gen->add_option("--duration", duration, "Simulated duration, e.g. 3600s or 30min");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*replay) return run_impact(replay_config, ExperimentMode::ReplayImpact);
    if (*iabs) return run_impact(iabs_config, ExperimentMode::IabsImpact);
    if (*stats) return run_stats(messages);
    if (*gen) return run_generate(seed, out, duration);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
