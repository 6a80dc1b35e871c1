#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "laycon/report.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Layered control certification and simulation"};
  app.require_subcommand(1);

  std::string certify_config;
  std::string certify_out = ".";
  auto* certify = app.add_subcommand("certify", "Compute the certificate for a configuration");
  certify->add_option("--config", certify_config, "Configuration file")->required();
  certify->add_option("--out", certify_out, "Output directory for certificate.json");

  std::string scenario;
  std::string run_config;
  std::uint64_t seed = 0;
  std::string run_out;
  auto* run = app.add_subcommand("run", "Simulate one scenario");
  run->add_option("--scenario", scenario, "a, b or custom")->required();
  run->add_option("--config", run_config, "Configuration file");
  run->add_option("--seed", seed, "Disturbance seed");
  run->add_option("--out", run_out, "Output directory")->required();

  std::string sweep_config;
  std::uint64_t seeds = 0;
  std::string sweep_out;
  auto* sweep = app.add_subcommand("sweep", "Simulate seeds 0..n-1 and aggregate");
  sweep->add_option("--config", sweep_config, "Configuration file")->required();
  sweep->add_option("--seeds", seeds, "Number of seeds")->required();
  sweep->add_option("--out", sweep_out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  using namespace laycon::report;
  if (*certify) return cmd_certify(certify_config, certify_out);
  if (*run) {
    std::optional<std::string> cfg;
    if (!run_config.empty()) cfg = run_config;
    return cmd_run(scenario, cfg, seed, run_out);
  }
  return cmd_sweep(sweep_config, seeds, sweep_out);
}
