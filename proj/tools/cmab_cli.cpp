// cmab: run experiments, sweeps and bound reports from a config file.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cmab/harness.hpp"

namespace {

void print_bounds(const std::vector<cmab::BoundReport>& reports) {
  for (const auto& b : reports)
    std::cout << b.name << " n=" << b.horizon << " value=" << cmab::format_number(b.value) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Combinatorial bandit laboratory"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::string axis;
  std::vector<std::string> values;

  auto* run = app.add_subcommand("run", "Play seeded repetitions and write CSV trajectories");
  run->add_option("--config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "Override experiment.seed");
  run->add_option("--out", out, "Override experiment.output");

  auto* sw = app.add_subcommand("sweep", "Run the config once per value of one key");
  sw->add_option("--config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  sw->add_option("--axis", axis, "Config key to vary")->required();
  sw->add_option("--values", values, "Values of the key")->required();
  sw->add_option("--out", out, "Output root");

  auto* bounds = app.add_subcommand("bounds", "Evaluate regret bounds only");
  bounds->add_option("--config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  bounds->add_option("--out", out, "Output directory");

  auto* validate = app.add_subcommand("validate", "Check a config and its instance");
  validate->add_option("--config", config_path, "Config file")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    const cmab::Config cfg = cmab::Config::load(config_path);
    std::optional<std::filesystem::path> out_path;
    if (out) out_path = *out;

    if (*run) {
      const auto res = cmab::run_experiment(cfg, seed, out_path);
      const auto& last = res.aggregate.back();
      std::cout << "runs=" << last.runs << " n=" << last.t
                << " mean_cumulative_regret=" << cmab::format_number(last.mean)
                << " stderr=" << cmab::format_number(last.std_error) << "\n";
      print_bounds(res.bounds);
      std::cout << "output: " << res.output.string() << "\n";
    } else if (*sw) {
      for (const auto& dir : cmab::sweep(cfg, axis, values, out_path)) std::cout << dir.string() << "\n";
    } else if (*bounds) {
      print_bounds(cmab::emit_bounds(cfg, out_path));
    } else if (*validate) {
      const auto problems = cmab::validate_config(cfg);
      for (const auto& p : problems) std::cout << "violation: " << p << "\n";
      if (!problems.empty()) return 1;
      std::cout << "ok\n";
    }
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 0;
}
