#pragma once

// Experiment runner: builds an instance, oracle and policy from a Config,
// plays seeded repetitions, and writes trajectories, aggregates, bound
// overlays and a metadata file.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "cmab/analysis.hpp"
#include "cmab/arm_model.hpp"
#include "cmab/config.hpp"
#include "cmab/environments.hpp"
#include "cmab/oracles.hpp"
#include "cmab/policies.hpp"

namespace cmab {

/// One row of a trajectory file.
struct RoundRecord {
  std::uint64_t t = 0;
  SuperArmId super_arm = 0;
  double realized_reward = 0.0;
  double expected_reward = 0.0;
  double regret = 0.0;
  double cumulative_regret = 0.0;
  bool oracle_failed = false;
};

using RewardFunction = std::function<double(const SuperArm&)>;
using RoundObserver = std::function<void(const RoundRecord&, const Policy&)>;

/// Plays n rounds of `policy` on `env`, charging each round
/// baseline - r_mu(S_t). The observer runs after each update. Returns the
/// cumulative regret.
double simulate(const Environment& env, Policy& policy, const RewardFunction& expected_reward,
                double baseline, std::uint64_t n, Rng& env_rng, Rng& policy_rng,
                const RoundObserver& observe = {});

/// Powers of two up to n, the extra rounds given, and n itself.
std::vector<std::uint64_t> checkpoint_rounds(std::uint64_t n, const std::vector<std::uint64_t>& extra = {});

/// Seeds of the environment and policy streams of repetition `run`.
std::uint64_t environment_seed(std::uint64_t base, std::uint64_t run);
std::uint64_t policy_seed(std::uint64_t base, std::uint64_t run);

/// r_mu(S) under the true means: exact where possible, otherwise a cached
/// Monte-Carlo estimate with a per-super-arm seed.
class RewardTable {
 public:
  RewardTable(std::shared_ptr<const Environment> env, const GapProfile* profile,
              std::uint64_t seed, std::size_t mc_samples);
  double operator()(const SuperArm& arm) const;
  /// Standard error of the estimate; 0 when exact.
  double std_error(const SuperArm& arm) const;
  bool exact() const { return exact_; }

 private:
  McEstimate lookup(const SuperArm& arm) const;

  std::shared_ptr<const Environment> env_;
  const GapProfile* profile_;
  std::uint64_t seed_;
  std::size_t mc_samples_;
  bool exact_;
  mutable std::mutex mutex_;
  mutable std::map<SuperArmId, McEstimate> cache_;
};

/// A fully resolved experiment.
struct Experiment {
  Config config;
  std::shared_ptr<const Environment> env;
  std::shared_ptr<const Oracle> oracle;  // null for policies that need none
  std::optional<GapProfile> profile;
  std::optional<ClusterScheme> clusters;
  std::shared_ptr<RewardTable> rewards;
  std::string policy_kind;
  ExplorationRule exploration;
  double policy_c = 2.0;
  double gamma = 0.0;
  double alpha = 1.0;
  double beta = 1.0;
  double opt = 0.0;
  std::string opt_source;  // "exact", "monte_carlo" or "oracle"
  double opt_std_error = 0.0;
  std::uint64_t horizon = 0;
  std::uint64_t repetitions = 0;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::vector<std::uint64_t> checkpoints;
  bool trajectories = true;
  bool diagnostics = false;
  std::filesystem::path output;
  std::vector<std::string> bound_names;
  std::vector<std::string> notes;

  double baseline() const { return alpha * beta * opt; }
  std::unique_ptr<Policy> make_policy() const;
};

std::shared_ptr<const Environment> build_environment(const Config& config);
std::shared_ptr<const Oracle> build_oracle(const Config& config,
                                           std::shared_ptr<const Environment> env);
Experiment build_experiment(const Config& config);

/// Problems with the config and the instance it describes; empty when valid.
std::vector<std::string> validate_config(const Config& config);

/// Bound reports of the experiment at horizon n (those that apply).
std::vector<BoundReport> compute_bounds(const Experiment& experiment, std::uint64_t n);

struct RunSummary {
  std::uint64_t run_id = 0;
  std::uint64_t env_seed = 0;
  std::uint64_t policy_seed = 0;
  std::vector<double> checkpoint_regret;  // aligned with Experiment::checkpoints
  double total_regret = 0.0;
  std::uint64_t oracle_failures = 0;
  std::vector<std::uint64_t> counters;
  std::vector<std::uint64_t> cluster_counters;
  std::uint64_t bad_rounds = 0;
  std::uint64_t non_nice_rounds = 0;
  std::filesystem::path trajectory;
};

struct AggregateRow {
  std::uint64_t t = 0;
  double mean = 0.0;
  double std_error = 0.0;
  std::uint64_t runs = 0;
};

struct ExperimentResult {
  std::vector<RunSummary> runs;
  std::vector<AggregateRow> aggregate;
  std::vector<BoundReport> bounds;  // at the horizon
  std::filesystem::path output;
};

/// Plays all repetitions. Writes files only when `write_files` is set.
ExperimentResult execute(const Experiment& experiment, bool write_files = true);

/// Builds and executes; optional overrides of the base seed and output path.
ExperimentResult run_experiment(const Config& config, std::optional<std::uint64_t> seed = {},
                                std::optional<std::filesystem::path> output = {});

/// Writes bounds.csv (every checkpoint) and bounds.json for the config.
std::vector<BoundReport> emit_bounds(const Config& config, std::optional<std::filesystem::path> output = {});

/// Runs the config once per value of `axis` into out/<axis>=<value>/ and
/// writes out/index.csv. Throws ConfigError for unknown axes or no values.
std::vector<std::filesystem::path> sweep(const Config& config, const std::string& axis,
                                         const std::vector<std::string>& values,
                                         std::optional<std::filesystem::path> output = {});

/// "%.12g"
std::string format_number(double value);

}  // namespace cmab
