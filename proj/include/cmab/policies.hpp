#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cmab/arm_model.hpp"
#include "cmab/oracles.hpp"
#include "cmab/rng.hpp"

namespace cmab {

struct GapProfile;

/// Per-arm play counts T_i and empirical means, plus the round counter t.
/// Unplayed arms keep the mean at its initial value.
class ArmStatistics {
 public:
  explicit ArmStatistics(std::size_t m, double initial_mean = 1.0)
      : counts_(m, 0), sums_(m, 0.0), means_(m, initial_mean) {}

  std::size_t num_arms() const { return counts_.size(); }
  std::uint64_t round() const { return round_; }
  std::uint64_t count(ArmIndex i) const { return counts_[i]; }
  const std::vector<std::uint64_t>& counts() const { return counts_; }
  const ExpectationVector& means() const { return means_; }

  std::uint64_t advance() { return ++round_; }
  /// Throws std::invalid_argument for outcomes outside [0, 1].
  void observe(ArmIndex i, double outcome);
  /// Checks the round and records every observation of the feedback.
  void apply(const PlayFeedback& feedback);

 private:
  std::uint64_t round_ = 0;
  std::vector<std::uint64_t> counts_;
  std::vector<double> sums_;
  ExpectationVector means_;
};

/// Confidence radius rule sqrt(y_t / (2 T_i)).
///   log_scaled: y_t = coefficient * ln t (coefficient 3 is the default CUCB rule)
///   log_log:    y_t = 2 ln t + ln ln t (clamped at 0 for small t)
struct ExplorationRule {
  enum class Kind { log_scaled, log_log };
  Kind kind = Kind::log_scaled;
  double coefficient = 3.0;

  static ExplorationRule standard() { return {}; }
  /// y_t = (1 + c) ln t
  static ExplorationRule with_c(double c) { return {Kind::log_scaled, 1.0 + c}; }
  static ExplorationRule log_log() { return {Kind::log_log, 0.0}; }

  double y(std::uint64_t t) const;
};

/// min(mu_hat + sqrt(3 ln t / (2 T)), 1); 1 when T = 0.
double ucb_adjust(double mu_hat, std::uint64_t plays, std::uint64_t t);
double ucb_adjust(double mu_hat, std::uint64_t plays, std::uint64_t t, const ExplorationRule& rule);

class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string name() const = 0;
  /// Starts the next round and proposes the super arm to play.
  virtual OracleResult select(Rng& rng) = 0;
  virtual void update(const PlayFeedback& feedback) { stats_.apply(feedback); }
  const ArmStatistics& stats() const { return stats_; }

 protected:
  explicit Policy(std::size_t m, double initial_mean = 1.0) : stats_(m, initial_mean) {}
  ArmStatistics stats_;
};

/// CUCB: the oracle is called on the optimistic vector bar-mu every round,
/// with no initialization phase. An optional schedule of super arms is
/// played first (clustered initialization).
class CucbPolicy final : public Policy {
 public:
  CucbPolicy(std::size_t m, std::shared_ptr<const Oracle> oracle,
             ExplorationRule rule = ExplorationRule::standard(),
             std::vector<SuperArm> init_schedule = {});

  std::string name() const override;
  OracleResult select(Rng& rng) override;

  /// The vector handed to the oracle in the latest round.
  const ExpectationVector& last_index() const { return last_index_; }
  ExpectationVector optimistic_index(std::uint64_t t) const;

 private:
  std::shared_ptr<const Oracle> oracle_;
  ExplorationRule rule_;
  std::vector<SuperArm> schedule_;
  ExpectationVector last_index_;
};

/// epsilon_t-greedy with epsilon_t = min(gamma / t, 1). Exploration picks an
/// arm uniformly and plays the lowest-id super arm whose (structural)
/// triggering set contains it; exploitation calls the oracle on mu_hat.
class EpsGreedyPolicy final : public Policy {
 public:
  /// Throws std::invalid_argument if some arm lies in no triggering set.
  EpsGreedyPolicy(std::shared_ptr<const Environment> env, std::shared_ptr<const Oracle> oracle,
                  double gamma);

  std::string name() const override { return "eps_greedy"; }
  OracleResult select(Rng& rng) override;

  double gamma() const { return gamma_; }
  double epsilon(std::uint64_t t) const;
  bool last_explored() const { return last_explored_; }

 private:
  std::shared_ptr<const Environment> env_;
  std::shared_ptr<const Oracle> oracle_;
  double gamma_;
  std::vector<std::size_t> cover_;  // arm -> position of the lowest-id covering super arm
  bool last_explored_ = false;
};

/// Smallest gamma meeting both exploration constraints of the
/// epsilon_t-greedy analysis:
///   gamma >= 3 m (c+1) / f^{-1}(delta_min / 2)^2   and   gamma >= 20 c m.
double eps_greedy_gamma(double c, std::size_t m, const Smoothness& smoothness, double delta_min);

/// Arms grouped into clusters; every super arm is a union of clusters g(S).
struct ClusterScheme {
  std::vector<std::vector<ArmIndex>> clusters;
  /// g(S) per super arm position: indices into `clusters`.
  std::vector<std::vector<std::size_t>> groups;

  /// g(S) = {C : C ⊆ S}; throws when some super arm is not the union of its
  /// clusters.
  static ClusterScheme from_clusters(const Environment& env,
                                     std::vector<std::vector<ArmIndex>> clusters);
  /// Edges of each left node (coverage) / out-edges of each node (cascade);
  /// singletons otherwise. Empty clusters are dropped.
  static ClusterScheme per_node(const Environment& env);
};

/// One super arm per cluster (lowest id containing it), |U| rounds.
std::vector<SuperArm> clustered_init_schedule(const Environment& env, const ClusterScheme& scheme);

/// UCB1 with adjustment sqrt((c+1) ln t / (2 T_i)) for classical bandits.
/// Plays every arm once, then the argmax index (lowest arm on ties).
class Ucb1ImprovedPolicy final : public Policy {
 public:
  Ucb1ImprovedPolicy(std::shared_ptr<const Environment> env, double c);

  std::string name() const override { return "ucb1_improved"; }
  OracleResult select(Rng& rng) override;
  /// Index argmax for the current statistics at round t (all arms played).
  ArmIndex argmax_index(std::uint64_t t) const;

 private:
  std::shared_ptr<const Environment> env_;
  double c_;
};

/// Plays a uniformly random super arm every round.
class UniformPolicy final : public Policy {
 public:
  explicit UniformPolicy(std::shared_ptr<const Environment> env);
  std::string name() const override { return "uniform"; }
  OracleResult select(Rng& rng) override;

 private:
  std::shared_ptr<const Environment> env_;
};

/// Analysis counters N_i: each bad round increments the counter of the arm
/// in the played triggering set minimizing N_j * p_j (lowest index on ties).
class CounterDiagnostics {
 public:
  explicit CounterDiagnostics(const GapProfile& profile);
  void record(SuperArmId played);
  const std::vector<std::uint64_t>& counters() const { return counters_; }
  std::uint64_t bad_rounds() const { return bad_rounds_; }
  /// Arm incremented by the latest bad round, if any.
  std::optional<ArmIndex> last_incremented() const { return last_; }

 private:
  const GapProfile* profile_;
  std::vector<std::uint64_t> counters_;
  std::uint64_t bad_rounds_ = 0;
  std::optional<ArmIndex> last_;
};

/// Cluster counters N_C for clustered CUCB: each bad round after the
/// initialization schedule increments the smallest counter in g(S_t).
class ClusterCounterDiagnostics {
 public:
  ClusterCounterDiagnostics(const GapProfile& profile, const ClusterScheme& scheme);
  void record(std::uint64_t round, SuperArmId played);
  const std::vector<std::uint64_t>& counters() const { return counters_; }

 private:
  const GapProfile* profile_;
  const ClusterScheme* scheme_;
  std::vector<std::uint64_t> counters_;
};

struct NiceRunCheck {
  bool nice = true;
  std::vector<double> deviations;  // |mu_hat_i - mu_i|, 0 for unplayed arms
  std::vector<double> radii;       // Lambda_{i,t}
};

/// Whether every empirical mean is within min(sqrt(3 ln t / (2 T_i)), 1) of
/// the true mean, using the statistics before round t is played.
NiceRunCheck nice_run_check(const ArmStatistics& stats, const ExpectationVector& true_mu,
                            std::uint64_t t);

}  // namespace cmab
