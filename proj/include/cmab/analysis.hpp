#pragma once

// Ground-truth gap quantities, regret-bound evaluators, approximation regret
// accounting and concentration-inequality tails.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cmab/arm_model.hpp"
#include "cmab/policies.hpp"

namespace cmab {

struct BadSuperArm {
  SuperArmId id;
  double gap;  // Delta_S = alpha * opt - r_mu(S)
};

struct ArmGaps {
  /// Delta^{i,1} >= ... >= Delta^{i,K_i} over bad super arms triggering i.
  std::vector<double> gaps;
  double delta_min = 0.0;
  double delta_max = 0.0;
  /// p_i; nullopt when no super arm can trigger the arm.
  std::optional<double> trigger_probability;

  std::size_t bad_count() const { return gaps.size(); }
};

/// Everything the distribution-dependent bounds need about one instance
/// under its true means.
struct GapProfile {
  double opt = 0.0;
  SuperArmId optimal = 0;
  double alpha = 1.0;
  std::vector<double> rewards;                // r_mu(S) per super arm id
  std::vector<TriggeringSet> triggering;      // per super arm id
  std::vector<BadSuperArm> bad_set;           // ordered by id
  std::vector<char> bad;                      // per super arm id
  std::vector<ArmGaps> arms;
  double delta_min = 0.0;  // over arms with K_i > 0; 0 when there are none
  double delta_max = 0.0;
  double p_star = 1.0;     // min p_i over triggerable arms

  std::size_t num_arms() const { return arms.size(); }
  bool is_bad(SuperArmId id) const { return bad[id] != 0; }
  /// p_i with untriggerable arms reported as 1.
  double p(ArmIndex i) const { return arms[i].trigger_probability.value_or(1.0); }
};

/// Exhaustive evaluation over the explicit super-arm space. Throws
/// std::invalid_argument for implicit spaces; IC instances above their
/// enumeration cap throw EnumerationCapExceeded.
GapProfile compute_gap_profile(const Environment& env, double alpha);
/// Same, with rewards and trigger probabilities taken under `true_mu`.
GapProfile compute_gap_profile(const Environment& env, const ExpectationVector& true_mu,
                               double alpha);

struct ClusterGaps {
  std::vector<double> gaps;  // descending
  double delta_min = 0.0;    // 0 when K_C = 0
  double delta_max = 0.0;
};

struct ClusterGapProfile {
  std::vector<ClusterGaps> clusters;
  double delta_max = 0.0;
  std::size_t num_arms = 0;
  double alpha = 1.0;
};

/// Cluster-level gaps: bad super arms S with C in g(S).
ClusterGapProfile compute_cluster_profile(const GapProfile& profile, const ClusterScheme& scheme);

struct BoundTerm {
  std::string label;
  double value;
};

struct BoundReport {
  std::string name;
  std::uint64_t horizon = 0;
  double value = 0.0;
  std::vector<BoundTerm> terms;
  std::map<std::string, double> parameters;
};

/// l_n(Delta, p): 6 ln n / f^{-1}(Delta)^2 when p = 1, otherwise
/// max(12 ln n / (f^{-1}(Delta)^2 p), 24 ln n / p).
double sampling_threshold(double delta, double p, std::uint64_t n, const Smoothness& smoothness);

/// Integral of l_n(x, p) over [lo, hi]: closed form for power-law f,
/// adaptive quadrature otherwise.
double sampling_threshold_integral(double lo, double hi, double p, std::uint64_t n,
                                   const Smoothness& smoothness);
/// Always by quadrature (relative tolerance 1e-8).
double sampling_threshold_integral_numeric(double lo, double hi, double p, std::uint64_t n,
                                           const Smoothness& smoothness);

/// Distribution-dependent bound for CUCB with any (alpha, beta) oracle.
BoundReport theorem1_bound(const GapProfile& profile, const Smoothness& smoothness,
                           std::uint64_t n);

/// Distribution-independent bound for f(x) = gamma x^omega.
BoundReport theorem2_bound(std::size_t m, std::uint64_t n, double gamma, double omega,
                           double p_star, std::span<const double> p, double delta_max);
BoundReport theorem2_bound(const GapProfile& profile, const Smoothness& smoothness,
                           std::uint64_t n);

/// Bound for CUCB run with a non-default exploration rule (all p_i = 1).
BoundReport exploration_variant_bound(const GapProfile& profile, const Smoothness& smoothness,
                                      std::uint64_t n, const ExplorationRule& rule);

/// Bound for CUCB with clustered initialization.
BoundReport clustered_bound(const ClusterGapProfile& profile, const Smoothness& smoothness,
                            std::uint64_t n);

/// (gamma ln n + 3 zeta(c) m + gamma^3) Delta_max
BoundReport epsgreedy_bound(double gamma, double c, std::size_t m, std::uint64_t n,
                            double delta_max);

/// 2(c+1) sum_{Delta_i > 0} ln n / Delta_i + (1 + 2 zeta(c)) sum_j Delta_j
BoundReport ucb1_improved_bound(double c, std::span<const double> gaps, std::uint64_t n);

/// sum_{Delta_i > 0} 6 ln n / Delta_i + (pi^2/3 + 1) m Delta_max
BoundReport classical_mab_bound(std::span<const double> gaps, std::uint64_t n);

/// Coverage: sum 12 |E|^2 ln n / Delta^i_min + (pi^2/3 + 1) |E| Delta_max.
BoundReport pmc_bound(const GapProfile& profile, std::size_t edges, std::uint64_t n);
/// Coverage: sqrt(24 |E|^3 n ln n) + (pi^2/3 + 1) |E| Delta_max.
BoundReport pmc_distribution_free_bound(std::size_t edges, std::uint64_t n, double delta_max);
/// Linear: sum 12 a_max^2 L^2 ln n / Delta^i_min + (pi^2/3 + 1) m Delta_max.
BoundReport linear_bound(const GapProfile& profile, double a_max, std::size_t max_size,
                         std::uint64_t n);
/// Linear: a_max L sqrt(24 m n ln n) + (pi^2/3 + 1) m Delta_max.
BoundReport linear_distribution_free_bound(double a_max, std::size_t max_size, std::size_t m,
                                           std::uint64_t n, double delta_max);
/// Influence: sum 24 |V|^2 |E|^2 ln n / (Delta^i_min p_i) + (pi^2/2 + 1) |E| Delta_max.
BoundReport im_bound(const GapProfile& profile, std::size_t nodes, std::size_t edges,
                     std::uint64_t n);
/// Influence: |V| sqrt(48 |E|^3 n ln n / p*) + (pi^2/2 + 1) |E| Delta_max.
BoundReport im_distribution_free_bound(std::size_t nodes, std::size_t edges, double p_star,
                                       std::uint64_t n, double delta_max);

/// Riemann zeta for c > 1 (series plus Euler-Maclaurin tail, |error| < 1e-10).
double riemann_zeta(double c);

/// Per-round and cumulative (alpha, beta)-approximation regret against
/// alpha * beta * opt, charged with expected (not realized) rewards.
class RegretLedger {
 public:
  RegretLedger(double alpha, double beta, double opt);
  void record(double expected_reward);

  double baseline() const { return baseline_; }
  std::size_t rounds() const { return per_round_.size(); }
  const std::vector<double>& per_round() const { return per_round_; }
  const std::vector<double>& cumulative() const { return cumulative_; }
  double total() const { return cumulative_.empty() ? 0.0 : cumulative_.back(); }

 private:
  double baseline_;
  std::vector<double> per_round_;
  std::vector<double> cumulative_;
};

/// 2 exp(-2 delta^2 / n): bound on P(|Y - n mu| >= delta).
double hoeffding_tail(std::uint64_t n, double delta);
/// exp(-delta^2 n mu / 2): bound on P(Y <= (1 - delta) n mu), 0 <= delta < 1.
double chernoff_tail(std::uint64_t n, double mu, double delta);
/// exp(-(t^2/2) / (variance_sum + M t / 3)): bound on P(|sum X_i| > t).
double bernstein_tail(std::uint64_t n, double bound_m, double variance_sum, double t);

}  // namespace cmab
