#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cmab/arm_model.hpp"
#include "cmab/rng.hpp"

namespace cmab {

/// Raised when exact world enumeration would exceed the configured edge cap.
class EnumerationCapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Above this many super arms the space is kept implicit.
inline constexpr std::uint64_t kExplicitSpaceLimit = 200000;

/// n choose k; throws std::overflow_error past 2^64.
std::uint64_t binomial(std::uint64_t n, std::uint64_t k);
/// All k-subsets of {0..n-1} in lexicographic order.
std::vector<std::vector<std::size_t>> k_subsets(std::size_t n, std::size_t k);
/// Position of a sorted k-subset in the lexicographic order of k_subsets(n, k).
std::uint64_t lex_rank(std::span<const std::size_t> subset, std::size_t n);

/// m arms, super arms are singletons {i} with id i, reward = outcome.
class ClassicalMab final : public Environment {
 public:
  explicit ClassicalMab(ExpectationVector means);

  std::string_view kind() const override { return "classical"; }
  PlayFeedback realize(const SuperArm& arm, std::span<const double> world) const override;
  double expected_reward(const ExpectationVector& mu, const SuperArm& arm) const override;
  Smoothness smoothness() const override { return Smoothness::identity(); }
};

struct WeightedEdge {
  std::size_t from;
  std::size_t to;
  double probability;
};

/// Probabilistic maximum coverage on a bipartite graph (L, R, E). Base arms
/// are the edges in input order; the super arm of S ⊆ L with |S| = k is E_S,
/// the edges incident to S. Reward counts right nodes with a live edge.
class PmcInstance final : public Environment {
 public:
  PmcInstance(std::size_t left, std::size_t right, std::vector<WeightedEdge> edges, std::size_t k);
  /// Uses the given super arms verbatim (loading and consistency testing).
  PmcInstance(std::size_t left, std::size_t right, std::vector<WeightedEdge> edges, std::size_t k,
              std::vector<SuperArm> super_arms);

  std::string_view kind() const override { return "pmc"; }
  PlayFeedback realize(const SuperArm& arm, std::span<const double> world) const override;
  double expected_reward(const ExpectationVector& mu, const SuperArm& arm) const override;
  Smoothness smoothness() const override;
  std::vector<std::string> structural_violations() const override;
  void require_member(const SuperArm& arm) const override;

  std::size_t left_count() const { return left_; }
  std::size_t right_count() const { return right_; }
  std::size_t budget() const { return k_; }
  const std::vector<WeightedEdge>& edges() const { return edges_; }
  /// Edge indices incident to left node u.
  const std::vector<ArmIndex>& edges_of(std::size_t u) const { return incident_[u]; }
  /// E_S for a set of left nodes, sorted.
  std::vector<ArmIndex> incident_edges(std::span<const std::size_t> nodes) const;
  /// The super arm whose node set is `nodes` (sorted, size k).
  SuperArm super_arm_for_nodes(std::vector<std::size_t> nodes) const;

 private:
  void build_index();

  std::size_t left_;
  std::size_t right_;
  std::vector<WeightedEdge> edges_;
  std::size_t k_;
  std::vector<std::vector<ArmIndex>> incident_;
};

struct LinearSuperArmSpec {
  std::vector<ArmIndex> members;
  std::vector<double> weights;
};

/// Linear rewards: a finite list of super arms, each with coefficients
/// w_{i,S}; reward = sum_i w_{i,S} X_i. Two super arms may share members.
class LinearInstance final : public Environment {
 public:
  LinearInstance(ExpectationVector means, std::vector<LinearSuperArmSpec> super_arms);

  std::string_view kind() const override { return "linear"; }
  PlayFeedback realize(const SuperArm& arm, std::span<const double> world) const override;
  double expected_reward(const ExpectationVector& mu, const SuperArm& arm) const override;
  Smoothness smoothness() const override;
  std::vector<std::string> structural_violations() const override;

  /// L = max |S|
  std::size_t max_size() const { return max_size_; }
  /// a_max = max w_{i,S}
  double max_weight() const { return max_weight_; }

 private:
  std::size_t max_size_ = 0;
  double max_weight_ = 0.0;
};

/// Top-k of m: every k-subset with unit weights.
LinearInstance make_top_k_linear(ExpectationVector means, std::size_t k);

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
};

/// Exact cascade statistics of a seed set: influence spread and, per edge,
/// the probability that its source gets activated.
struct CascadeAnalysis {
  double spread = 0.0;
  std::vector<double> trigger_probability;
};

/// Independent-cascade influence maximization. Base arms are directed edges
/// (input order); the super arm of a seed set S with |S| = k has members
/// E_S = out-edges of S. Seeds count as activated.
class IcInstance final : public Environment {
 public:
  static constexpr std::size_t kDefaultExactCap = 18;

  IcInstance(std::size_t nodes, std::vector<WeightedEdge> edges, std::size_t k,
             std::size_t exact_cap = kDefaultExactCap);

  std::string_view kind() const override { return "ic"; }
  PlayFeedback realize(const SuperArm& arm, std::span<const double> world) const override;
  /// Exact influence spread; throws EnumerationCapExceeded above the cap.
  double expected_reward(const ExpectationVector& mu, const SuperArm& arm) const override;
  TriggeringSet triggering_set(const SuperArm& arm) const override;
  std::vector<ArmIndex> reachable_arms(const SuperArm& arm) const override;
  Smoothness smoothness() const override;
  bool requires_nonempty_members() const override { return false; }
  std::vector<std::string> structural_violations() const override;
  void require_member(const SuperArm& arm) const override;

  std::size_t node_count() const { return nodes_; }
  std::size_t budget() const { return k_; }
  std::size_t exact_cap() const { return exact_cap_; }
  bool exact_available() const { return edges_.size() <= exact_cap_; }
  const std::vector<WeightedEdge>& edges() const { return edges_; }

  /// Enumerates every live/blocked pattern of the edges reachable from the
  /// seeds. Throws EnumerationCapExceeded when |E| exceeds the cap.
  CascadeAnalysis analyze(const ExpectationVector& mu, std::span<const std::size_t> seeds) const;
  /// p_i^S under mu; edges with probability zero are omitted.
  TriggeringSet trigger_probabilities(const ExpectationVector& mu, const SuperArm& arm) const;
  /// Average spread over `sims` simulated cascades.
  McEstimate spread_mc(const ExpectationVector& mu, std::span<const std::size_t> seeds,
                       std::size_t sims, Rng& rng) const;
  /// Nodes activated in a world of live (outcome 1) edges.
  std::vector<char> activated(std::span<const std::size_t> seeds,
                              std::span<const double> world) const;
  /// Out-edges of a seed set, sorted.
  std::vector<ArmIndex> out_edges(std::span<const std::size_t> seeds) const;
  /// Edges whose source is reachable from the seeds in the full graph.
  std::vector<ArmIndex> reachable_edges(std::span<const std::size_t> seeds) const;
  SuperArm super_arm_for_nodes(std::vector<std::size_t> nodes) const;

 private:
  std::size_t nodes_;
  std::vector<WeightedEdge> edges_;
  std::size_t k_;
  std::size_t exact_cap_;
  std::vector<std::vector<ArmIndex>> out_;
};

/// Random coverage instance; every left node gets at least one edge and
/// probabilities are uniform on [p_min, p_max].
PmcInstance make_random_pmc(std::size_t left, std::size_t right, std::size_t k, double density,
                            double p_min, double p_max, Rng& rng);

/// Random directed graph with `edge_count` distinct non-loop edges.
IcInstance make_random_ic(std::size_t nodes, std::size_t edge_count, std::size_t k, double p_min,
                          double p_max, Rng& rng,
                          std::size_t exact_cap = IcInstance::kDefaultExactCap);

}  // namespace cmab
