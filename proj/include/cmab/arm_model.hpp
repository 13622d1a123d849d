#pragma once

// Core vocabulary of combinatorial bandits with probabilistically triggered
// arms: expectation vectors, super arms, triggering sets, play feedback and
// the environment contract every problem instance implements.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cmab/rng.hpp"

namespace cmab {

using ArmIndex = std::size_t;
using SuperArmId = std::uint64_t;

/// Per-arm expectations. Used for the true means, empirical means and the
/// optimistic indices handed to oracles. Entries are expected in [0, 1] but
/// are not checked on construction; see in_unit_range() / validate_instance().
class ExpectationVector {
 public:
  ExpectationVector() = default;
  explicit ExpectationVector(std::vector<double> values) : values_(std::move(values)) {}
  ExpectationVector(std::initializer_list<double> values) : values_(values) {}
  ExpectationVector(std::size_t m, double fill) : values_(m, fill) {}

  std::size_t size() const { return values_.size(); }
  double operator[](ArmIndex i) const { return values_[i]; }
  double& operator[](ArmIndex i) { return values_[i]; }
  std::span<const double> values() const { return values_; }
  const std::vector<double>& vector() const { return values_; }

  bool in_unit_range() const;

  friend bool operator==(const ExpectationVector&, const ExpectationVector&) = default;

 private:
  std::vector<double> values_;
};

/// A playable action. `members` is the base-arm set S (sorted, unique).
/// `nodes` names the chosen graph nodes for graph instances (left nodes for
/// coverage, seeds for cascades); `weights` holds w_{i,S} aligned with
/// `members` for linear instances.
struct SuperArm {
  SuperArmId id = 0;
  std::vector<ArmIndex> members;
  std::vector<std::size_t> nodes;
  std::vector<double> weights;

  friend bool operator==(const SuperArm&, const SuperArm&) = default;
};

struct TriggerProbability {
  ArmIndex arm;
  double probability;
  friend bool operator==(const TriggerProbability&, const TriggerProbability&) = default;
};

/// Arms with positive trigger probability p_i^S when `super_arm` is played,
/// sorted by arm index.
struct TriggeringSet {
  SuperArmId super_arm = 0;
  std::vector<TriggerProbability> entries;

  std::vector<ArmIndex> arms() const;
  /// p_i^S, zero when the arm is absent.
  double probability(ArmIndex arm) const;
};

struct Observation {
  ArmIndex arm;
  double outcome;
  friend bool operator==(const Observation&, const Observation&) = default;
};

/// What a policy sees after one round: outcomes of the triggered arms only.
struct PlayFeedback {
  std::uint64_t round = 0;
  SuperArmId super_arm = 0;
  std::vector<Observation> observations;  // sorted by arm, one per triggered arm
  double reward = 0.0;

  std::vector<ArmIndex> triggered() const;
  friend bool operator==(const PlayFeedback&, const PlayFeedback&) = default;
};

enum class OracleQuality { alpha_approx, failed };

struct OracleResult {
  SuperArm super_arm;
  OracleQuality quality = OracleQuality::alpha_approx;
};

struct OracleDescriptor {
  double alpha = 1.0;
  double beta = 1.0;
  std::string name;
};

/// f(x) = gamma * x^omega
struct PowerLaw {
  double gamma = 1.0;
  double omega = 1.0;
};

/// Bounded smoothness function with its inverse.
struct Smoothness {
  std::function<double(double)> f;
  std::function<double(double)> f_inverse;
  std::optional<PowerLaw> power;

  static Smoothness power_law(double gamma, double omega);
  static Smoothness linear(double gamma) { return power_law(gamma, 1.0); }
  static Smoothness identity() { return power_law(1.0, 1.0); }
};

class UnknownSuperArm : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A problem instance: true means, the super-arm space, the triggering
/// mechanism and reward semantics.
///
/// Plays are two-step: sample_world() draws one outcome per base arm, and
/// realize() decides from that world which arms get triggered and what the
/// reward is. Only outcomes of triggered arms leave realize().
class Environment {
 public:
  explicit Environment(ExpectationVector means) : means_(std::move(means)) {}
  virtual ~Environment() = default;

  virtual std::string_view kind() const = 0;

  std::size_t num_arms() const { return means_.size(); }
  const ExpectationVector& means() const { return means_; }

  bool has_explicit_space() const { return explicit_; }
  std::span<const SuperArm> super_arms() const { return super_arms_; }
  /// Throws UnknownSuperArm.
  const SuperArm& super_arm(SuperArmId id) const;
  /// Throws UnknownSuperArm unless `arm` is (by id and members) in the space.
  virtual void require_member(const SuperArm& arm) const;

  /// One Bernoulli(mu_i) outcome per base arm, drawn in arm order.
  virtual std::vector<double> sample_world(Rng& rng) const;
  virtual PlayFeedback realize(const SuperArm& arm, std::span<const double> world) const = 0;
  PlayFeedback play(const SuperArm& arm, Rng& rng) const;

  /// r_mu(S).
  virtual double expected_reward(const ExpectationVector& mu, const SuperArm& arm) const = 0;

  /// Triggering set with p_i^S under the true means.
  virtual TriggeringSet triggering_set(const SuperArm& arm) const;

  /// Structural superset of the triggering set that does not depend on any
  /// means (what a learner may know about the instance).
  virtual std::vector<ArmIndex> reachable_arms(const SuperArm& arm) const;

  virtual Smoothness smoothness() const = 0;

  /// Whether super arms must have nonempty member sets.
  virtual bool requires_nonempty_members() const { return true; }

  /// Instance-specific consistency checks, reported as messages.
  virtual std::vector<std::string> structural_violations() const { return {}; }

 protected:
  void set_super_arms(std::vector<SuperArm> arms, bool explicit_space = true);

  ExpectationVector means_;
  std::vector<SuperArm> super_arms_;
  bool explicit_ = true;
};

/// All invariant violations of an instance; empty when it is well formed.
std::vector<std::string> validate_instance(const Environment& env);

/// p_i = min over super arms whose triggering set holds i of p_i^S.
/// Arms that no super arm can trigger get std::nullopt.
std::vector<std::optional<double>> minimum_trigger_probabilities(const Environment& env);

}  // namespace cmab
