#pragma once

#include <cstddef>
#include <memory>

#include "cmab/arm_model.hpp"
#include "cmab/environments.hpp"
#include "cmab/rng.hpp"

namespace cmab {

/// Offline solver: maps an expectation vector to a super arm with the
/// (alpha, beta) guarantee recorded in its descriptor.
class Oracle {
 public:
  virtual ~Oracle() = default;
  virtual const OracleDescriptor& descriptor() const = 0;
  /// Deterministic given (mu, state of rng).
  virtual OracleResult select(const ExpectationVector& mu, Rng& rng) const = 0;
};

/// argmax over an explicit super-arm list, lowest id on ties. (1, 1).
class ExactOracle final : public Oracle {
 public:
  explicit ExactOracle(std::shared_ptr<const Environment> env);
  const OracleDescriptor& descriptor() const override { return descriptor_; }
  OracleResult select(const ExpectationVector& mu, Rng& rng) const override;

 private:
  std::shared_ptr<const Environment> env_;
  OracleDescriptor descriptor_;
};

/// Greedy coverage: k rounds adding the left node with the largest marginal
/// gain, lowest node id on ties. (1 - 1/e, 1).
class GreedyPmcOracle final : public Oracle {
 public:
  explicit GreedyPmcOracle(std::shared_ptr<const Environment> env);
  const OracleDescriptor& descriptor() const override { return descriptor_; }
  OracleResult select(const ExpectationVector& mu, Rng& rng) const override;

 private:
  std::shared_ptr<const PmcInstance> env_;
  OracleDescriptor descriptor_;
};

/// Greedy seed selection on Monte-Carlo spread estimates. Every candidate is
/// scored on the same `sims` simulated worlds (common random numbers drawn
/// from one child seed of the caller's rng). (1 - 1/e - epsilon, 1 - 1/|E|).
class GreedyImOracle final : public Oracle {
 public:
  GreedyImOracle(std::shared_ptr<const Environment> env, std::size_t sims, double epsilon);
  const OracleDescriptor& descriptor() const override { return descriptor_; }
  OracleResult select(const ExpectationVector& mu, Rng& rng) const override;

 private:
  std::shared_ptr<const IcInstance> env_;
  std::size_t sims_;
  OracleDescriptor descriptor_;
};

/// argmax of sum_i w_{i,S} mu_i over the linear instance's list. (1, 1).
class LinearOracle final : public Oracle {
 public:
  explicit LinearOracle(std::shared_ptr<const Environment> env);
  const OracleDescriptor& descriptor() const override { return descriptor_; }
  OracleResult select(const ExpectationVector& mu, Rng& rng) const override;

 private:
  std::shared_ptr<const LinearInstance> env_;
  OracleDescriptor descriptor_;
};

enum class FailureMode { uniform_random, worst };

/// Realizes beta < 1: delegates with probability beta_override, otherwise
/// returns a deliberately poor super arm flagged as failed.
class BetaFailureWrapper final : public Oracle {
 public:
  BetaFailureWrapper(std::shared_ptr<const Oracle> inner, std::shared_ptr<const Environment> env,
                     double beta_override, FailureMode mode);
  const OracleDescriptor& descriptor() const override { return descriptor_; }
  OracleResult select(const ExpectationVector& mu, Rng& rng) const override;

 private:
  std::shared_ptr<const Oracle> inner_;
  std::shared_ptr<const Environment> env_;
  double beta_override_;
  FailureMode mode_;
  OracleDescriptor descriptor_;
};

}  // namespace cmab
