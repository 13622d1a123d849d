#include "cmab/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace cmab {
namespace {

constexpr double kGreedyAlpha = 1.0 - 1.0 / std::numbers::e;

template <typename T>
std::shared_ptr<const T> require_kind(const std::shared_ptr<const Environment>& env,
                                      std::string_view oracle) {
  auto typed = std::dynamic_pointer_cast<const T>(env);
  if (!typed)
    throw std::invalid_argument(std::string(oracle) + " oracle does not support instance kind '" +
                                std::string(env ? env->kind() : "null") + "'");
  return typed;
}

}  // namespace

// ---------------------------------------------------------------- exact

ExactOracle::ExactOracle(std::shared_ptr<const Environment> env) : env_(std::move(env)) {
  if (!env_->has_explicit_space())
    throw std::invalid_argument("exact oracle needs an explicit super-arm space");
  if (env_->super_arms().empty()) throw std::invalid_argument("exact oracle: empty super-arm space");
  descriptor_ = {1.0, 1.0, "exact"};
}

OracleResult ExactOracle::select(const ExpectationVector& mu, Rng&) const {
  const auto arms = env_->super_arms();
  std::size_t best = 0;
  double best_value = env_->expected_reward(mu, arms[0]);
  for (std::size_t j = 1; j < arms.size(); ++j) {
    const double v = env_->expected_reward(mu, arms[j]);
    if (v > best_value) {
      best_value = v;
      best = j;
    }
  }
  return {arms[best], OracleQuality::alpha_approx};
}

// ---------------------------------------------------------------- greedy coverage

GreedyPmcOracle::GreedyPmcOracle(std::shared_ptr<const Environment> env)
    : env_(require_kind<PmcInstance>(env, "greedy_pmc")) {
  descriptor_ = {kGreedyAlpha, 1.0, "greedy_pmc"};
}

OracleResult GreedyPmcOracle::select(const ExpectationVector& mu, Rng&) const {
  const PmcInstance& pmc = *env_;
  const auto& edges = pmc.edges();
  // miss[v]: probability that v is still uncovered by the chosen nodes.
  std::vector<double> miss(pmc.right_count(), 1.0);
  std::vector<char> chosen(pmc.left_count(), 0);
  std::vector<std::size_t> nodes;
  for (std::size_t round = 0; round < pmc.budget(); ++round) {
    std::size_t best = pmc.left_count();
    double best_gain = -1.0;
    for (std::size_t u = 0; u < pmc.left_count(); ++u) {
      if (chosen[u]) continue;
      // Gain of adding u: sum_v miss[v] * (1 - prod_{(u,v)} (1 - mu)).
      double gain = 0.0;
      std::vector<std::pair<std::size_t, double>> local;
      for (ArmIndex e : pmc.edges_of(u)) {
        auto it = std::find_if(local.begin(), local.end(),
                               [&](const auto& q) { return q.first == edges[e].to; });
        if (it == local.end())
          local.emplace_back(edges[e].to, 1.0 - mu[e]);
        else
          it->second *= 1.0 - mu[e];
      }
      for (const auto& [v, stay] : local) gain += miss[v] * (1.0 - stay);
      if (gain > best_gain) {
        best_gain = gain;
        best = u;
      }
    }
    chosen[best] = 1;
    nodes.push_back(best);
    for (ArmIndex e : pmc.edges_of(best)) miss[edges[e].to] *= 1.0 - mu[e];
  }
  std::sort(nodes.begin(), nodes.end());
  return {pmc.super_arm_for_nodes(std::move(nodes)), OracleQuality::alpha_approx};
}

// ---------------------------------------------------------------- greedy influence

GreedyImOracle::GreedyImOracle(std::shared_ptr<const Environment> env, std::size_t sims,
                               double epsilon)
    : env_(require_kind<IcInstance>(env, "greedy_im")), sims_(sims) {
  if (sims_ < 1) throw std::invalid_argument("greedy_im oracle needs sims >= 1");
  if (!(epsilon >= 0.0) || epsilon >= kGreedyAlpha)
    throw std::invalid_argument("greedy_im oracle needs 0 <= epsilon < 1 - 1/e");
  const double edges = static_cast<double>(env_->edges().size());
  const double beta = env_->edges().size() >= 2 ? 1.0 - 1.0 / edges : 1.0;
  descriptor_ = {kGreedyAlpha - epsilon, beta, "greedy_im"};
}

OracleResult GreedyImOracle::select(const ExpectationVector& mu, Rng& rng) const {
  const IcInstance& ic = *env_;
  const std::uint64_t world_seed = rng.split();
  std::vector<std::size_t> seeds;
  std::vector<char> chosen(ic.node_count(), 0);
  for (std::size_t round = 0; round < ic.budget(); ++round) {
    std::size_t best = ic.node_count();
    double best_value = -1.0;
    for (std::size_t u = 0; u < ic.node_count(); ++u) {
      if (chosen[u]) continue;
      auto candidate = seeds;
      candidate.push_back(u);
      Rng worlds(world_seed);
      const double value = ic.spread_mc(mu, candidate, sims_, worlds).mean;
      if (value > best_value) {
        best_value = value;
        best = u;
      }
    }
    chosen[best] = 1;
    seeds.push_back(best);
  }
  std::sort(seeds.begin(), seeds.end());
  return {ic.super_arm_for_nodes(std::move(seeds)), OracleQuality::alpha_approx};
}

// ---------------------------------------------------------------- linear

LinearOracle::LinearOracle(std::shared_ptr<const Environment> env)
    : env_(require_kind<LinearInstance>(env, "linear")) {
  if (env_->super_arms().empty()) throw std::invalid_argument("linear oracle: empty super-arm list");
  descriptor_ = {1.0, 1.0, "linear"};
}

OracleResult LinearOracle::select(const ExpectationVector& mu, Rng&) const {
  const auto arms = env_->super_arms();
  std::size_t best = 0;
  double best_value = -1.0;
  for (std::size_t j = 0; j < arms.size(); ++j) {
    double v = 0.0;
    for (std::size_t q = 0; q < arms[j].members.size(); ++q)
      v += arms[j].weights[q] * mu[arms[j].members[q]];
    if (v > best_value) {
      best_value = v;
      best = j;
    }
  }
  return {arms[best], OracleQuality::alpha_approx};
}

// ---------------------------------------------------------------- failure injection

BetaFailureWrapper::BetaFailureWrapper(std::shared_ptr<const Oracle> inner,
                                       std::shared_ptr<const Environment> env,
                                       double beta_override, FailureMode mode)
    : inner_(std::move(inner)), env_(std::move(env)), beta_override_(beta_override), mode_(mode) {
  if (!(beta_override_ > 0.0 && beta_override_ <= 1.0))
    throw std::invalid_argument("beta_override must lie in (0, 1]");
  if (beta_override_ < 1.0 && !env_->has_explicit_space())
    throw std::invalid_argument("failure injection needs an explicit super-arm space");
  descriptor_ = inner_->descriptor();
  descriptor_.beta *= beta_override_;
  descriptor_.name += mode_ == FailureMode::worst ? "+fail_worst" : "+fail_uniform";
}

OracleResult BetaFailureWrapper::select(const ExpectationVector& mu, Rng& rng) const {
  if (beta_override_ >= 1.0) return inner_->select(mu, rng);
  if (rng.uniform() < beta_override_) return inner_->select(mu, rng);

  const auto arms = env_->super_arms();
  if (mode_ == FailureMode::uniform_random)
    return {arms[rng.uniform_index(arms.size())], OracleQuality::failed};
  std::size_t worst = 0;
  double worst_value = env_->expected_reward(mu, arms[0]);
  for (std::size_t j = 1; j < arms.size(); ++j) {
    const double v = env_->expected_reward(mu, arms[j]);
    if (v < worst_value) {
      worst_value = v;
      worst = j;
    }
  }
  return {arms[worst], OracleQuality::failed};
}

}  // namespace cmab
