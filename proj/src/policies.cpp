#include "cmab/policies.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "cmab/analysis.hpp"
#include "cmab/environments.hpp"

namespace cmab {

void ArmStatistics::observe(ArmIndex i, double outcome) {
  if (!(outcome >= 0.0 && outcome <= 1.0))
    throw std::invalid_argument("outcome " + std::to_string(outcome) + " of arm " +
                                std::to_string(i) + " lies outside [0, 1]");
  sums_[i] += outcome;
  ++counts_[i];
  means_[i] = sums_[i] / static_cast<double>(counts_[i]);
}

void ArmStatistics::apply(const PlayFeedback& feedback) {
  if (feedback.round != round_)
    throw std::invalid_argument("feedback for round " + std::to_string(feedback.round) +
                                " arrived in round " + std::to_string(round_));
  for (const Observation& o : feedback.observations) {
    if (o.arm >= counts_.size()) throw std::out_of_range("observation for unknown arm");
    observe(o.arm, o.outcome);
  }
}

double ExplorationRule::y(std::uint64_t t) const {
  const double ln = std::log(static_cast<double>(std::max<std::uint64_t>(t, 1)));
  if (kind == Kind::log_scaled) return coefficient * ln;
  if (t < 2) return 0.0;
  return std::max(0.0, 2.0 * ln + std::log(ln));
}

double ucb_adjust(double mu_hat, std::uint64_t plays, std::uint64_t t) {
  return ucb_adjust(mu_hat, plays, t, ExplorationRule::standard());
}

double ucb_adjust(double mu_hat, std::uint64_t plays, std::uint64_t t, const ExplorationRule& rule) {
  if (plays == 0) return 1.0;
  return std::min(mu_hat + std::sqrt(rule.y(t) / (2.0 * static_cast<double>(plays))), 1.0);
}

// ---------------------------------------------------------------- CUCB

CucbPolicy::CucbPolicy(std::size_t m, std::shared_ptr<const Oracle> oracle, ExplorationRule rule,
                       std::vector<SuperArm> init_schedule)
    : Policy(m), oracle_(std::move(oracle)), rule_(rule), schedule_(std::move(init_schedule)),
      last_index_(m, 1.0) {
  if (!oracle_) throw std::invalid_argument("CUCB needs an oracle");
  if (rule_.kind == ExplorationRule::Kind::log_scaled && !(rule_.coefficient > 0.0))
    throw std::invalid_argument("exploration coefficient must be positive");
}

std::string CucbPolicy::name() const { return schedule_.empty() ? "cucb" : "cucb_clustered"; }

ExpectationVector CucbPolicy::optimistic_index(std::uint64_t t) const {
  ExpectationVector bar(stats_.num_arms(), 1.0);
  for (ArmIndex i = 0; i < bar.size(); ++i)
    bar[i] = ucb_adjust(stats_.means()[i], stats_.count(i), t, rule_);
  return bar;
}

OracleResult CucbPolicy::select(Rng& rng) {
  const std::uint64_t t = stats_.advance();
  last_index_ = optimistic_index(t);
  if (t <= schedule_.size()) return {schedule_[t - 1], OracleQuality::alpha_approx};
  return oracle_->select(last_index_, rng);
}

// ---------------------------------------------------------------- eps-greedy

EpsGreedyPolicy::EpsGreedyPolicy(std::shared_ptr<const Environment> env,
                                 std::shared_ptr<const Oracle> oracle, double gamma)
    : Policy(env->num_arms()), env_(std::move(env)), oracle_(std::move(oracle)), gamma_(gamma) {
  if (!oracle_) throw std::invalid_argument("eps-greedy needs an oracle");
  if (!(gamma_ >= 0.0)) throw std::invalid_argument("eps-greedy needs gamma >= 0");
  if (!env_->has_explicit_space())
    throw std::invalid_argument("eps-greedy exploration needs an explicit super-arm space");
  const auto arms = env_->super_arms();
  const std::size_t none = arms.size();
  cover_.assign(env_->num_arms(), none);
  for (std::size_t j = 0; j < arms.size(); ++j)
    for (ArmIndex i : env_->reachable_arms(arms[j]))
      if (cover_[i] == none) cover_[i] = j;
  for (ArmIndex i = 0; i < cover_.size(); ++i)
    if (cover_[i] == none)
      throw std::invalid_argument("arm " + std::to_string(i) + " lies in no triggering set");
}

double EpsGreedyPolicy::epsilon(std::uint64_t t) const {
  return std::min(gamma_ / static_cast<double>(t), 1.0);
}

OracleResult EpsGreedyPolicy::select(Rng& rng) {
  const std::uint64_t t = stats_.advance();
  last_explored_ = rng.uniform() < epsilon(t);
  if (last_explored_) {
    const ArmIndex i = rng.uniform_index(stats_.num_arms());
    return {env_->super_arms()[cover_[i]], OracleQuality::alpha_approx};
  }
  return oracle_->select(stats_.means(), rng);
}

double eps_greedy_gamma(double c, std::size_t m, const Smoothness& smoothness, double delta_min) {
  if (!(c > 1.0)) throw std::invalid_argument("eps-greedy gamma needs c > 1");
  if (!(delta_min > 0.0)) throw std::invalid_argument("eps-greedy gamma needs delta_min > 0");
  const double md = static_cast<double>(m);
  const double inv = smoothness.f_inverse(delta_min / 2.0);
  return std::max(3.0 * md * (c + 1.0) / (inv * inv), 20.0 * c * md);
}

// ---------------------------------------------------------------- clusters

ClusterScheme ClusterScheme::from_clusters(const Environment& env,
                                           std::vector<std::vector<ArmIndex>> clusters) {
  if (!env.has_explicit_space())
    throw std::invalid_argument("cluster schemes need an explicit super-arm space");
  ClusterScheme scheme;
  for (auto& c : clusters) {
    if (c.empty()) throw std::invalid_argument("empty cluster");
    std::sort(c.begin(), c.end());
    if (std::adjacent_find(c.begin(), c.end()) != c.end())
      throw std::invalid_argument("cluster with repeated arms");
    if (c.back() >= env.num_arms()) throw std::invalid_argument("cluster arm out of range");
  }
  scheme.clusters = std::move(clusters);
  for (const SuperArm& s : env.super_arms()) {
    std::vector<std::size_t> group;
    std::vector<ArmIndex> covered;
    for (std::size_t c = 0; c < scheme.clusters.size(); ++c) {
      const auto& arms = scheme.clusters[c];
      if (std::includes(s.members.begin(), s.members.end(), arms.begin(), arms.end())) {
        group.push_back(c);
        covered.insert(covered.end(), arms.begin(), arms.end());
      }
    }
    std::sort(covered.begin(), covered.end());
    covered.erase(std::unique(covered.begin(), covered.end()), covered.end());
    if (covered != s.members)
      throw std::invalid_argument("super arm " + std::to_string(s.id) +
                                  " is not a union of clusters");
    scheme.groups.push_back(std::move(group));
  }
  return scheme;
}

ClusterScheme ClusterScheme::per_node(const Environment& env) {
  std::vector<std::vector<ArmIndex>> clusters;
  if (const auto* pmc = dynamic_cast<const PmcInstance*>(&env)) {
    for (std::size_t u = 0; u < pmc->left_count(); ++u)
      if (!pmc->edges_of(u).empty()) clusters.push_back(pmc->edges_of(u));
  } else if (const auto* ic = dynamic_cast<const IcInstance*>(&env)) {
    for (std::size_t u = 0; u < ic->node_count(); ++u) {
      const std::size_t seed[] = {u};
      auto edges = ic->out_edges(seed);
      if (!edges.empty()) clusters.push_back(std::move(edges));
    }
  } else {
    for (ArmIndex i = 0; i < env.num_arms(); ++i) clusters.push_back({i});
  }
  return from_clusters(env, std::move(clusters));
}

std::vector<SuperArm> clustered_init_schedule(const Environment& env, const ClusterScheme& scheme) {
  const auto arms = env.super_arms();
  if (scheme.groups.size() != arms.size())
    throw std::invalid_argument("cluster scheme does not match the super-arm space");
  std::vector<SuperArm> schedule;
  for (std::size_t c = 0; c < scheme.clusters.size(); ++c) {
    std::size_t j = 0;
    while (j < arms.size() &&
           std::find(scheme.groups[j].begin(), scheme.groups[j].end(), c) == scheme.groups[j].end())
      ++j;
    if (j == arms.size())
      throw std::invalid_argument("cluster " + std::to_string(c) + " belongs to no super arm");
    schedule.push_back(arms[j]);
  }
  return schedule;
}

// ---------------------------------------------------------------- UCB1 variant

Ucb1ImprovedPolicy::Ucb1ImprovedPolicy(std::shared_ptr<const Environment> env, double c)
    : Policy(env->num_arms()), env_(std::move(env)), c_(c) {
  if (!dynamic_cast<const ClassicalMab*>(env_.get()))
    throw std::invalid_argument("ucb1_improved needs a classical instance");
  if (!(c_ > 1.0)) throw std::invalid_argument("ucb1_improved needs c > 1");
}

ArmIndex Ucb1ImprovedPolicy::argmax_index(std::uint64_t t) const {
  const double ln = std::log(static_cast<double>(t));
  ArmIndex best = 0;
  double best_value = -1.0;
  for (ArmIndex i = 0; i < stats_.num_arms(); ++i) {
    const double plays = static_cast<double>(stats_.count(i));
    const double value = stats_.means()[i] + std::sqrt((c_ + 1.0) * ln / (2.0 * plays));
    if (value > best_value) {
      best_value = value;
      best = i;
    }
  }
  return best;
}

OracleResult Ucb1ImprovedPolicy::select(Rng&) {
  const std::uint64_t t = stats_.advance();
  const ArmIndex i = t <= stats_.num_arms() ? static_cast<ArmIndex>(t - 1) : argmax_index(t);
  return {env_->super_arm(i), OracleQuality::alpha_approx};
}

// ---------------------------------------------------------------- uniform

UniformPolicy::UniformPolicy(std::shared_ptr<const Environment> env)
    : Policy(env->num_arms()), env_(std::move(env)) {
  if (!env_->has_explicit_space() || env_->super_arms().empty())
    throw std::invalid_argument("uniform policy needs a nonempty explicit super-arm space");
}

OracleResult UniformPolicy::select(Rng& rng) {
  stats_.advance();
  const auto arms = env_->super_arms();
  return {arms[rng.uniform_index(arms.size())], OracleQuality::alpha_approx};
}

// ---------------------------------------------------------------- diagnostics

CounterDiagnostics::CounterDiagnostics(const GapProfile& profile)
    : profile_(&profile), counters_(profile.num_arms(), 0) {}

void CounterDiagnostics::record(SuperArmId played) {
  last_.reset();
  if (!profile_->is_bad(played)) return;
  ++bad_rounds_;
  const auto& entries = profile_->triggering[played].entries;
  if (entries.empty()) return;
  ArmIndex best = entries.front().arm;
  double best_value = static_cast<double>(counters_[best]) * profile_->p(best);
  for (const auto& e : entries) {
    const double v = static_cast<double>(counters_[e.arm]) * profile_->p(e.arm);
    if (v < best_value) {
      best_value = v;
      best = e.arm;
    }
  }
  ++counters_[best];
  last_ = best;
}

ClusterCounterDiagnostics::ClusterCounterDiagnostics(const GapProfile& profile,
                                                     const ClusterScheme& scheme)
    : profile_(&profile), scheme_(&scheme), counters_(scheme.clusters.size(), 0) {}

void ClusterCounterDiagnostics::record(std::uint64_t round, SuperArmId played) {
  if (round <= scheme_->clusters.size() || !profile_->is_bad(played)) return;
  const auto& group = scheme_->groups[played];
  if (group.empty()) return;
  std::size_t best = group.front();
  for (std::size_t c : group)
    if (counters_[c] < counters_[best]) best = c;
  ++counters_[best];
}

NiceRunCheck nice_run_check(const ArmStatistics& stats, const ExpectationVector& true_mu,
                            std::uint64_t t) {
  if (true_mu.size() != stats.num_arms())
    throw std::invalid_argument("nice-run check: mean vector has the wrong length");
  NiceRunCheck out;
  const double ln = std::log(static_cast<double>(std::max<std::uint64_t>(t, 1)));
  for (ArmIndex i = 0; i < stats.num_arms(); ++i) {
    const std::uint64_t plays = stats.count(i);
    const double radius =
        plays == 0 ? 1.0 : std::min(std::sqrt(3.0 * ln / (2.0 * static_cast<double>(plays))), 1.0);
    const double deviation = plays == 0 ? 0.0 : std::abs(stats.means()[i] - true_mu[i]);
    out.radii.push_back(radius);
    out.deviations.push_back(deviation);
    if (deviation > radius) out.nice = false;
  }
  return out;
}

}  // namespace cmab
