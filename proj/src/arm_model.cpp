#include "cmab/arm_model.hpp"

#include <algorithm>
#include <cmath>

namespace cmab {

bool ExpectationVector::in_unit_range() const {
  return std::all_of(values_.begin(), values_.end(),
                     [](double v) { return v >= 0.0 && v <= 1.0; });
}

std::vector<ArmIndex> TriggeringSet::arms() const {
  std::vector<ArmIndex> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(e.arm);
  return out;
}

double TriggeringSet::probability(ArmIndex arm) const {
  auto it = std::lower_bound(entries.begin(), entries.end(), arm,
                             [](const TriggerProbability& e, ArmIndex a) { return e.arm < a; });
  return (it != entries.end() && it->arm == arm) ? it->probability : 0.0;
}

std::vector<ArmIndex> PlayFeedback::triggered() const {
  std::vector<ArmIndex> out;
  out.reserve(observations.size());
  for (const auto& o : observations) out.push_back(o.arm);
  return out;
}

Smoothness Smoothness::power_law(double gamma, double omega) {
  if (!(gamma > 0.0) || !(omega > 0.0) || omega > 1.0)
    throw std::invalid_argument("power-law smoothness needs gamma > 0 and 0 < omega <= 1");
  Smoothness s;
  s.power = PowerLaw{gamma, omega};
  s.f = [gamma, omega](double x) { return gamma * std::pow(x, omega); };
  s.f_inverse = [gamma, omega](double y) { return std::pow(y / gamma, 1.0 / omega); };
  return s;
}

const SuperArm& Environment::super_arm(SuperArmId id) const {
  if (!explicit_ || id >= super_arms_.size())
    throw UnknownSuperArm("unknown super arm id " + std::to_string(id));
  return super_arms_[id];
}

void Environment::require_member(const SuperArm& arm) const {
  const SuperArm& known = super_arm(arm.id);
  if (known.members != arm.members || known.nodes != arm.nodes || known.weights != arm.weights)
    throw UnknownSuperArm("super arm " + std::to_string(arm.id) + " does not match the instance");
}

std::vector<double> Environment::sample_world(Rng& rng) const {
  std::vector<double> world(num_arms());
  for (ArmIndex i = 0; i < world.size(); ++i) world[i] = rng.bernoulli(means_[i]) ? 1.0 : 0.0;
  return world;
}

PlayFeedback Environment::play(const SuperArm& arm, Rng& rng) const {
  require_member(arm);
  const auto world = sample_world(rng);
  return realize(arm, world);
}

TriggeringSet Environment::triggering_set(const SuperArm& arm) const {
  TriggeringSet ts;
  ts.super_arm = arm.id;
  for (ArmIndex i : arm.members) ts.entries.push_back({i, 1.0});
  return ts;
}

std::vector<ArmIndex> Environment::reachable_arms(const SuperArm& arm) const {
  return arm.members;
}

void Environment::set_super_arms(std::vector<SuperArm> arms, bool explicit_space) {
  super_arms_ = std::move(arms);
  explicit_ = explicit_space;
}

std::vector<std::string> validate_instance(const Environment& env) {
  std::vector<std::string> out;
  const std::size_t m = env.num_arms();
  for (ArmIndex i = 0; i < m; ++i) {
    const double v = env.means()[i];
    if (!(v >= 0.0 && v <= 1.0)) out.push_back("mean out of range at arm " + std::to_string(i));
  }
  if (!env.has_explicit_space()) {
    auto extra = env.structural_violations();
    out.insert(out.end(), extra.begin(), extra.end());
    return out;
  }
  if (env.super_arms().empty()) out.push_back("super-arm space is empty");

  for (std::size_t pos = 0; pos < env.super_arms().size(); ++pos) {
    const SuperArm& s = env.super_arms()[pos];
    const std::string tag = "super arm " + std::to_string(s.id);
    if (s.id != pos) out.push_back(tag + ": id does not match its position " + std::to_string(pos));
    if (s.members.empty() && env.requires_nonempty_members()) out.push_back(tag + ": empty member set");
    if (!std::is_sorted(s.members.begin(), s.members.end()) ||
        std::adjacent_find(s.members.begin(), s.members.end()) != s.members.end())
      out.push_back(tag + ": members not sorted and unique");
    if (std::any_of(s.members.begin(), s.members.end(), [m](ArmIndex i) { return i >= m; })) {
      out.push_back(tag + ": member outside [m]");
      continue;
    }
    if (!s.weights.empty() && s.weights.size() != s.members.size())
      out.push_back(tag + ": weights not aligned with members");

    if (!env.means().in_unit_range()) continue;  // triggering probabilities are only meaningful for valid means
    TriggeringSet ts;
    try {
      ts = env.triggering_set(s);
    } catch (const std::exception& e) {
      out.push_back(tag + ": triggering set unavailable (" + e.what() + ")");
      continue;
    }
    bool consistent = true;
    for (ArmIndex i : s.members)
      if (ts.probability(i) != 1.0) consistent = false;
    for (const auto& e : ts.entries)
      if (!(e.probability > 0.0 && e.probability <= 1.0) || e.arm >= m) consistent = false;
    if (!consistent) out.push_back(tag + ": triggering set inconsistent");
  }
  auto extra = env.structural_violations();
  out.insert(out.end(), extra.begin(), extra.end());
  return out;
}

std::vector<std::optional<double>> minimum_trigger_probabilities(const Environment& env) {
  std::vector<std::optional<double>> p(env.num_arms());
  for (const SuperArm& s : env.super_arms()) {
    for (const auto& e : env.triggering_set(s).entries) {
      if (!p[e.arm] || e.probability < *p[e.arm]) p[e.arm] = e.probability;
    }
  }
  return p;
}

}  // namespace cmab
