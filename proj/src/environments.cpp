#include "cmab/environments.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <utility>

namespace cmab {
namespace {

ExpectationVector edge_means(const std::vector<WeightedEdge>& edges) {
  std::vector<double> mu;
  mu.reserve(edges.size());
  for (const auto& e : edges) mu.push_back(e.probability);
  return ExpectationVector(std::move(mu));
}

void require_sorted_subset(const std::vector<std::size_t>& nodes, std::size_t n, std::size_t k,
                           std::string_view what) {
  if (nodes.size() != k)
    throw UnknownSuperArm(std::string(what) + ": node set must have exactly " + std::to_string(k) +
                          " elements");
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    if (nodes[j] >= n || (j > 0 && nodes[j] <= nodes[j - 1]))
      throw UnknownSuperArm(std::string(what) + ": node set must be sorted, unique and in range");
  }
}

}  // namespace

__extension__ using Wide = unsigned __int128;

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  Wide acc = 1;
  for (std::uint64_t j = 1; j <= k; ++j) {
    acc = acc * (n - k + j) / j;
    if (acc > UINT64_MAX) throw std::overflow_error("binomial coefficient exceeds 64 bits");
  }
  return static_cast<std::uint64_t>(acc);
}

std::vector<std::vector<std::size_t>> k_subsets(std::size_t n, std::size_t k) {
  std::vector<std::vector<std::size_t>> out;
  if (k > n) return out;
  std::vector<std::size_t> cur(k);
  std::iota(cur.begin(), cur.end(), std::size_t{0});
  while (true) {
    out.push_back(cur);
    std::size_t j = k;
    while (j > 0 && cur[j - 1] == n - k + (j - 1)) --j;
    if (j == 0) break;
    ++cur[j - 1];
    for (std::size_t q = j; q < k; ++q) cur[q] = cur[q - 1] + 1;
  }
  return out;
}

std::uint64_t lex_rank(std::span<const std::size_t> subset, std::size_t n) {
  // Count the subsets that precede `subset` position by position.
  const std::size_t k = subset.size();
  std::uint64_t rank = 0;
  std::size_t prev = 0;
  for (std::size_t j = 0; j < k; ++j) {
    const std::size_t start = (j == 0) ? 0 : prev + 1;
    for (std::size_t v = start; v < subset[j]; ++v) rank += binomial(n - 1 - v, k - 1 - j);
    prev = subset[j];
  }
  return rank;
}

// ---------------------------------------------------------------- classical

ClassicalMab::ClassicalMab(ExpectationVector means) : Environment(std::move(means)) {
  std::vector<SuperArm> arms(num_arms());
  for (ArmIndex i = 0; i < arms.size(); ++i) {
    arms[i].id = i;
    arms[i].members = {i};
  }
  set_super_arms(std::move(arms));
}

PlayFeedback ClassicalMab::realize(const SuperArm& arm, std::span<const double> world) const {
  PlayFeedback fb;
  fb.super_arm = arm.id;
  const ArmIndex i = arm.members.front();
  fb.observations.push_back({i, world[i]});
  fb.reward = world[i];
  return fb;
}

double ClassicalMab::expected_reward(const ExpectationVector& mu, const SuperArm& arm) const {
  return mu[arm.members.front()];
}

// ---------------------------------------------------------------- coverage

PmcInstance::PmcInstance(std::size_t left, std::size_t right, std::vector<WeightedEdge> edges,
                         std::size_t k)
    : Environment(edge_means(edges)), left_(left), right_(right), edges_(std::move(edges)), k_(k) {
  build_index();
  if (k_ == 0 || k_ > left_) throw std::invalid_argument("pmc budget k must be in [1, |L|]");
  const bool explicit_space = binomial(left_, k_) <= kExplicitSpaceLimit;
  std::vector<SuperArm> arms;
  if (explicit_space) {
    for (auto& nodes : k_subsets(left_, k_)) {
      SuperArm s;
      s.id = arms.size();
      s.members = incident_edges(nodes);
      s.nodes = std::move(nodes);
      arms.push_back(std::move(s));
    }
  }
  set_super_arms(std::move(arms), explicit_space);
}

PmcInstance::PmcInstance(std::size_t left, std::size_t right, std::vector<WeightedEdge> edges,
                         std::size_t k, std::vector<SuperArm> super_arms)
    : Environment(edge_means(edges)), left_(left), right_(right), edges_(std::move(edges)), k_(k) {
  build_index();
  set_super_arms(std::move(super_arms), true);
}

void PmcInstance::build_index() {
  incident_.assign(left_, {});
  for (ArmIndex e = 0; e < edges_.size(); ++e) {
    if (edges_[e].from >= left_ || edges_[e].to >= right_)
      throw std::invalid_argument("pmc edge " + std::to_string(e) + " has an endpoint out of range");
    incident_[edges_[e].from].push_back(e);
  }
}

std::vector<ArmIndex> PmcInstance::incident_edges(std::span<const std::size_t> nodes) const {
  std::vector<ArmIndex> out;
  for (std::size_t u : nodes) out.insert(out.end(), incident_[u].begin(), incident_[u].end());
  std::sort(out.begin(), out.end());
  return out;
}

SuperArm PmcInstance::super_arm_for_nodes(std::vector<std::size_t> nodes) const {
  require_sorted_subset(nodes, left_, k_, "pmc");
  const std::uint64_t id = lex_rank(nodes, left_);
  if (has_explicit_space()) return super_arm(id);
  SuperArm s;
  s.id = id;
  s.members = incident_edges(nodes);
  s.nodes = std::move(nodes);
  return s;
}

void PmcInstance::require_member(const SuperArm& arm) const {
  if (has_explicit_space()) {
    Environment::require_member(arm);
    return;
  }
  require_sorted_subset(arm.nodes, left_, k_, "pmc");
  if (arm.id != lex_rank(arm.nodes, left_) || arm.members != incident_edges(arm.nodes))
    throw UnknownSuperArm("pmc super arm does not match its node set");
}

PlayFeedback PmcInstance::realize(const SuperArm& arm, std::span<const double> world) const {
  PlayFeedback fb;
  fb.super_arm = arm.id;
  std::vector<char> covered(right_, 0);
  for (ArmIndex e : arm.members) {
    fb.observations.push_back({e, world[e]});
    if (world[e] > 0.0) covered[edges_[e].to] = 1;
  }
  fb.reward = static_cast<double>(std::count(covered.begin(), covered.end(), 1));
  return fb;
}

double PmcInstance::expected_reward(const ExpectationVector& mu, const SuperArm& arm) const {
  // sum over v in R of 1 - prod_{(u,v) in E_S} (1 - mu_(u,v))
  std::vector<double> miss(right_, 1.0);
  std::vector<char> touched(right_, 0);
  for (ArmIndex e : arm.members) {
    miss[edges_[e].to] *= 1.0 - mu[e];
    touched[edges_[e].to] = 1;
  }
  double r = 0.0;
  for (std::size_t v = 0; v < right_; ++v)
    if (touched[v]) r += 1.0 - miss[v];
  return r;
}

Smoothness PmcInstance::smoothness() const {
  return Smoothness::linear(static_cast<double>(std::max<std::size_t>(edges_.size(), 1)));
}

std::vector<std::string> PmcInstance::structural_violations() const {
  std::vector<std::string> out;
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (ArmIndex e = 0; e < edges_.size(); ++e)
    if (!seen.insert({edges_[e].from, edges_[e].to}).second)
      out.push_back("pmc: duplicate edge at arm " + std::to_string(e));
  for (const SuperArm& s : super_arms()) {
    const std::string tag = "super arm " + std::to_string(s.id);
    bool nodes_ok = s.nodes.size() == k_;
    for (std::size_t j = 0; nodes_ok && j < s.nodes.size(); ++j)
      nodes_ok = s.nodes[j] < left_ && (j == 0 || s.nodes[j] > s.nodes[j - 1]);
    if (!nodes_ok) {
      out.push_back(tag + ": left-node set is not a sorted " + std::to_string(k_) + "-subset of L");
      continue;
    }
    if (s.members != incident_edges(s.nodes)) out.push_back(tag + ": triggering set inconsistent");
  }
  return out;
}

// ---------------------------------------------------------------- linear

LinearInstance::LinearInstance(ExpectationVector means, std::vector<LinearSuperArmSpec> specs)
    : Environment(std::move(means)) {
  if (specs.empty()) throw std::invalid_argument("linear instance needs at least one super arm");
  std::vector<SuperArm> arms;
  arms.reserve(specs.size());
  for (auto& spec : specs) {
    if (spec.weights.size() != spec.members.size())
      throw std::invalid_argument("linear super arm: one weight per member required");
    std::vector<std::size_t> order(spec.members.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return spec.members[a] < spec.members[b]; });
    SuperArm s;
    s.id = arms.size();
    for (std::size_t j : order) {
      s.members.push_back(spec.members[j]);
      s.weights.push_back(spec.weights[j]);
      max_weight_ = std::max(max_weight_, spec.weights[j]);
    }
    max_size_ = std::max(max_size_, s.members.size());
    arms.push_back(std::move(s));
  }
  set_super_arms(std::move(arms));
}

PlayFeedback LinearInstance::realize(const SuperArm& arm, std::span<const double> world) const {
  PlayFeedback fb;
  fb.super_arm = arm.id;
  for (std::size_t j = 0; j < arm.members.size(); ++j) {
    const ArmIndex i = arm.members[j];
    fb.observations.push_back({i, world[i]});
    fb.reward += arm.weights[j] * world[i];
  }
  return fb;
}

double LinearInstance::expected_reward(const ExpectationVector& mu, const SuperArm& arm) const {
  double r = 0.0;
  for (std::size_t j = 0; j < arm.members.size(); ++j) r += arm.weights[j] * mu[arm.members[j]];
  return r;
}

Smoothness LinearInstance::smoothness() const {
  const double gamma = max_weight_ * static_cast<double>(max_size_);
  return Smoothness::linear(gamma > 0.0 ? gamma : 1.0);
}

std::vector<std::string> LinearInstance::structural_violations() const {
  std::vector<std::string> out;
  for (const SuperArm& s : super_arms())
    for (double w : s.weights)
      if (!(w >= 0.0)) {
        out.push_back("super arm " + std::to_string(s.id) + ": negative coefficient");
        break;
      }
  return out;
}

LinearInstance make_top_k_linear(ExpectationVector means, std::size_t k) {
  std::vector<LinearSuperArmSpec> specs;
  for (auto& subset : k_subsets(means.size(), k))
    specs.push_back({subset, std::vector<double>(subset.size(), 1.0)});
  return LinearInstance(std::move(means), std::move(specs));
}

// ---------------------------------------------------------------- cascade

IcInstance::IcInstance(std::size_t nodes, std::vector<WeightedEdge> edges, std::size_t k,
                       std::size_t exact_cap)
    : Environment(edge_means(edges)), nodes_(nodes), edges_(std::move(edges)), k_(k),
      exact_cap_(exact_cap) {
  if (k_ == 0 || k_ > nodes_) throw std::invalid_argument("ic seed budget k must be in [1, |V|]");
  out_.assign(nodes_, {});
  for (ArmIndex e = 0; e < edges_.size(); ++e) {
    if (edges_[e].from >= nodes_ || edges_[e].to >= nodes_)
      throw std::invalid_argument("ic edge " + std::to_string(e) + " has an endpoint out of range");
    out_[edges_[e].from].push_back(e);
  }
  const bool explicit_space = binomial(nodes_, k_) <= kExplicitSpaceLimit;
  std::vector<SuperArm> arms;
  if (explicit_space) {
    for (auto& seeds : k_subsets(nodes_, k_)) {
      SuperArm s;
      s.id = arms.size();
      s.members = out_edges(seeds);
      s.nodes = std::move(seeds);
      arms.push_back(std::move(s));
    }
  }
  set_super_arms(std::move(arms), explicit_space);
}

std::vector<ArmIndex> IcInstance::out_edges(std::span<const std::size_t> seeds) const {
  std::vector<ArmIndex> out;
  for (std::size_t u : seeds) out.insert(out.end(), out_[u].begin(), out_[u].end());
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<ArmIndex> IcInstance::reachable_edges(std::span<const std::size_t> seeds) const {
  std::vector<char> seen(nodes_, 0);
  std::vector<std::size_t> stack(seeds.begin(), seeds.end());
  for (std::size_t s : seeds) seen[s] = 1;
  std::vector<ArmIndex> out;
  while (!stack.empty()) {
    const std::size_t u = stack.back();
    stack.pop_back();
    for (ArmIndex e : out_[u]) {
      out.push_back(e);
      const std::size_t v = edges_[e].to;
      if (!seen[v]) {
        seen[v] = 1;
        stack.push_back(v);
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<ArmIndex> IcInstance::reachable_arms(const SuperArm& arm) const {
  return reachable_edges(arm.nodes);
}

SuperArm IcInstance::super_arm_for_nodes(std::vector<std::size_t> nodes) const {
  require_sorted_subset(nodes, nodes_, k_, "ic");
  const std::uint64_t id = lex_rank(nodes, nodes_);
  if (has_explicit_space()) return super_arm(id);
  SuperArm s;
  s.id = id;
  s.members = out_edges(nodes);
  s.nodes = std::move(nodes);
  return s;
}

void IcInstance::require_member(const SuperArm& arm) const {
  if (has_explicit_space()) {
    Environment::require_member(arm);
    return;
  }
  require_sorted_subset(arm.nodes, nodes_, k_, "ic");
  if (arm.id != lex_rank(arm.nodes, nodes_) || arm.members != out_edges(arm.nodes))
    throw UnknownSuperArm("ic super arm does not match its seed set");
}

std::vector<char> IcInstance::activated(std::span<const std::size_t> seeds,
                                        std::span<const double> world) const {
  std::vector<char> active(nodes_, 0);
  std::vector<std::size_t> frontier;
  for (std::size_t s : seeds)
    if (!active[s]) {
      active[s] = 1;
      frontier.push_back(s);
    }
  while (!frontier.empty()) {
    const std::size_t u = frontier.back();
    frontier.pop_back();
    for (ArmIndex e : out_[u]) {
      const std::size_t v = edges_[e].to;
      if (world[e] > 0.0 && !active[v]) {
        active[v] = 1;
        frontier.push_back(v);
      }
    }
  }
  return active;
}

PlayFeedback IcInstance::realize(const SuperArm& arm, std::span<const double> world) const {
  // Live-edge view of the cascade: an edge is attempted exactly when its
  // source activates, and its outcome is that single activation attempt.
  const auto active = activated(arm.nodes, world);
  PlayFeedback fb;
  fb.super_arm = arm.id;
  for (ArmIndex e = 0; e < edges_.size(); ++e)
    if (active[edges_[e].from]) fb.observations.push_back({e, world[e]});
  fb.reward = static_cast<double>(std::count(active.begin(), active.end(), 1));
  return fb;
}

CascadeAnalysis IcInstance::analyze(const ExpectationVector& mu,
                                    std::span<const std::size_t> seeds) const {
  if (edges_.size() > exact_cap_)
    throw EnumerationCapExceeded("exact cascade enumeration needs |E| <= " +
                                 std::to_string(exact_cap_) + ", instance has " +
                                 std::to_string(edges_.size()));
  // Edges outside the reachable part never fire, so enumerating the
  // reachable ones covers every world.
  const auto relevant = reachable_edges(seeds);
  const std::size_t r = relevant.size();
  std::vector<std::size_t> bit(edges_.size(), 0);
  for (std::size_t j = 0; j < r; ++j) bit[relevant[j]] = j;

  CascadeAnalysis out;
  out.trigger_probability.assign(edges_.size(), 0.0);
  std::vector<double> world(edges_.size(), 0.0);
  const std::uint64_t worlds = std::uint64_t{1} << r;
  for (std::uint64_t mask = 0; mask < worlds; ++mask) {
    double w = 1.0;
    for (std::size_t j = 0; j < r; ++j) {
      const double p = mu[relevant[j]];
      const bool live = (mask >> j) & 1U;
      w *= live ? p : 1.0 - p;
      world[relevant[j]] = live ? 1.0 : 0.0;
    }
    if (w == 0.0) continue;
    const auto active = activated(seeds, world);
    out.spread += w * static_cast<double>(std::count(active.begin(), active.end(), 1));
    for (ArmIndex e : relevant)
      if (active[edges_[e].from]) out.trigger_probability[e] += w;
  }
  return out;
}

double IcInstance::expected_reward(const ExpectationVector& mu, const SuperArm& arm) const {
  return analyze(mu, arm.nodes).spread;
}

TriggeringSet IcInstance::trigger_probabilities(const ExpectationVector& mu,
                                                const SuperArm& arm) const {
  const auto a = analyze(mu, arm.nodes);
  TriggeringSet ts;
  ts.super_arm = arm.id;
  std::vector<char> seed(nodes_, 0);
  for (std::size_t s : arm.nodes) seed[s] = 1;
  for (ArmIndex e = 0; e < edges_.size(); ++e) {
    // Out-edges of seeds are triggered with certainty; pin them to exactly 1.
    const double p = seed[edges_[e].from] ? 1.0 : std::min(a.trigger_probability[e], 1.0);
    if (p > 0.0) ts.entries.push_back({e, p});
  }
  return ts;
}

TriggeringSet IcInstance::triggering_set(const SuperArm& arm) const {
  return trigger_probabilities(means_, arm);
}

McEstimate IcInstance::spread_mc(const ExpectationVector& mu, std::span<const std::size_t> seeds,
                                 std::size_t sims, Rng& rng) const {
  if (sims == 0) throw std::invalid_argument("spread_mc needs at least one simulation");
  std::vector<double> world(edges_.size());
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t s = 0; s < sims; ++s) {
    for (ArmIndex e = 0; e < edges_.size(); ++e) world[e] = rng.bernoulli(mu[e]) ? 1.0 : 0.0;
    const auto active = activated(seeds, world);
    const double x = static_cast<double>(std::count(active.begin(), active.end(), 1));
    sum += x;
    sum_sq += x * x;
  }
  const double n = static_cast<double>(sims);
  McEstimate est;
  est.samples = sims;
  est.mean = sum / n;
  if (sims > 1) {
    const double var = std::max(0.0, (sum_sq - n * est.mean * est.mean) / (n - 1.0));
    est.std_error = std::sqrt(var / n);
  }
  return est;
}

Smoothness IcInstance::smoothness() const {
  const double gamma =
      static_cast<double>(std::max<std::size_t>(edges_.size(), 1) * std::max<std::size_t>(nodes_, 1));
  return Smoothness::linear(gamma);
}

std::vector<std::string> IcInstance::structural_violations() const {
  std::vector<std::string> out;
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (ArmIndex e = 0; e < edges_.size(); ++e) {
    if (edges_[e].from == edges_[e].to) out.push_back("ic: self loop at arm " + std::to_string(e));
    if (!seen.insert({edges_[e].from, edges_[e].to}).second)
      out.push_back("ic: duplicate edge at arm " + std::to_string(e));
  }
  for (const SuperArm& s : super_arms()) {
    if (s.nodes.size() != k_ || s.members != out_edges(s.nodes))
      out.push_back("super arm " + std::to_string(s.id) + ": triggering set inconsistent");
  }
  return out;
}

// ---------------------------------------------------------------- generators

PmcInstance make_random_pmc(std::size_t left, std::size_t right, std::size_t k, double density,
                            double p_min, double p_max, Rng& rng) {
  std::vector<WeightedEdge> edges;
  for (std::size_t u = 0; u < left; ++u) {
    const std::size_t forced = rng.uniform_index(right);
    for (std::size_t v = 0; v < right; ++v) {
      if (v == forced || rng.bernoulli(density))
        edges.push_back({u, v, p_min + (p_max - p_min) * rng.uniform()});
    }
  }
  return PmcInstance(left, right, std::move(edges), k);
}

IcInstance make_random_ic(std::size_t nodes, std::size_t edge_count, std::size_t k, double p_min,
                          double p_max, Rng& rng, std::size_t exact_cap) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t u = 0; u < nodes; ++u)
    for (std::size_t v = 0; v < nodes; ++v)
      if (u != v) pairs.emplace_back(u, v);
  if (edge_count > pairs.size()) throw std::invalid_argument("too many edges for the node count");
  // Partial Fisher-Yates keeps the draw count independent of the outcome.
  for (std::size_t j = 0; j < edge_count; ++j) {
    const std::size_t pick = j + rng.uniform_index(pairs.size() - j);
    std::swap(pairs[j], pairs[pick]);
  }
  pairs.resize(edge_count);
  std::sort(pairs.begin(), pairs.end());
  std::vector<WeightedEdge> edges;
  for (const auto& [u, v] : pairs) edges.push_back({u, v, p_min + (p_max - p_min) * rng.uniform()});
  return IcInstance(nodes, std::move(edges), k, exact_cap);
}

}  // namespace cmab
