#include "cmab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <thread>

#include "json.hpp"

namespace cmab {
namespace {

using json = nlohmann::ordered_json;

constexpr std::uint64_t kEnvironmentTag = 1;
constexpr std::uint64_t kPolicyTag = 2;
constexpr std::uint64_t kRewardTag = 3;
constexpr std::uint64_t kInstanceTag = 4;

std::vector<WeightedEdge> parse_edges(const Config& cfg) {
  std::vector<WeightedEdge> edges;
  for (const auto& item : cfg.get_list("instance.edges")) {
    const auto parts = split_trimmed(item, ' ');
    if (parts.size() != 3)
      throw ConfigError("instance.edges: expected 'from to probability', got '" + item + "'");
    edges.push_back({static_cast<std::size_t>(parse_uint(parts[0], "instance.edges")),
                     static_cast<std::size_t>(parse_uint(parts[1], "instance.edges")),
                     parse_double(parts[2], "instance.edges")});
  }
  return edges;
}

std::vector<LinearSuperArmSpec> parse_linear_super_arms(const Config& cfg) {
  std::vector<LinearSuperArmSpec> specs;
  for (const auto& item : cfg.get_list("instance.super_arms")) {
    LinearSuperArmSpec spec;
    for (const auto& token : split_trimmed(item, ' ')) {
      const auto colon = token.find(':');
      spec.members.push_back(
          static_cast<ArmIndex>(parse_uint(token.substr(0, colon), "instance.super_arms")));
      spec.weights.push_back(colon == std::string::npos
                                 ? 1.0
                                 : parse_double(token.substr(colon + 1), "instance.super_arms"));
    }
    specs.push_back(std::move(spec));
  }
  return specs;
}

std::vector<std::vector<ArmIndex>> parse_clusters(const std::string& text) {
  std::vector<std::vector<ArmIndex>> clusters;
  for (const auto& item : split_trimmed(text, ';')) {
    std::vector<ArmIndex> c;
    for (const auto& token : split_trimmed(item, ' '))
      c.push_back(static_cast<ArmIndex>(parse_uint(token, "policy.clusters")));
    clusters.push_back(std::move(c));
  }
  return clusters;
}

ExplorationRule parse_exploration(const Config& cfg) {
  const std::string v = cfg.get_string("policy.exploration", "standard");
  if (v == "standard") return ExplorationRule::standard();
  if (v == "log_log") return ExplorationRule::log_log();
  if (v == "with_c") return ExplorationRule::with_c(cfg.get_double("policy.c"));
  const double coefficient = parse_double(v, "policy.exploration");
  if (!(coefficient > 0.0)) throw ConfigError("policy.exploration: coefficient must be positive");
  return {ExplorationRule::Kind::log_scaled, coefficient};
}

std::string default_oracle(std::string_view kind) {
  if (kind == "pmc") return "greedy_pmc";
  if (kind == "linear") return "linear";
  if (kind == "ic") return "greedy_im";
  return "exact";
}

bool is_default_exploration(const ExplorationRule& rule) {
  return rule.kind == ExplorationRule::Kind::log_scaled && rule.coefficient == 3.0;
}

std::vector<std::string> default_bounds(const Experiment& e) {
  if (e.policy_kind == "eps_greedy") return {"epsgreedy"};
  if (e.policy_kind == "ucb1_improved") return {"ucb1_improved"};
  if (e.policy_kind == "uniform") return {};
  if (e.policy_kind == "cucb_clustered") return {"clustered", "theorem1"};
  if (!is_default_exploration(e.exploration)) return {"exploration_variant"};
  std::vector<std::string> out = {"theorem1", "theorem2"};
  const auto kind = e.env->kind();
  if (kind == "classical") out.push_back("classical");
  if (kind == "pmc") out.insert(out.end(), {"pmc", "pmc_distribution_free"});
  if (kind == "linear") out.insert(out.end(), {"linear", "linear_distribution_free"});
  if (kind == "ic") out.insert(out.end(), {"im", "im_distribution_free"});
  return out;
}

std::vector<double> classical_gaps(const GapProfile& profile) {
  std::vector<double> gaps;
  for (double r : profile.rewards) gaps.push_back(profile.opt - r);
  return gaps;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

json bound_json(const BoundReport& b) {
  json j;
  j["name"] = b.name;
  j["horizon"] = b.horizon;
  j["value"] = b.value;
  json terms = json::array();
  for (const auto& t : b.terms) terms.push_back({{"label", t.label}, {"value", t.value}});
  j["terms"] = terms;
  j["parameters"] = b.parameters;
  return j;
}

std::string bounds_csv(const Experiment& e, const std::vector<std::uint64_t>& rounds) {
  std::string out = "kind,name,t,mean_cumulative_regret,stderr_cumulative_regret,runs\n";
  for (std::uint64_t t : rounds) {
    if (t < 2) continue;
    for (const BoundReport& b : compute_bounds(e, t))
      out += "bound," + b.name + "," + std::to_string(t) + "," + format_number(b.value) + ",0,0\n";
  }
  return out;
}

json profile_json(const GapProfile& g) {
  json j;
  j["opt"] = g.opt;
  j["optimal_super_arm"] = g.optimal;
  j["alpha"] = g.alpha;
  j["bad_super_arms"] = g.bad_set.size();
  j["delta_min"] = g.delta_min;
  j["delta_max"] = g.delta_max;
  j["p_star"] = g.p_star;
  json arms = json::array();
  for (std::size_t i = 0; i < g.num_arms(); ++i) {
    const ArmGaps& a = g.arms[i];
    arms.push_back({{"arm", i},
                    {"K", a.bad_count()},
                    {"delta_min", a.delta_min},
                    {"delta_max", a.delta_max},
                    {"p", a.trigger_probability ? json(*a.trigger_probability) : json(nullptr)}});
  }
  j["arms"] = arms;
  return j;
}

}  // namespace

std::string format_number(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return buf;
}

std::uint64_t environment_seed(std::uint64_t base, std::uint64_t run) {
  return derive_seed(base, run, kEnvironmentTag);
}

std::uint64_t policy_seed(std::uint64_t base, std::uint64_t run) {
  return derive_seed(base, run, kPolicyTag);
}

std::vector<std::uint64_t> checkpoint_rounds(std::uint64_t n, const std::vector<std::uint64_t>& extra) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t t = 1; t <= n; t *= 2) {
    out.push_back(t);
    if (t > n / 2) break;
  }
  for (std::uint64_t t : extra)
    if (t >= 1 && t <= n) out.push_back(t);
  out.push_back(n);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double simulate(const Environment& env, Policy& policy, const RewardFunction& expected_reward,
                double baseline, std::uint64_t n, Rng& env_rng, Rng& policy_rng,
                const RoundObserver& observe) {
  RoundRecord rec;
  for (std::uint64_t t = 1; t <= n; ++t) {
    const OracleResult choice = policy.select(policy_rng);
    PlayFeedback fb = env.play(choice.super_arm, env_rng);
    fb.round = t;
    policy.update(fb);
    rec.t = t;
    rec.super_arm = choice.super_arm.id;
    rec.realized_reward = fb.reward;
    rec.expected_reward = expected_reward(choice.super_arm);
    rec.regret = baseline - rec.expected_reward;
    rec.cumulative_regret += rec.regret;
    rec.oracle_failed = choice.quality == OracleQuality::failed;
    if (observe) observe(rec, policy);
  }
  return rec.cumulative_regret;
}

// ---------------------------------------------------------------- rewards

RewardTable::RewardTable(std::shared_ptr<const Environment> env, const GapProfile* profile,
                         std::uint64_t seed, std::size_t mc_samples)
    : env_(std::move(env)), profile_(profile), seed_(seed), mc_samples_(mc_samples) {
  const auto* ic = dynamic_cast<const IcInstance*>(env_.get());
  exact_ = ic == nullptr || ic->exact_available();
}

McEstimate RewardTable::lookup(const SuperArm& arm) const {
  if (profile_ && arm.id < profile_->rewards.size()) return {profile_->rewards[arm.id], 0.0, 0};
  if (exact_) return {env_->expected_reward(env_->means(), arm), 0.0, 0};
  std::lock_guard lock(mutex_);
  if (auto it = cache_.find(arm.id); it != cache_.end()) return it->second;
  const auto& ic = static_cast<const IcInstance&>(*env_);
  Rng rng(derive_seed(seed_, arm.id, kRewardTag));
  const McEstimate est = ic.spread_mc(env_->means(), arm.nodes, mc_samples_, rng);
  cache_.emplace(arm.id, est);
  return est;
}

double RewardTable::operator()(const SuperArm& arm) const { return lookup(arm).mean; }

double RewardTable::std_error(const SuperArm& arm) const { return lookup(arm).std_error; }

// ---------------------------------------------------------------- building

std::shared_ptr<const Environment> build_environment(const Config& cfg) {
  const std::string kind = cfg.get_string("instance.kind");
  const bool random = cfg.get_bool("instance.random", false);
  if (kind == "classical") {
    return std::make_shared<ClassicalMab>(ExpectationVector(cfg.get_doubles("instance.means")));
  }
  if (kind == "linear") {
    ExpectationVector means(cfg.get_doubles("instance.means"));
    if (cfg.has("instance.top_k"))
      return std::make_shared<LinearInstance>(make_top_k_linear(std::move(means), cfg.get_uint("instance.top_k")));
    return std::make_shared<LinearInstance>(std::move(means), parse_linear_super_arms(cfg));
  }
  const std::size_t k = cfg.get_uint("instance.k");
  const double p_min = cfg.get_double("instance.p_min", 0.1);
  const double p_max = cfg.get_double("instance.p_max", 0.9);
  Rng rng(derive_seed(cfg.get_uint("instance.random_seed", cfg.get_uint("experiment.seed", 0)), 0,
                      kInstanceTag));
  if (kind == "pmc") {
    const std::size_t left = cfg.get_uint("instance.left");
    const std::size_t right = cfg.get_uint("instance.right");
    if (random)
      return std::make_shared<PmcInstance>(make_random_pmc(left, right, k, cfg.get_double("instance.density", 0.5),
                                                           p_min, p_max, rng));
    return std::make_shared<PmcInstance>(left, right, parse_edges(cfg), k);
  }
  if (kind == "ic") {
    const std::size_t nodes = cfg.get_uint("instance.nodes");
    const std::size_t cap = cfg.get_uint("instance.exact_cap", IcInstance::kDefaultExactCap);
    if (random)
      return std::make_shared<IcInstance>(
          make_random_ic(nodes, cfg.get_uint("instance.edge_count"), k, p_min, p_max, rng, cap));
    return std::make_shared<IcInstance>(nodes, parse_edges(cfg), k, cap);
  }
  throw ConfigError("instance.kind: unknown kind '" + kind + "'");
}

std::shared_ptr<const Oracle> build_oracle(const Config& cfg, std::shared_ptr<const Environment> env) {
  const std::string kind = cfg.get_string("oracle.kind", default_oracle(env->kind()));
  std::shared_ptr<const Oracle> oracle;
  if (kind == "exact")
    oracle = std::make_shared<ExactOracle>(env);
  else if (kind == "greedy_pmc")
    oracle = std::make_shared<GreedyPmcOracle>(env);
  else if (kind == "greedy_im")
    oracle = std::make_shared<GreedyImOracle>(env, cfg.get_uint("oracle.sims", 1000),
                                              cfg.get_double("oracle.epsilon", 0.05));
  else if (kind == "linear")
    oracle = std::make_shared<LinearOracle>(env);
  else
    throw ConfigError("oracle.kind: unknown oracle '" + kind + "'");
  if (cfg.has("oracle.beta_override")) {
    const std::string mode = cfg.get_string("oracle.failure_mode", "uniform_random");
    FailureMode fm;
    if (mode == "uniform_random")
      fm = FailureMode::uniform_random;
    else if (mode == "worst")
      fm = FailureMode::worst;
    else
      throw ConfigError("oracle.failure_mode: unknown mode '" + mode + "'");
    oracle = std::make_shared<BetaFailureWrapper>(oracle, env, cfg.get_double("oracle.beta_override"), fm);
  }
  return oracle;
}

Experiment build_experiment(const Config& cfg) {
  if (const auto unknown = cfg.unknown_keys(); !unknown.empty())
    throw ConfigError("unknown config key '" + unknown.front() + "'");
  Experiment e;
  e.config = cfg;
  e.env = build_environment(cfg);
  if (const auto problems = validate_instance(*e.env); !problems.empty())
    throw ConfigError("invalid instance: " + problems.front());

  e.horizon = cfg.get_uint("experiment.horizon");
  e.repetitions = cfg.get_uint("experiment.repetitions", 1);
  e.seed = cfg.get_uint("experiment.seed", 0);
  if (e.horizon < 1) throw ConfigError("experiment.horizon must be at least 1");
  if (e.repetitions < 1) throw ConfigError("experiment.repetitions must be at least 1");
  const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
  e.threads = std::max<std::size_t>(1, cfg.get_uint("experiment.threads", hw));
  std::vector<std::uint64_t> extra;
  if (cfg.has("experiment.checkpoints"))
    for (const auto& item : cfg.get_list("experiment.checkpoints"))
      extra.push_back(parse_uint(item, "experiment.checkpoints"));
  e.checkpoints = checkpoint_rounds(e.horizon, extra);
  e.trajectories = cfg.get_bool("experiment.trajectories", true);
  e.diagnostics = cfg.get_bool("policy.diagnostics", false);
  e.output = cfg.has("experiment.output") ? cfg.resolve(cfg.get_string("experiment.output"))
                                          : std::filesystem::path("cmab_output");

  e.policy_kind = cfg.get_string("policy.kind", "cucb");
  static const std::vector<std::string> policies = {"cucb", "cucb_clustered", "eps_greedy",
                                                    "ucb1_improved", "uniform"};
  if (std::find(policies.begin(), policies.end(), e.policy_kind) == policies.end())
    throw ConfigError("policy.kind: unknown policy '" + e.policy_kind + "'");
  e.exploration = parse_exploration(cfg);
  e.policy_c = cfg.get_double("policy.c", 2.0);

  const bool needs_oracle = e.policy_kind != "ucb1_improved" && e.policy_kind != "uniform";
  if (needs_oracle) {
    e.oracle = build_oracle(cfg, e.env);
    e.alpha = e.oracle->descriptor().alpha;
    e.beta = e.oracle->descriptor().beta;
  }
  const double profile_alpha = cfg.get_double("bounds.alpha", e.alpha);

  if (e.env->has_explicit_space()) {
    try {
      e.profile = compute_gap_profile(*e.env, profile_alpha);
    } catch (const EnumerationCapExceeded&) {
      e.notes.push_back("gap profile skipped: cascade above the exact enumeration cap");
    }
    const std::string clusters = cfg.get_string("policy.clusters", "per_node");
    try {
      e.clusters = clusters == "per_node" ? ClusterScheme::per_node(*e.env)
                                          : ClusterScheme::from_clusters(*e.env, parse_clusters(clusters));
    } catch (const std::invalid_argument& ex) {
      if (e.policy_kind == "cucb_clustered") throw ConfigError(std::string("policy.clusters: ") + ex.what());
    }
  } else {
    e.notes.push_back("gap profile skipped: implicit super-arm space");
    if (e.policy_kind == "cucb_clustered") throw ConfigError("clustered CUCB needs an explicit super-arm space");
  }

  const std::size_t mc = cfg.get_uint("experiment.mc_samples", 1000000);
  e.rewards = std::make_shared<RewardTable>(e.env, e.profile ? &*e.profile : nullptr, e.seed, mc);
  if (e.profile) {
    e.opt = e.profile->opt;
    e.opt_source = "exact";
  } else if (e.env->has_explicit_space()) {
    // Cascade above the cap: best Monte-Carlo estimate over the explicit space.
    e.opt_source = "monte_carlo";
    bool first = true;
    for (const SuperArm& s : e.env->super_arms()) {
      const double r = (*e.rewards)(s);
      if (first || r > e.opt) {
        e.opt = r;
        e.opt_std_error = e.rewards->std_error(s);
      }
      first = false;
    }
  } else {
    // Implicit space: the oracle's answer on the true means stands in for opt.
    if (!e.oracle) throw ConfigError("policy needs an explicit super-arm space");
    Rng rng(derive_seed(e.seed, 0, kRewardTag));
    const SuperArm s = e.oracle->select(e.env->means(), rng).super_arm;
    e.opt = (*e.rewards)(s);
    e.opt_std_error = e.rewards->std_error(s);
    e.opt_source = "oracle";
    e.notes.push_back("opt taken from the oracle on the true means (a lower bound on opt)");
  }

  if (e.policy_kind == "eps_greedy") {
    const std::string g = cfg.get_string("policy.gamma", "auto");
    if (g == "auto") {
      if (!e.profile || !(e.profile->delta_min > 0.0))
        throw ConfigError("policy.gamma = auto needs a gap profile with a positive delta_min");
      e.gamma = eps_greedy_gamma(e.policy_c, e.env->num_arms(), e.env->smoothness(), e.profile->delta_min);
    } else {
      e.gamma = parse_double(g, "policy.gamma");
    }
  }

  e.bound_names = cfg.has("bounds.emit") ? cfg.get_list("bounds.emit") : default_bounds(e);
  return e;
}

std::unique_ptr<Policy> Experiment::make_policy() const {
  if (policy_kind == "cucb") return std::make_unique<CucbPolicy>(env->num_arms(), oracle, exploration);
  if (policy_kind == "cucb_clustered")
    return std::make_unique<CucbPolicy>(env->num_arms(), oracle, exploration,
                                        clustered_init_schedule(*env, *clusters));
  if (policy_kind == "eps_greedy") return std::make_unique<EpsGreedyPolicy>(env, oracle, gamma);
  if (policy_kind == "ucb1_improved") return std::make_unique<Ucb1ImprovedPolicy>(env, policy_c);
  return std::make_unique<UniformPolicy>(env);
}

std::vector<std::string> validate_config(const Config& cfg) {
  std::vector<std::string> problems;
  for (const auto& k : cfg.unknown_keys()) problems.push_back("unknown config key '" + k + "'");
  try {
    const auto env = build_environment(cfg);
    for (const auto& p : validate_instance(*env)) problems.push_back(p);
    if (problems.empty()) build_experiment(cfg);
  } catch (const std::exception& ex) {
    problems.push_back(ex.what());
  }
  return problems;
}

std::vector<BoundReport> compute_bounds(const Experiment& e, std::uint64_t n) {
  std::vector<BoundReport> out;
  if (!e.profile || n < 2) return out;
  const GapProfile& g = *e.profile;
  const Smoothness f = e.env->smoothness();
  const std::size_t edges = g.num_arms();
  for (const std::string& name : e.bound_names) {
    if (name == "theorem1") {
      out.push_back(theorem1_bound(g, f, n));
    } else if (name == "theorem2") {
      out.push_back(theorem2_bound(g, f, n));
    } else if (name == "exploration_variant") {
      out.push_back(exploration_variant_bound(g, f, n, e.exploration));
    } else if (name == "clustered") {
      if (!e.clusters) throw ConfigError("clustered bound needs a cluster scheme");
      out.push_back(clustered_bound(compute_cluster_profile(g, *e.clusters), f, n));
    } else if (name == "epsgreedy") {
      const double gamma = e.gamma > 0.0
                               ? e.gamma
                               : eps_greedy_gamma(e.policy_c, g.num_arms(), f, g.delta_min);
      out.push_back(epsgreedy_bound(gamma, e.policy_c, g.num_arms(), n, g.delta_max));
    } else if (name == "ucb1_improved" || name == "classical") {
      if (e.env->kind() != "classical") throw ConfigError(name + " bound needs a classical instance");
      const auto gaps = classical_gaps(g);
      out.push_back(name == "classical" ? classical_mab_bound(gaps, n)
                                        : ucb1_improved_bound(e.policy_c, gaps, n));
    } else if (name == "pmc" || name == "pmc_distribution_free") {
      if (e.env->kind() != "pmc") throw ConfigError(name + " bound needs a coverage instance");
      out.push_back(name == "pmc" ? pmc_bound(g, edges, n)
                                  : pmc_distribution_free_bound(edges, n, g.delta_max));
    } else if (name == "linear" || name == "linear_distribution_free") {
      const auto* lin = dynamic_cast<const LinearInstance*>(e.env.get());
      if (!lin) throw ConfigError(name + " bound needs a linear instance");
      out.push_back(name == "linear"
                        ? linear_bound(g, lin->max_weight(), lin->max_size(), n)
                        : linear_distribution_free_bound(lin->max_weight(), lin->max_size(),
                                                         g.num_arms(), n, g.delta_max));
    } else if (name == "im" || name == "im_distribution_free") {
      const auto* ic = dynamic_cast<const IcInstance*>(e.env.get());
      if (!ic) throw ConfigError(name + " bound needs a cascade instance");
      out.push_back(name == "im" ? im_bound(g, ic->node_count(), edges, n)
                                 : im_distribution_free_bound(ic->node_count(), edges, g.p_star, n,
                                                              g.delta_max));
    } else {
      throw ConfigError("bounds.emit: unknown bound '" + name + "'");
    }
  }
  return out;
}

// ---------------------------------------------------------------- running

namespace {

RunSummary run_one(const Experiment& e, std::uint64_t run, bool write_files) {
  RunSummary s;
  s.run_id = run;
  s.env_seed = environment_seed(e.seed, run);
  s.policy_seed = policy_seed(e.seed, run);
  Rng env_rng(s.env_seed);
  Rng policy_rng(s.policy_seed);
  auto policy = e.make_policy();

  std::optional<CounterDiagnostics> counters;
  std::optional<ClusterCounterDiagnostics> cluster_counters;
  if (e.diagnostics && e.profile) {
    counters.emplace(*e.profile);
    if (e.policy_kind == "cucb_clustered") cluster_counters.emplace(*e.profile, *e.clusters);
  }

  std::ofstream traj;
  std::string buffer;
  if (write_files && e.trajectories) {
    char name[64];
    std::snprintf(name, sizeof name, "run_%04llu.csv", static_cast<unsigned long long>(run));
    s.trajectory = e.output / name;
    traj.open(s.trajectory, std::ios::binary);
    if (!traj) throw std::runtime_error("cannot write '" + s.trajectory.string() + "'");
    traj << "run_id,t,super_arm,realized_reward,expected_reward,regret,cumulative_regret,oracle_failed\n";
  }
  const std::string run_text = std::to_string(run);
  std::size_t next_checkpoint = 0;
  s.checkpoint_regret.assign(e.checkpoints.size(), 0.0);

  auto observe = [&](const RoundRecord& r, const Policy& p) {
    if (r.oracle_failed) ++s.oracle_failures;
    while (next_checkpoint < e.checkpoints.size() && e.checkpoints[next_checkpoint] == r.t)
      s.checkpoint_regret[next_checkpoint++] = r.cumulative_regret;
    if (counters) {
      counters->record(r.super_arm);
      if (cluster_counters) cluster_counters->record(r.t, r.super_arm);
      // Statistics after round t are those seen at the start of round t + 1.
      if (!nice_run_check(p.stats(), e.env->means(), r.t + 1).nice) ++s.non_nice_rounds;
    }
    if (traj.is_open()) {
      buffer += run_text;
      buffer += ',';
      buffer += std::to_string(r.t);
      buffer += ',';
      buffer += std::to_string(r.super_arm);
      buffer += ',';
      buffer += format_number(r.realized_reward);
      buffer += ',';
      buffer += format_number(r.expected_reward);
      buffer += ',';
      buffer += format_number(r.regret);
      buffer += ',';
      buffer += format_number(r.cumulative_regret);
      buffer += r.oracle_failed ? ",1\n" : ",0\n";
      if (buffer.size() > (1u << 20)) {
        traj << buffer;
        buffer.clear();
      }
    }
  };
  const auto& table = *e.rewards;
  s.total_regret = simulate(*e.env, *policy, [&](const SuperArm& a) { return table(a); },
                            e.baseline(), e.horizon, env_rng, policy_rng, observe);
  if (traj.is_open()) {
    traj << buffer;
    if (!traj) throw std::runtime_error("failed writing '" + s.trajectory.string() + "'");
  }
  if (counters) {
    s.counters = counters->counters();
    s.bad_rounds = counters->bad_rounds();
  }
  if (cluster_counters) s.cluster_counters = cluster_counters->counters();
  return s;
}

json metadata_json(const Experiment& e, const ExperimentResult& res) {
  json j;
  j["rng_algorithm"] = std::string(Rng::kAlgorithm);
  j["config"] = e.config.entries();
  json inst;
  inst["kind"] = std::string(e.env->kind());
  inst["arms"] = e.env->num_arms();
  inst["explicit_space"] = e.env->has_explicit_space();
  inst["super_arms"] = e.env->super_arms().size();
  inst["means"] = e.env->means().vector();
  if (e.env->smoothness().power)
    inst["smoothness"] = {{"gamma", e.env->smoothness().power->gamma},
                          {"omega", e.env->smoothness().power->omega}};
  j["instance"] = inst;
  j["policy"] = e.policy_kind;
  if (e.policy_kind == "eps_greedy") j["gamma"] = e.gamma;
  if (e.oracle)
    j["oracle"] = {{"name", e.oracle->descriptor().name},
                   {"alpha", e.oracle->descriptor().alpha},
                   {"beta", e.oracle->descriptor().beta}};
  j["regret"] = {{"alpha", e.alpha},
                 {"beta", e.beta},
                 {"opt", e.opt},
                 {"opt_source", e.opt_source},
                 {"opt_std_error", e.opt_std_error},
                 {"baseline", e.baseline()},
                 {"expected_rewards_exact", e.rewards->exact()}};
  if (e.profile) j["gap_profile"] = profile_json(*e.profile);
  j["horizon"] = e.horizon;
  j["repetitions"] = e.repetitions;
  j["seed"] = e.seed;
  j["checkpoints"] = e.checkpoints;
  json bounds = json::array();
  for (const auto& b : res.bounds) bounds.push_back(bound_json(b));
  j["bounds"] = bounds;
  json runs = json::array();
  for (const auto& r : res.runs) {
    json jr;
    jr["run_id"] = r.run_id;
    jr["env_seed"] = r.env_seed;
    jr["policy_seed"] = r.policy_seed;
    jr["cumulative_regret"] = r.total_regret;
    jr["oracle_failures"] = r.oracle_failures;
    if (!r.trajectory.empty()) jr["trajectory"] = r.trajectory.filename().string();
    if (e.diagnostics && e.profile) {
      jr["counters"] = r.counters;
      jr["bad_rounds"] = r.bad_rounds;
      jr["non_nice_rounds"] = r.non_nice_rounds;
      if (!r.cluster_counters.empty()) jr["cluster_counters"] = r.cluster_counters;
    }
    runs.push_back(jr);
  }
  j["runs"] = runs;
  j["notes"] = e.notes;
  return j;
}

}  // namespace

ExperimentResult execute(const Experiment& e, bool write_files) {
  ExperimentResult res;
  res.output = e.output;
  if (write_files) std::filesystem::create_directories(e.output);

  res.runs.resize(e.repetitions);
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::uint64_t r = next++; r < e.repetitions; r = next++) {
      try {
        res.runs[r] = run_one(e, r, write_files);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::min<std::uint64_t>(e.threads, e.repetitions);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  for (std::size_t c = 0; c < e.checkpoints.size(); ++c) {
    AggregateRow row;
    row.t = e.checkpoints[c];
    row.runs = e.repetitions;
    double sum = 0.0;
    for (const auto& r : res.runs) sum += r.checkpoint_regret[c];
    row.mean = sum / static_cast<double>(e.repetitions);
    if (e.repetitions > 1) {
      double ss = 0.0;
      for (const auto& r : res.runs) ss += (r.checkpoint_regret[c] - row.mean) * (r.checkpoint_regret[c] - row.mean);
      row.std_error = std::sqrt(ss / static_cast<double>(e.repetitions - 1) / static_cast<double>(e.repetitions));
    }
    res.aggregate.push_back(row);
  }
  res.bounds = compute_bounds(e, e.horizon);

  if (write_files) {
    const std::string name = e.policy_kind + (e.oracle ? "+" + e.oracle->descriptor().name : "");
    std::string agg = "kind,name,t,mean_cumulative_regret,stderr_cumulative_regret,runs\n";
    for (const auto& row : res.aggregate)
      agg += "experiment," + name + "," + std::to_string(row.t) + "," + format_number(row.mean) + "," +
             format_number(row.std_error) + "," + std::to_string(row.runs) + "\n";
    write_text(e.output / "aggregate.csv", agg);
    write_text(e.output / "bounds.csv", bounds_csv(e, e.checkpoints));
    write_text(e.output / "metadata.json", metadata_json(e, res).dump(2) + "\n");
  }
  return res;
}

ExperimentResult run_experiment(const Config& config, std::optional<std::uint64_t> seed,
                                std::optional<std::filesystem::path> output) {
  Config cfg = config;
  if (seed) cfg.set("experiment.seed", std::to_string(*seed));
  Experiment e = build_experiment(cfg);
  if (output) e.output = *output;
  return execute(e, true);
}

std::vector<BoundReport> emit_bounds(const Config& config, std::optional<std::filesystem::path> output) {
  Experiment e = build_experiment(config);
  if (output) e.output = *output;
  std::filesystem::create_directories(e.output);
  write_text(e.output / "bounds.csv", bounds_csv(e, e.checkpoints));
  auto reports = compute_bounds(e, e.horizon);
  json j = json::array();
  for (const auto& b : reports) j.push_back(bound_json(b));
  json meta;
  meta["config"] = e.config.entries();
  if (e.profile) meta["gap_profile"] = profile_json(*e.profile);
  meta["bounds"] = j;
  meta["notes"] = e.notes;
  write_text(e.output / "bounds.json", meta.dump(2) + "\n");
  return reports;
}

std::vector<std::filesystem::path> sweep(const Config& config, const std::string& axis,
                                         const std::vector<std::string>& values,
                                         std::optional<std::filesystem::path> output) {
  const auto& schema = config_schema();
  if (std::find(schema.begin(), schema.end(), axis) == schema.end())
    throw ConfigError("sweep: unknown axis '" + axis + "'");
  if (values.empty()) throw ConfigError("sweep: no values given");
  for (const auto& v : values) parse_double(v, "sweep value for " + axis);

  const std::filesystem::path root =
      output ? *output
             : (config.has("experiment.output") ? config.resolve(config.get_string("experiment.output"))
                                                : std::filesystem::path("cmab_sweep"));
  std::filesystem::create_directories(root);
  std::vector<std::filesystem::path> dirs;
  std::string index = "axis,value,output\n";
  for (const auto& v : values) {
    Config cfg = config;
    cfg.set(axis, v);
    const std::filesystem::path dir = root / (axis + "=" + v);
    run_experiment(cfg, std::nullopt, dir);
    dirs.push_back(dir);
    index += axis + "," + v + "," + dir.filename().string() + "\n";
  }
  write_text(root / "index.csv", index);
  return dirs;
}

}  // namespace cmab
