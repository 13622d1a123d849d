#include "cmab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "cmab/environments.hpp"

namespace cmab {
namespace {

constexpr double kPi2 = std::numbers::pi * std::numbers::pi;

double log_horizon(std::uint64_t n) {
  if (n < 2) throw std::invalid_argument("bounds need a horizon n >= 2");
  return std::log(static_cast<double>(n));
}

void require_probability(double p) {
  if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("trigger probability must lie in (0, 1]");
}

void require_zeta_argument(double c) {
  if (!(c > 1.0)) throw std::invalid_argument("c must exceed 1");
}

void add_term(BoundReport& report, std::string label, double value) {
  report.terms.push_back({std::move(label), value});
  report.value += value;
}

void smoothness_parameters(BoundReport& report, const Smoothness& smoothness) {
  if (smoothness.power) {
    report.parameters["f.gamma"] = smoothness.power->gamma;
    report.parameters["f.omega"] = smoothness.power->omega;
  }
}

// Point where 12/(f^{-1}(x)^2 p) meets 24/p.
double threshold_switch(const Smoothness& smoothness) {
  return smoothness.f(1.0 / std::numbers::sqrt2);
}

// Integral of x^{-2/omega} over [lo, hi].
double power_integral(double lo, double hi, double omega) {
  if (omega == 2.0) return std::log(hi / lo);
  const double e = 1.0 - 2.0 / omega;
  return (std::pow(lo, e) - std::pow(hi, e)) * omega / (2.0 - omega);
}

double quadrature(const std::function<double(double)>& g, double lo, double hi) {
  if (!(hi > lo)) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(g, lo, hi, 15, 1e-8);
}

GapProfile build_profile(const Environment& env, double alpha,
                         const std::function<double(const SuperArm&)>& reward,
                         const std::function<TriggeringSet(const SuperArm&)>& triggering) {
  if (!env.has_explicit_space())
    throw std::invalid_argument("gap profile needs an explicit super-arm space");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in (0, 1]");
  const auto arms = env.super_arms();
  if (arms.empty()) throw std::invalid_argument("gap profile: empty super-arm space");

  GapProfile g;
  g.alpha = alpha;
  g.rewards.reserve(arms.size());
  g.triggering.reserve(arms.size());
  for (const SuperArm& s : arms) {
    g.rewards.push_back(reward(s));
    g.triggering.push_back(triggering(s));
  }
  g.optimal = 0;
  g.opt = g.rewards[0];
  for (std::size_t j = 1; j < arms.size(); ++j) {
    if (g.rewards[j] > g.opt) {
      g.opt = g.rewards[j];
      g.optimal = j;
    }
  }

  const double target = alpha * g.opt;
  const double tolerance = 1e-12 * std::max(1.0, std::abs(g.opt));
  g.bad.assign(arms.size(), 0);
  g.arms.assign(env.num_arms(), ArmGaps{});
  for (std::size_t j = 0; j < arms.size(); ++j) {
    for (const auto& e : g.triggering[j].entries) {
      auto& p = g.arms[e.arm].trigger_probability;
      p = p ? std::min(*p, e.probability) : e.probability;
    }
    if (g.rewards[j] < target - tolerance) {
      const double gap = target - g.rewards[j];
      g.bad[j] = 1;
      g.bad_set.push_back({static_cast<SuperArmId>(j), gap});
      for (const auto& e : g.triggering[j].entries) g.arms[e.arm].gaps.push_back(gap);
    }
  }

  bool any = false;
  for (ArmGaps& a : g.arms) {
    if (a.trigger_probability) g.p_star = std::min(g.p_star, *a.trigger_probability);
    if (a.gaps.empty()) continue;
    std::sort(a.gaps.begin(), a.gaps.end(), std::greater<>());
    a.delta_max = a.gaps.front();
    a.delta_min = a.gaps.back();
    g.delta_min = any ? std::min(g.delta_min, a.delta_min) : a.delta_min;
    g.delta_max = any ? std::max(g.delta_max, a.delta_max) : a.delta_max;
    any = true;
  }
  return g;
}

}  // namespace

GapProfile compute_gap_profile(const Environment& env, double alpha) {
  return compute_gap_profile(env, env.means(), alpha);
}

GapProfile compute_gap_profile(const Environment& env, const ExpectationVector& true_mu,
                               double alpha) {
  if (true_mu.size() != env.num_arms())
    throw std::invalid_argument("gap profile: mean vector has the wrong length");
  auto reward = [&](const SuperArm& s) { return env.expected_reward(true_mu, s); };
  if (const auto* ic = dynamic_cast<const IcInstance*>(&env)) {
    return build_profile(env, alpha, reward,
                         [&](const SuperArm& s) { return ic->trigger_probabilities(true_mu, s); });
  }
  return build_profile(env, alpha, reward,
                       [&](const SuperArm& s) { return env.triggering_set(s); });
}

ClusterGapProfile compute_cluster_profile(const GapProfile& profile, const ClusterScheme& scheme) {
  if (scheme.groups.size() != profile.rewards.size())
    throw std::invalid_argument("cluster scheme does not match the super-arm space");
  ClusterGapProfile out;
  out.clusters.assign(scheme.clusters.size(), ClusterGaps{});
  out.delta_max = profile.delta_max;
  out.num_arms = profile.num_arms();
  out.alpha = profile.alpha;
  for (const BadSuperArm& b : profile.bad_set)
    for (std::size_t c : scheme.groups[b.id]) out.clusters[c].gaps.push_back(b.gap);
  for (ClusterGaps& c : out.clusters) {
    if (c.gaps.empty()) continue;
    std::sort(c.gaps.begin(), c.gaps.end(), std::greater<>());
    c.delta_max = c.gaps.front();
    c.delta_min = c.gaps.back();
  }
  return out;
}

double sampling_threshold(double delta, double p, std::uint64_t n, const Smoothness& smoothness) {
  if (!(delta > 0.0)) throw std::invalid_argument("sampling threshold needs delta > 0");
  require_probability(p);
  const double ln = log_horizon(n);
  const double inv = smoothness.f_inverse(delta);
  if (p == 1.0) return 6.0 * ln / (inv * inv);
  return std::max(12.0 * ln / (inv * inv * p), 24.0 * ln / p);
}

double sampling_threshold_integral_numeric(double lo, double hi, double p, std::uint64_t n,
                                           const Smoothness& smoothness) {
  if (!(lo > 0.0)) throw std::invalid_argument("integral needs a positive lower limit");
  require_probability(p);
  log_horizon(n);
  if (!(hi > lo)) return 0.0;
  auto g = [&](double x) { return sampling_threshold(x, p, n, smoothness); };
  if (p == 1.0) return quadrature(g, lo, hi);
  // The integrand has a kink where its two branches meet.
  const double knot = threshold_switch(smoothness);
  if (knot <= lo || knot >= hi) return quadrature(g, lo, hi);
  return quadrature(g, lo, knot) + quadrature(g, knot, hi);
}

double sampling_threshold_integral(double lo, double hi, double p, std::uint64_t n,
                                   const Smoothness& smoothness) {
  if (!smoothness.power) return sampling_threshold_integral_numeric(lo, hi, p, n, smoothness);
  if (!(lo > 0.0)) throw std::invalid_argument("integral needs a positive lower limit");
  require_probability(p);
  const double ln = log_horizon(n);
  if (!(hi > lo)) return 0.0;
  const double gamma = smoothness.power->gamma;
  const double omega = smoothness.power->omega;
  const double scale = std::pow(gamma, 2.0 / omega);
  if (p == 1.0) return 6.0 * ln * scale * power_integral(lo, hi, omega);
  const double knot = threshold_switch(smoothness);
  double total = 0.0;
  const double mid = std::clamp(knot, lo, hi);
  if (mid > lo) total += 12.0 * ln / p * scale * power_integral(lo, mid, omega);
  if (hi > mid) total += 24.0 * ln / p * (hi - mid);
  return total;
}

BoundReport theorem1_bound(const GapProfile& profile, const Smoothness& smoothness,
                           std::uint64_t n) {
  log_horizon(n);
  BoundReport r;
  r.name = "theorem1";
  r.horizon = n;
  for (std::size_t i = 0; i < profile.num_arms(); ++i) {
    const ArmGaps& a = profile.arms[i];
    if (a.bad_count() == 0) continue;
    const double p = profile.p(i);
    const double value = sampling_threshold(a.delta_min, p, n, smoothness) * a.delta_min +
                         sampling_threshold_integral(a.delta_min, a.delta_max, p, n, smoothness);
    add_term(r, "arm " + std::to_string(i), value);
    r.parameters["p_" + std::to_string(i)] = p;
  }
  const double indicator = profile.p_star < 1.0 ? 1.0 : 0.0;
  add_term(r, "constant",
           ((2.0 + indicator) * kPi2 / 6.0 + 1.0) * static_cast<double>(profile.num_arms()) *
               profile.delta_max);
  smoothness_parameters(r, smoothness);
  r.parameters["alpha"] = profile.alpha;
  r.parameters["p_star"] = profile.p_star;
  r.parameters["delta_min"] = profile.delta_min;
  r.parameters["delta_max"] = profile.delta_max;
  r.parameters["m"] = static_cast<double>(profile.num_arms());
  return r;
}

BoundReport theorem2_bound(std::size_t m, std::uint64_t n, double gamma, double omega,
                           double p_star, std::span<const double> p, double delta_max) {
  const double ln = log_horizon(n);
  if (!(gamma > 0.0)) throw std::invalid_argument("theorem2 bound needs gamma > 0");
  if (!(omega > 0.0 && omega <= 1.0)) throw std::invalid_argument("theorem2 bound needs 0 < omega <= 1");
  require_probability(p_star);
  const double md = static_cast<double>(m);
  const double nd = static_cast<double>(n);
  BoundReport r;
  r.name = "theorem2";
  r.horizon = n;
  const double inner = p_star == 1.0 ? 6.0 * md * ln : 12.0 * md * ln / p_star;
  add_term(r, "leading",
           2.0 * gamma / (2.0 - omega) * std::pow(inner, omega / 2.0) *
               std::pow(nd, 1.0 - omega / 2.0));
  if (p_star == 1.0) {
    add_term(r, "constant", (kPi2 / 3.0 + 1.0) * md * delta_max);
  } else {
    add_term(r, "constant", (kPi2 / 2.0 + 1.0) * md * delta_max);
    double sum = 0.0;
    for (double pi : p) {
      require_probability(pi);
      sum += 24.0 * ln / pi;
    }
    add_term(r, "trigger", sum * delta_max);
  }
  r.parameters["f.gamma"] = gamma;
  r.parameters["f.omega"] = omega;
  r.parameters["p_star"] = p_star;
  r.parameters["delta_max"] = delta_max;
  r.parameters["m"] = md;
  return r;
}

BoundReport theorem2_bound(const GapProfile& profile, const Smoothness& smoothness,
                           std::uint64_t n) {
  if (!smoothness.power) throw std::invalid_argument("theorem2 bound needs a power-law smoothness");
  std::vector<double> p(profile.num_arms());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = profile.p(i);
  return theorem2_bound(profile.num_arms(), n, smoothness.power->gamma, smoothness.power->omega,
                        profile.p_star, p, profile.delta_max);
}

BoundReport exploration_variant_bound(const GapProfile& profile, const Smoothness& smoothness,
                                      std::uint64_t n, const ExplorationRule& rule) {
  const double ln = log_horizon(n);
  if (profile.p_star < 1.0)
    throw std::invalid_argument("exploration variant bound covers instances with p* = 1 only");
  const double md = static_cast<double>(profile.num_arms());
  // Threshold 2 y_n / f^{-1}(Delta)^2 and the summed failure probability of the
  // confidence event, 2 m t exp(-y_t) per round.
  const double y = rule.y(n);
  double failure = 0.0;
  if (rule.kind == ExplorationRule::Kind::log_scaled) {
    if (!(rule.coefficient > 2.0))
      throw std::invalid_argument("exploration coefficient must exceed 2 for a finite bound");
    failure = 2.0 * riemann_zeta(rule.coefficient - 1.0);
  } else {
    for (std::uint64_t t = 2; t <= n; ++t) {
      const double td = static_cast<double>(t);
      failure += 2.0 / (td * std::log(td));
    }
  }
  BoundReport r;
  r.name = "exploration_variant";
  r.horizon = n;
  const double scale = 2.0 * y / (6.0 * ln);
  for (std::size_t i = 0; i < profile.num_arms(); ++i) {
    const ArmGaps& a = profile.arms[i];
    if (a.bad_count() == 0) continue;
    const double value =
        scale * (sampling_threshold(a.delta_min, 1.0, n, smoothness) * a.delta_min +
                 sampling_threshold_integral(a.delta_min, a.delta_max, 1.0, n, smoothness));
    add_term(r, "arm " + std::to_string(i), value);
  }
  add_term(r, "constant", (failure + 1.0) * md * profile.delta_max);
  smoothness_parameters(r, smoothness);
  r.parameters["y_n"] = y;
  r.parameters["delta_max"] = profile.delta_max;
  r.parameters["m"] = md;
  return r;
}

BoundReport clustered_bound(const ClusterGapProfile& profile, const Smoothness& smoothness,
                            std::uint64_t n) {
  log_horizon(n);
  BoundReport r;
  r.name = "clustered";
  r.horizon = n;
  for (std::size_t c = 0; c < profile.clusters.size(); ++c) {
    const ClusterGaps& g = profile.clusters[c];
    if (!(g.delta_min > 0.0)) continue;
    const double value = sampling_threshold(g.delta_min, 1.0, n, smoothness) * g.delta_min +
                         sampling_threshold_integral(g.delta_min, g.delta_max, 1.0, n, smoothness);
    add_term(r, "cluster " + std::to_string(c), value);
  }
  add_term(r, "constant",
           (kPi2 / 3.0 + 1.0) * static_cast<double>(profile.num_arms) * profile.delta_max);
  smoothness_parameters(r, smoothness);
  r.parameters["alpha"] = profile.alpha;
  r.parameters["delta_max"] = profile.delta_max;
  r.parameters["clusters"] = static_cast<double>(profile.clusters.size());
  return r;
}

BoundReport epsgreedy_bound(double gamma, double c, std::size_t m, std::uint64_t n,
                            double delta_max) {
  const double ln = log_horizon(n);
  require_zeta_argument(c);
  if (!(gamma > 0.0)) throw std::invalid_argument("eps-greedy bound needs gamma > 0");
  BoundReport r;
  r.name = "epsgreedy";
  r.horizon = n;
  add_term(r, "exploration", gamma * ln * delta_max);
  add_term(r, "failure", 3.0 * riemann_zeta(c) * static_cast<double>(m) * delta_max);
  add_term(r, "warmup", gamma * gamma * gamma * delta_max);
  r.parameters["gamma"] = gamma;
  r.parameters["c"] = c;
  r.parameters["m"] = static_cast<double>(m);
  r.parameters["delta_max"] = delta_max;
  return r;
}

BoundReport ucb1_improved_bound(double c, std::span<const double> gaps, std::uint64_t n) {
  const double ln = log_horizon(n);
  require_zeta_argument(c);
  BoundReport r;
  r.name = "ucb1_improved";
  r.horizon = n;
  double gap_sum = 0.0;
  for (std::size_t i = 0; i < gaps.size(); ++i) {
    if (gaps[i] < 0.0) throw std::invalid_argument("gaps must be nonnegative");
    gap_sum += gaps[i];
    if (gaps[i] > 0.0) add_term(r, "arm " + std::to_string(i), 2.0 * (c + 1.0) * ln / gaps[i]);
  }
  add_term(r, "constant", (1.0 + 2.0 * riemann_zeta(c)) * gap_sum);
  r.parameters["c"] = c;
  return r;
}

BoundReport classical_mab_bound(std::span<const double> gaps, std::uint64_t n) {
  const double ln = log_horizon(n);
  BoundReport r;
  r.name = "classical";
  r.horizon = n;
  double delta_max = 0.0;
  for (std::size_t i = 0; i < gaps.size(); ++i) {
    if (gaps[i] < 0.0) throw std::invalid_argument("gaps must be nonnegative");
    delta_max = std::max(delta_max, gaps[i]);
    if (gaps[i] > 0.0) add_term(r, "arm " + std::to_string(i), 6.0 * ln / gaps[i]);
  }
  add_term(r, "constant", (kPi2 / 3.0 + 1.0) * static_cast<double>(gaps.size()) * delta_max);
  r.parameters["delta_max"] = delta_max;
  r.parameters["m"] = static_cast<double>(gaps.size());
  return r;
}

namespace {

BoundReport per_arm_inverse_gap(const GapProfile& profile, std::string name, double numerator,
                                bool divide_by_p, double constant_coefficient, double arms,
                                std::uint64_t n) {
  BoundReport r;
  r.name = std::move(name);
  r.horizon = n;
  for (std::size_t i = 0; i < profile.num_arms(); ++i) {
    const ArmGaps& a = profile.arms[i];
    if (a.bad_count() == 0) continue;
    double value = numerator / a.delta_min;
    if (divide_by_p) value /= profile.p(i);
    add_term(r, "arm " + std::to_string(i), value);
  }
  add_term(r, "constant", constant_coefficient * arms * profile.delta_max);
  r.parameters["alpha"] = profile.alpha;
  r.parameters["delta_max"] = profile.delta_max;
  r.parameters["p_star"] = profile.p_star;
  return r;
}

}  // namespace

BoundReport pmc_bound(const GapProfile& profile, std::size_t edges, std::uint64_t n) {
  const double ln = log_horizon(n);
  const double e = static_cast<double>(edges);
  auto r = per_arm_inverse_gap(profile, "pmc", 12.0 * e * e * ln, false, kPi2 / 3.0 + 1.0, e, n);
  r.parameters["edges"] = e;
  return r;
}

BoundReport pmc_distribution_free_bound(std::size_t edges, std::uint64_t n, double delta_max) {
  const double ln = log_horizon(n);
  const double e = static_cast<double>(edges);
  BoundReport r;
  r.name = "pmc_distribution_free";
  r.horizon = n;
  add_term(r, "leading", std::sqrt(24.0 * e * e * e * static_cast<double>(n) * ln));
  add_term(r, "constant", (kPi2 / 3.0 + 1.0) * e * delta_max);
  r.parameters["edges"] = e;
  r.parameters["delta_max"] = delta_max;
  return r;
}

BoundReport linear_bound(const GapProfile& profile, double a_max, std::size_t max_size,
                         std::uint64_t n) {
  const double ln = log_horizon(n);
  const double l = static_cast<double>(max_size);
  auto r = per_arm_inverse_gap(profile, "linear", 12.0 * a_max * a_max * l * l * ln, false,
                               kPi2 / 3.0 + 1.0, static_cast<double>(profile.num_arms()), n);
  r.parameters["a_max"] = a_max;
  r.parameters["L"] = l;
  return r;
}

BoundReport linear_distribution_free_bound(double a_max, std::size_t max_size, std::size_t m,
                                           std::uint64_t n, double delta_max) {
  const double ln = log_horizon(n);
  const double md = static_cast<double>(m);
  BoundReport r;
  r.name = "linear_distribution_free";
  r.horizon = n;
  add_term(r, "leading",
           a_max * static_cast<double>(max_size) * std::sqrt(24.0 * md * static_cast<double>(n) * ln));
  add_term(r, "constant", (kPi2 / 3.0 + 1.0) * md * delta_max);
  r.parameters["a_max"] = a_max;
  r.parameters["L"] = static_cast<double>(max_size);
  r.parameters["delta_max"] = delta_max;
  return r;
}

BoundReport im_bound(const GapProfile& profile, std::size_t nodes, std::size_t edges,
                     std::uint64_t n) {
  const double ln = log_horizon(n);
  const double v = static_cast<double>(nodes);
  const double e = static_cast<double>(edges);
  auto r = per_arm_inverse_gap(profile, "im", 24.0 * v * v * e * e * ln, true, kPi2 / 2.0 + 1.0, e, n);
  r.parameters["nodes"] = v;
  r.parameters["edges"] = e;
  return r;
}

BoundReport im_distribution_free_bound(std::size_t nodes, std::size_t edges, double p_star,
                                       std::uint64_t n, double delta_max) {
  const double ln = log_horizon(n);
  require_probability(p_star);
  const double v = static_cast<double>(nodes);
  const double e = static_cast<double>(edges);
  BoundReport r;
  r.name = "im_distribution_free";
  r.horizon = n;
  add_term(r, "leading", v * std::sqrt(48.0 * e * e * e * static_cast<double>(n) * ln / p_star));
  add_term(r, "constant", (kPi2 / 2.0 + 1.0) * e * delta_max);
  r.parameters["nodes"] = v;
  r.parameters["edges"] = e;
  r.parameters["p_star"] = p_star;
  r.parameters["delta_max"] = delta_max;
  return r;
}

double riemann_zeta(double c) {
  require_zeta_argument(c);
  // Direct sum up to N - 1, then the Euler-Maclaurin tail from N.
  constexpr int kTerms = 64;
  double sum = 0.0;
  for (int k = kTerms - 1; k >= 1; --k) sum += std::pow(static_cast<double>(k), -c);
  const double n = kTerms;
  double tail = std::pow(n, 1.0 - c) / (c - 1.0) + 0.5 * std::pow(n, -c);
  // B_{2j} / (2j)! times the rising factorial c (c+1) ... (c+2j-2) n^{-c-2j+1}.
  constexpr double kBernoulli[] = {1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0, 5.0 / 66.0};
  double rising = c;
  double factorial = 2.0;
  for (int j = 1; j <= 5; ++j) {
    tail += kBernoulli[j - 1] / factorial * rising * std::pow(n, -c - 2.0 * j + 1.0);
    rising *= (c + 2.0 * j - 1.0) * (c + 2.0 * j);
    factorial *= (2.0 * j + 1.0) * (2.0 * j + 2.0);
  }
  return sum + tail;
}

RegretLedger::RegretLedger(double alpha, double beta, double opt) : baseline_(alpha * beta * opt) {}

void RegretLedger::record(double expected_reward) {
  const double regret = baseline_ - expected_reward;
  per_round_.push_back(regret);
  cumulative_.push_back(total() + regret);
}

double hoeffding_tail(std::uint64_t n, double delta) {
  if (n == 0) throw std::invalid_argument("hoeffding tail needs n >= 1");
  if (!(delta >= 0.0)) throw std::invalid_argument("hoeffding tail needs delta >= 0");
  return 2.0 * std::exp(-2.0 * delta * delta / static_cast<double>(n));
}

double chernoff_tail(std::uint64_t n, double mu, double delta) {
  if (n == 0) throw std::invalid_argument("chernoff tail needs n >= 1");
  if (!(mu >= 0.0 && mu <= 1.0)) throw std::invalid_argument("chernoff tail needs mu in [0, 1]");
  if (!(delta >= 0.0 && delta < 1.0)) throw std::invalid_argument("chernoff tail needs delta in [0, 1)");
  return std::exp(-delta * delta * static_cast<double>(n) * mu / 2.0);
}

double bernstein_tail(std::uint64_t n, double bound_m, double variance_sum, double t) {
  if (n == 0) throw std::invalid_argument("bernstein tail needs n >= 1");
  if (!(bound_m > 0.0)) throw std::invalid_argument("bernstein tail needs M > 0");
  if (!(variance_sum >= 0.0)) throw std::invalid_argument("bernstein tail needs a nonnegative variance sum");
  if (!(t > 0.0)) throw std::invalid_argument("bernstein tail needs t > 0");
  return std::exp(-(t * t / 2.0) / (variance_sum + bound_m * t / 3.0));
}

}  // namespace cmab
