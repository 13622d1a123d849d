#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <boost/math/special_functions/zeta.hpp>

#include "doctest.h"
#include "cmab/analysis.hpp"
#include "cmab/environments.hpp"

using namespace cmab;

namespace {

constexpr double kPi2 = std::numbers::pi * std::numbers::pi;

double term(const BoundReport& r, const std::string& label) {
  for (const auto& t : r.terms)
    if (t.label == label) return t.value;
  FAIL("missing term " << label);
  return 0.0;
}

bool rel_close(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b)); }

}  // namespace

TEST_CASE("classical gap profile") {
  ClassicalMab env({0.1, 0.5, 0.9});
  const auto g = compute_gap_profile(env, 1.0);
  CHECK(g.opt == doctest::Approx(0.9));
  CHECK(g.optimal == 2);
  REQUIRE(g.bad_set.size() == 2);
  REQUIRE(g.arms[0].gaps.size() == 1);
  CHECK(g.arms[0].gaps[0] == doctest::Approx(0.8));
  CHECK(g.arms[1].delta_min == doctest::Approx(0.4));
  CHECK(g.arms[2].bad_count() == 0);
  CHECK(g.delta_max == doctest::Approx(0.8));
  CHECK(g.delta_min == doctest::Approx(0.4));
  CHECK(g.p_star == 1.0);
}

TEST_CASE("equal rewards leave no bad super arm") {
  ClassicalMab env({0.4, 0.4, 0.4});
  const auto g = compute_gap_profile(env, 1.0);
  CHECK(g.bad_set.empty());
  for (const auto& a : g.arms) CHECK(a.bad_count() == 0);
  CHECK(g.delta_max == 0.0);
}

TEST_CASE("coverage bad set matches an independent brute force") {
  Rng rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    auto env = make_random_pmc(3, 3, 1, 0.6, 0.1, 0.9, rng);
    const double alpha = 1.0 - std::exp(-1.0);
    const auto g = compute_gap_profile(env, alpha);
    // Reward of left node u: sum over right nodes of 1 - prod (1 - p) over u's edges.
    std::vector<double> reward(3, 0.0);
    for (std::size_t u = 0; u < 3; ++u)
      for (std::size_t v = 0; v < 3; ++v) {
        double miss = 1.0;
        for (const auto& e : env.edges())
          if (e.from == u && e.to == v) miss *= 1.0 - e.probability;
        reward[u] += 1.0 - miss;
      }
    const double opt = *std::max_element(reward.begin(), reward.end());
    CHECK(g.opt == doctest::Approx(opt));
    for (std::size_t u = 0; u < 3; ++u) {
      const SuperArmId id = env.super_arm_for_nodes({u}).id;
      CHECK(g.is_bad(id) == (reward[u] < alpha * opt - 1e-12));
    }
  }
}

TEST_CASE("gap profile is invariant under relabeling super arms") {
  const ExpectationVector mu{0.2, 0.7, 0.4, 0.9};
  std::vector<LinearSuperArmSpec> specs = {{{0, 1}, {1.0, 1.0}}, {{1, 2}, {1.0, 2.0}}, {{2, 3}, {1.0, 1.0}},
                                           {{0, 3}, {2.0, 1.0}}, {{0, 2}, {1.0, 1.0}}};
  const std::vector<std::size_t> perm = {3, 0, 4, 1, 2};
  std::vector<LinearSuperArmSpec> shuffled;
  for (std::size_t j : perm) shuffled.push_back(specs[j]);
  LinearInstance a(mu, specs), b(mu, shuffled);
  const auto ga = compute_gap_profile(a, 1.0);
  const auto gb = compute_gap_profile(b, 1.0);
  CHECK(ga.opt == gb.opt);
  CHECK(perm[gb.optimal] == ga.optimal);
  for (std::size_t j = 0; j < perm.size(); ++j) {
    CHECK(gb.rewards[j] == ga.rewards[perm[j]]);
    CHECK(gb.is_bad(j) == ga.is_bad(perm[j]));
  }
  for (ArmIndex i = 0; i < mu.size(); ++i) {
    CHECK(ga.arms[i].gaps == gb.arms[i].gaps);
    CHECK(ga.arms[i].trigger_probability == gb.arms[i].trigger_probability);
  }
  CHECK(ga.delta_min == gb.delta_min);
  CHECK(ga.delta_max == gb.delta_max);
}

TEST_CASE("cascade profile uses trigger probabilities") {
  IcInstance env(6, {{0, 1, 0.5}, {1, 2, 0.5}, {3, 4, 1.0}, {3, 5, 1.0}}, 1);
  const auto g = compute_gap_profile(env, 1.0);
  CHECK(g.opt == doctest::Approx(3.0));
  CHECK(g.p_star == doctest::Approx(0.5));
  CHECK(g.p(1) == doctest::Approx(0.5));
  CHECK(g.p(2) == 1.0);
}

TEST_CASE("sampling threshold") {
  const auto id = Smoothness::identity();
  CHECK(sampling_threshold(0.5, 1.0, 1000, id) == doctest::Approx(165.787).epsilon(1e-5));
  CHECK(sampling_threshold(1.0, 0.5, 1000, id) == doctest::Approx(331.574).epsilon(1e-5));
  double previous = INFINITY;
  for (double d = 0.05; d < 2.0; d += 0.05) {
    const double v = sampling_threshold(d, 1.0, 1000, id);
    CHECK(v < previous);
    previous = v;
  }
  CHECK_THROWS_AS(sampling_threshold(0.0, 1.0, 1000, id), std::invalid_argument);
  CHECK_THROWS_AS(sampling_threshold(0.5, 0.0, 1000, id), std::invalid_argument);
  CHECK_THROWS_AS(sampling_threshold(0.5, 1.5, 1000, id), std::invalid_argument);
  CHECK_THROWS_AS(sampling_threshold(0.5, 1.0, 1, id), std::invalid_argument);
}

TEST_CASE("closed-form threshold integral matches quadrature") {
  for (const auto& f : {Smoothness::linear(3.0), Smoothness::identity(), Smoothness::power_law(2.0, 0.6)}) {
    for (double p : {1.0, 0.4, 0.05}) {
      const double closed = sampling_threshold_integral(0.1, 5.0, p, 10000, f);
      const double numeric = sampling_threshold_integral_numeric(0.1, 5.0, p, 10000, f);
      CHECK(rel_close(closed, numeric, 1e-6));
    }
  }
  CHECK(sampling_threshold_integral(0.3, 0.3, 0.5, 100, Smoothness::identity()) == 0.0);
}

TEST_CASE("first bound reduces to the classical bound") {
  ClassicalMab env({0.1, 0.5, 0.9});
  const auto g = compute_gap_profile(env, 1.0);
  const std::vector<double> gaps = {0.8, 0.4, 0.0};
  for (std::uint64_t n : {10ULL, 1000ULL, 100000ULL}) {
    const auto t1 = theorem1_bound(g, env.smoothness(), n);
    const auto cl = classical_mab_bound(gaps, n);
    const double ln = std::log(static_cast<double>(n));
    const double hand = 6 * ln / 0.8 + 6 * ln / 0.4 + (kPi2 / 3 + 1) * 3 * 0.8;
    CHECK(t1.value == doctest::Approx(hand).epsilon(1e-12));
    CHECK(cl.value == doctest::Approx(hand).epsilon(1e-12));
  }
}

TEST_CASE("first bound with one bad super arm has no integral") {
  ClassicalMab env({0.3, 0.9});
  const auto g = compute_gap_profile(env, 1.0);
  const auto r = theorem1_bound(g, Smoothness::identity(), 100);
  CHECK(term(r, "arm 0") == doctest::Approx(6 * std::log(100.0) / 0.6));
}

TEST_CASE("first bound on a triggered instance uses the larger constant") {
  IcInstance env(6, {{0, 1, 0.5}, {1, 2, 0.5}, {3, 4, 1.0}, {3, 5, 1.0}}, 1);
  const auto g = compute_gap_profile(env, 1.0);
  const auto r = theorem1_bound(g, env.smoothness(), 1000);
  CHECK(term(r, "constant") == doctest::Approx((3 * kPi2 / 6 + 1) * 4 * g.delta_max));
  // Closed form and quadrature agree for the whole report.
  double numeric = term(r, "constant");
  for (ArmIndex i = 0; i < g.num_arms(); ++i) {
    const auto& a = g.arms[i];
    if (a.bad_count() == 0) continue;
    numeric += sampling_threshold(a.delta_min, g.p(i), 1000, env.smoothness()) * a.delta_min +
               sampling_threshold_integral_numeric(a.delta_min, a.delta_max, g.p(i), 1000, env.smoothness());
  }
  CHECK(rel_close(r.value, numeric, 1e-6));
}

TEST_CASE("distribution-independent bound") {
  // omega = 1, gamma = 1, p* = 1, m = 4: 2 sqrt(24 n ln n) + (pi^2/3 + 1) 4 Delta_max.
  for (std::uint64_t n : {7ULL, 8ULL, 1000ULL}) {
    const double nd = static_cast<double>(n), ln = std::log(nd);
    const auto r = theorem2_bound(4, n, 1.0, 1.0, 1.0, {}, 0.7);
    CHECK(r.value == doctest::Approx(2 * std::sqrt(24 * ln) * std::sqrt(nd) + (kPi2 / 3 + 1) * 4 * 0.7).epsilon(1e-12));
  }
  // Doubling n scales the leading term by sqrt(2 ln 2n / ln n).
  for (std::uint64_t n : {100ULL, 5000ULL, 1000000ULL}) {
    const double ratio = term(theorem2_bound(5, 2 * n, 2.0, 1.0, 1.0, {}, 1.0), "leading") /
                         term(theorem2_bound(5, n, 2.0, 1.0, 1.0, {}, 1.0), "leading");
    CHECK(ratio == doctest::Approx(std::sqrt(2 * std::log(2.0 * n) / std::log(static_cast<double>(n)))));
  }
  // Leading term is proportional to sqrt(m n ln n).
  for (std::size_t m : {2, 8, 32}) {
    const std::uint64_t n = 4096;
    const double lead = term(theorem2_bound(m, n, 1.0, 1.0, 1.0, {}, 1.0), "leading");
    CHECK(lead / std::sqrt(m * n * std::log(4096.0)) == doctest::Approx(2 * std::sqrt(6.0)));
  }
  // p* < 1 adds the trigger sum and uses 12 m ln n / p*.
  const std::vector<double> p = {1.0, 0.5, 0.25};
  const auto q = theorem2_bound(3, 100, 1.5, 0.5, 0.25, p, 2.0);
  const double ln = std::log(100.0);
  const double lead = 2 * 1.5 / 1.5 * std::pow(12 * 3 * ln / 0.25, 0.25) * std::pow(100.0, 0.75);
  const double trig = (24 * ln / 1.0 + 24 * ln / 0.5 + 24 * ln / 0.25) * 2.0;
  CHECK(q.value == doctest::Approx(lead + trig + (kPi2 / 2 + 1) * 3 * 2.0).epsilon(1e-12));
  CHECK_THROWS_AS(theorem2_bound(3, 100, 1.0, 1.5, 1.0, {}, 1.0), std::invalid_argument);
}

TEST_CASE("exploration-rule bound") {
  ClassicalMab env({0.1, 0.5, 0.9});
  const auto g = compute_gap_profile(env, 1.0);
  const std::uint64_t n = 10000;
  const auto standard = exploration_variant_bound(g, env.smoothness(), n, ExplorationRule::standard());
  // The default rule scales the thresholds by 1 and the failure sum is 2 zeta(2).
  const auto t1 = theorem1_bound(g, env.smoothness(), n);
  CHECK(term(standard, "arm 0") == doctest::Approx(term(t1, "arm 0")));
  CHECK(term(standard, "constant") == doctest::Approx((kPi2 / 3 + 1) * 3 * 0.8));
  const auto wider = exploration_variant_bound(g, env.smoothness(), n, ExplorationRule::with_c(4.0));
  CHECK(term(wider, "arm 1") == doctest::Approx(term(t1, "arm 1") * 5.0 / 3.0));
  CHECK(exploration_variant_bound(g, env.smoothness(), 1000, ExplorationRule::log_log()).value <
        exploration_variant_bound(g, env.smoothness(), 2000, ExplorationRule::log_log()).value);
  CHECK_THROWS_AS(exploration_variant_bound(g, env.smoothness(), n, ExplorationRule::with_c(0.5)),
                  std::invalid_argument);
}

TEST_CASE("clustered bound") {
  // Singleton clusters on a classical instance reproduce the first bound.
  ClassicalMab mab({0.1, 0.5, 0.9});
  const auto g = compute_gap_profile(mab, 1.0);
  const auto cp = compute_cluster_profile(g, ClusterScheme::per_node(mab));
  CHECK(clustered_bound(cp, mab.smoothness(), 5000).value ==
        doctest::Approx(theorem1_bound(g, mab.smoothness(), 5000).value));

  // 3x3 coverage with k = 1 and per-node clusters, against a hand evaluation.
  PmcInstance pmc(3, 3, {{0, 0, 0.9}, {0, 1, 0.8}, {1, 1, 0.5}, {2, 2, 0.2}}, 1);
  const auto gp = compute_gap_profile(pmc, 1.0);
  const auto scheme = ClusterScheme::per_node(pmc);
  const auto cpp = compute_cluster_profile(gp, scheme);
  // Rewards 1.7, 0.5, 0.2: gaps 1.2 (node 1) and 1.5 (node 2); f(x) = 4x.
  const std::uint64_t n = 1000;
  const double ln = std::log(1000.0);
  auto thr = [&](double d) { return 6 * ln / std::pow(d / 4, 2); };
  const double hand = thr(1.2) * 1.2 + thr(1.5) * 1.5 + (kPi2 / 3 + 1) * 4 * 1.5;
  const auto cb = clustered_bound(cpp, pmc.smoothness(), n);
  CHECK(cb.value == doctest::Approx(hand).epsilon(1e-12));
  CHECK(cb.value <= theorem1_bound(gp, pmc.smoothness(), n).value);
}

TEST_CASE("zeta") {
  CHECK(riemann_zeta(2.0) == doctest::Approx(kPi2 / 6).epsilon(1e-12));
  CHECK(std::abs(riemann_zeta(2.0) - kPi2 / 6) < 1e-9);
  for (double c : {1.01, 1.1, 1.5, 2.5, 3.0, 4.0, 7.5})
    CHECK(std::abs(riemann_zeta(c) - boost::math::zeta(c)) < 1e-10);
  CHECK_THROWS_AS(riemann_zeta(1.0), std::invalid_argument);
}

TEST_CASE("epsilon-greedy bound") {
  const auto r = epsgreedy_bound(200, 2, 5, 1000000, 1.0);
  CHECK(r.value == doctest::Approx(200 * std::log(1e6) + 3 * kPi2 / 6 * 5 + 8e6).epsilon(1e-12));
  CHECK(epsgreedy_bound(200, 2, 5, 1000, 1.0).value < r.value);
  CHECK_THROWS_AS(epsgreedy_bound(200, 1.0, 5, 1000, 1.0), std::invalid_argument);
}

TEST_CASE("improved UCB1 bound") {
  const std::vector<double> gaps = {0.5};
  const auto r = ucb1_improved_bound(2.0, gaps, 3);
  CHECK(r.value == doctest::Approx(6 * std::log(3.0) / 0.5 + (1 + kPi2 / 3) * 0.5).epsilon(1e-12));
  // Leading coefficient 2(c + 1) tends to 4 as c approaches 1.
  const std::vector<double> unit = {1.0};
  const double ln = std::log(1000.0);
  for (double c : {1.1, 1.01, 1.001}) {
    const double coefficient = term(ucb1_improved_bound(c, unit, 1000), "arm 0") / ln;
    CHECK(std::abs(coefficient - 4.0) <= 2 * (c - 1) + 1e-12);
  }
  const std::vector<double> mixed = {0.0, 0.3};
  const auto m = ucb1_improved_bound(2.0, mixed, 100);
  CHECK(m.terms.size() == 2);
  CHECK(term(m, "constant") == doctest::Approx((1 + kPi2 / 3) * 0.3));
  CHECK_THROWS_AS(ucb1_improved_bound(1.0, gaps, 100), std::invalid_argument);
}

TEST_CASE("application bounds") {
  const double ln = std::log(500.0);
  CHECK(pmc_distribution_free_bound(12, 500, 1.0).value ==
        doctest::Approx(std::sqrt(24 * 1728 * 500 * ln) + (kPi2 / 3 + 1) * 12));
  CHECK(linear_distribution_free_bound(2.0, 3, 6, 500, 0.5).value ==
        doctest::Approx(6 * std::sqrt(24 * 6 * 500 * ln) + (kPi2 / 3 + 1) * 6 * 0.5));
  CHECK(im_distribution_free_bound(6, 10, 0.5, 500, 2.0).value ==
        doctest::Approx(6 * std::sqrt(48 * 1000 * 500 * ln / 0.5) + (kPi2 / 2 + 1) * 10 * 2.0));

  PmcInstance pmc(3, 3, {{0, 0, 0.9}, {0, 1, 0.8}, {1, 1, 0.5}, {2, 2, 0.2}}, 1);
  const auto g = compute_gap_profile(pmc, 1.0);
  const auto r = pmc_bound(g, 4, 500);
  // Edges 2 and 3 are the bad arms, gaps 1.2 and 1.5.
  CHECK(r.value == doctest::Approx(12 * 16 * ln / 1.2 + 12 * 16 * ln / 1.5 + (kPi2 / 3 + 1) * 4 * 1.5));
}

TEST_CASE("bounds are nondecreasing in the horizon") {
  ClassicalMab mab({0.1, 0.5, 0.9});
  IcInstance ic(6, {{0, 1, 0.5}, {1, 2, 0.5}, {3, 4, 1.0}, {3, 5, 1.0}}, 1);
  PmcInstance pmc(3, 3, {{0, 0, 0.9}, {0, 1, 0.8}, {1, 1, 0.5}, {2, 2, 0.2}}, 1);
  const auto gm = compute_gap_profile(mab, 1.0);
  const auto gi = compute_gap_profile(ic, 1.0);
  const auto gp = compute_gap_profile(pmc, 1.0);
  const auto cp = compute_cluster_profile(gp, ClusterScheme::per_node(pmc));
  const std::vector<double> gaps = {0.8, 0.4, 0.0};
  std::vector<double> prev(14, -1.0);
  for (std::uint64_t n = 2; n <= 1 << 20; n *= 2) {
    const std::vector<double> now = {
        theorem1_bound(gm, mab.smoothness(), n).value,
        theorem1_bound(gi, ic.smoothness(), n).value,
        theorem2_bound(gi, ic.smoothness(), n).value,
        exploration_variant_bound(gm, mab.smoothness(), n, ExplorationRule::with_c(3.0)).value,
        clustered_bound(cp, pmc.smoothness(), n).value,
        epsgreedy_bound(50, 2, 3, n, 0.8).value,
        ucb1_improved_bound(2, gaps, n).value,
        classical_mab_bound(gaps, n).value,
        pmc_bound(gp, 4, n).value,
        pmc_distribution_free_bound(4, n, 1.5).value,
        linear_bound(gm, 1.0, 1, n).value,
        linear_distribution_free_bound(1.0, 1, 3, n, 0.8).value,
        im_bound(gi, 6, 4, n).value,
        im_distribution_free_bound(6, 4, 0.5, n, gi.delta_max).value,
    };
    for (std::size_t k = 0; k < now.size(); ++k) {
      CHECK(std::isfinite(now[k]));
      CHECK(now[k] >= prev[k]);
    }
    prev = now;
  }
}

TEST_CASE("regret ledger") {
  RegretLedger best(1.0, 1.0, 0.9);
  for (int i = 0; i < 10; ++i) best.record(0.9);
  CHECK(best.total() == 0.0);

  RegretLedger fixed(1.0, 1.0, 0.9);
  for (int i = 0; i < 1000; ++i) fixed.record(0.5);
  CHECK(fixed.total() == doctest::Approx(1000 * 0.4));

  RegretLedger mixed(0.5, 0.8, 2.0);
  Rng rng(2);
  for (int i = 0; i < 500; ++i) mixed.record(2.0 * rng.uniform());
  CHECK(mixed.baseline() == doctest::Approx(0.8));
  double sum = 0.0;
  for (std::size_t t = 0; t < mixed.rounds(); ++t) {
    sum += mixed.per_round()[t];
    CHECK(mixed.cumulative()[t] == doctest::Approx(sum));
  }
}

TEST_CASE("concentration tails") {
  CHECK(hoeffding_tail(100, 10) == doctest::Approx(2 * std::exp(-2.0)));
  CHECK(hoeffding_tail(100, 10) == doctest::Approx(0.2707).epsilon(1e-4));
  CHECK(chernoff_tail(50, 0.3, 0.0) == 1.0);
  CHECK(chernoff_tail(100, 0.5, 0.5) == doctest::Approx(std::exp(-6.25)));
  CHECK(bernstein_tail(10, 2.0, 0.0, 5.0) == doctest::Approx(std::exp(-3 * 5.0 / (2 * 2.0))));
  CHECK_THROWS_AS(chernoff_tail(10, 0.5, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(hoeffding_tail(0, 1.0), std::invalid_argument);
}

TEST_CASE("tails dominate empirical deviation frequencies") {
  Rng rng(3);
  const int trials = 20000;
  const std::uint64_t n = 50;
  const double mu = 0.3;
  int hoeff = 0, chern = 0, bern = 0;
  for (int k = 0; k < trials; ++k) {
    int y = 0;
    for (std::uint64_t i = 0; i < n; ++i) y += rng.bernoulli(mu) ? 1 : 0;
    if (std::abs(y - n * mu) >= 5.0) ++hoeff;
    if (y <= (1 - 0.4) * n * mu) ++chern;
    if (std::abs(y - n * mu) > 6.0) ++bern;
  }
  auto within = [&](int hits, double tail) {
    const double p = std::min(tail, 1.0);
    return static_cast<double>(hits) / trials <= p + 3 * std::sqrt(p * (1 - p) / trials) + 1e-12;
  };
  CHECK(within(hoeff, hoeffding_tail(n, 5.0)));
  CHECK(within(chern, chernoff_tail(n, mu, 0.4)));
  CHECK(within(bern, bernstein_tail(n, 1.0, n * mu * (1 - mu), 6.0)));
}
