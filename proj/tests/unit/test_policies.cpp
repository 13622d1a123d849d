#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>

#include "doctest.h"
#include "cmab/analysis.hpp"
#include "cmab/policies.hpp"

using namespace cmab;

namespace {

// One round by hand: sample, realize, stamp the round, update.
PlayFeedback step(Policy& policy, const Environment& env, Rng& env_rng, Rng& policy_rng) {
  const auto choice = policy.select(policy_rng);
  auto fb = env.realize(choice.super_arm, env.sample_world(env_rng));
  fb.round = policy.stats().round();
  policy.update(fb);
  return fb;
}

}  // namespace

TEST_CASE("confidence adjustment") {
  CHECK(ucb_adjust(0.3, 0, 5) == 1.0);
  CHECK(ucb_adjust(0.3, 100, 100) == doctest::Approx(0.56283).epsilon(1e-5));
  CHECK(ucb_adjust(0.9, 2, 10) == 1.0);
  // Raw value before the clamp.
  CHECK(0.9 + std::sqrt(3.0 * std::log(10.0) / 4.0) == doctest::Approx(2.214).epsilon(1e-3));
}

TEST_CASE("exploration rules") {
  CHECK(ExplorationRule::standard().y(100) == doctest::Approx(3.0 * std::log(100.0)));
  CHECK(ExplorationRule::with_c(0.5).y(100) == doctest::Approx(1.5 * std::log(100.0)));
  const double ln = std::log(1000.0);
  CHECK(ExplorationRule::log_log().y(1000) == doctest::Approx(2 * ln + std::log(ln)));
  CHECK(ExplorationRule::log_log().y(1) == 0.0);
  CHECK(ucb_adjust(0.2, 10, 50, ExplorationRule::with_c(2.0)) == doctest::Approx(ucb_adjust(0.2, 10, 50)));
}

TEST_CASE("statistics update as running means") {
  ArmStatistics stats(3);
  stats.observe(0, 0.4);
  CHECK(stats.means()[0] == doctest::Approx(0.4));
  CHECK(stats.count(0) == 1);
  CHECK(stats.means()[1] == 1.0);

  ArmStatistics s2(1);
  for (double x : {0.5, 0.5, 0.5, 0.5}) s2.observe(0, x);
  s2.observe(0, 1.0);
  CHECK(s2.means()[0] == doctest::Approx(0.6));
  CHECK(s2.count(0) == 5);

  CHECK_THROWS_AS(s2.observe(0, 1.5), std::invalid_argument);
  PlayFeedback fb;
  fb.round = 3;
  CHECK_THROWS_AS(s2.apply(fb), std::invalid_argument);
}

TEST_CASE("cascade feedback only touches triggered arms") {
  Rng gen(1);
  auto env = std::make_shared<IcInstance>(make_random_ic(6, 10, 1, 0.3, 0.7, gen));
  auto oracle = std::make_shared<ExactOracle>(env);
  CucbPolicy policy(env->num_arms(), oracle);
  Rng er(2), pr(3);
  for (int i = 0; i < 50; ++i) {
    const auto before = policy.stats().counts();
    const auto fb = step(policy, *env, er, pr);
    const auto seen = fb.triggered();
    for (ArmIndex e = 0; e < env->num_arms(); ++e) {
      const bool hit = std::binary_search(seen.begin(), seen.end(), e);
      CHECK(policy.stats().count(e) == before[e] + (hit ? 1 : 0));
    }
  }
}

TEST_CASE("first round hands the oracle the all-ones vector") {
  auto env = std::make_shared<ClassicalMab>(ExpectationVector{0.1, 0.5, 0.9});
  CucbPolicy policy(3, std::make_shared<ExactOracle>(env));
  Rng rng(4);
  const auto first = policy.select(rng);
  CHECK(policy.last_index() == ExpectationVector(3, 1.0));
  CHECK(first.super_arm.id == 0);
  CHECK(policy.name() == "cucb");
}

TEST_CASE("selection follows the hand-computed optimistic index") {
  auto env = std::make_shared<ClassicalMab>(ExpectationVector{0.1, 0.5, 0.9});
  CucbPolicy policy(3, std::make_shared<ExactOracle>(env));
  Rng rng(5);
  // 40 plays per arm with 8, 22 and 20 successes: means 0.2, 0.55, 0.5.
  const int ones[] = {8, 22, 20};
  std::uint64_t t = 0;
  for (ArmIndex i = 0; i < 3; ++i)
    for (int k = 0; k < 40; ++k) {
      policy.select(rng);
      const double x = k < ones[i] ? 1.0 : 0.0;
      ++t;
      policy.update({t, i, {{i, x}}, x});
    }
  // t = 121: radius sqrt(3 ln 121 / 80) = 0.424, indices 0.624, 0.974, 0.924.
  const double radius = std::sqrt(3 * std::log(121.0) / 80);
  const double bar[] = {0.2 + radius, 0.55 + radius, 0.5 + radius};
  const auto chosen = policy.select(rng).super_arm.id;
  for (ArmIndex i = 0; i < 3; ++i) CHECK(policy.last_index()[i] == doctest::Approx(bar[i]));
  CHECK(chosen == static_cast<SuperArmId>(std::max_element(bar, bar + 3) - bar));
  CHECK(chosen == 1);

  // Identical states pick identical arms.
  CucbPolicy a(3, std::make_shared<ExactOracle>(env)), b(3, std::make_shared<ExactOracle>(env));
  Rng ra(6), rb(6);
  CHECK(a.select(ra).super_arm == b.select(rb).super_arm);
}

TEST_CASE("empirical means equal the average of the observed outcomes") {
  Rng gen(7);
  auto env = std::make_shared<PmcInstance>(make_random_pmc(3, 3, 1, 0.6, 0.2, 0.8, gen));
  CucbPolicy policy(env->num_arms(), std::make_shared<GreedyPmcOracle>(env));
  std::vector<std::vector<double>> seen(env->num_arms());
  Rng er(8), pr(9);
  for (int i = 0; i < 300; ++i)
    for (const auto& o : step(policy, *env, er, pr).observations) seen[o.arm].push_back(o.outcome);
  for (ArmIndex i = 0; i < env->num_arms(); ++i) {
    CHECK(policy.stats().count(i) == seen[i].size());
    if (!seen[i].empty())
      CHECK(policy.stats().means()[i] ==
            doctest::Approx(std::accumulate(seen[i].begin(), seen[i].end(), 0.0) / seen[i].size()));
  }
}

TEST_CASE("hidden outcomes never influence the trajectory") {
  Rng gen(10);
  auto env = std::make_shared<IcInstance>(make_random_ic(6, 10, 1, 0.2, 0.8, gen));
  CucbPolicy clean(env->num_arms(), std::make_shared<ExactOracle>(env));
  CucbPolicy noisy(env->num_arms(), std::make_shared<ExactOracle>(env));
  Rng er(11), pa(12), pb(12), scramble(13);
  for (std::uint64_t t = 1; t <= 500; ++t) {
    const auto sa = clean.select(pa).super_arm;
    const auto sb = noisy.select(pb).super_arm;
    REQUIRE(sa == sb);
    auto world = env->sample_world(er);
    auto fa = env->realize(sa, world);
    const auto seen = fa.triggered();
    for (ArmIndex e = 0; e < world.size(); ++e)
      if (!std::binary_search(seen.begin(), seen.end(), e) && scramble.bernoulli(0.5)) world[e] = 1.0 - world[e];
    auto fb = env->realize(sb, world);
    fa.round = fb.round = t;
    REQUIRE(fa == fb);
    clean.update(fa);
    noisy.update(fb);
  }
  CHECK(clean.stats().means() == noisy.stats().means());
}

TEST_CASE("epsilon schedule") {
  auto env = std::make_shared<ClassicalMab>(ExpectationVector{0.2, 0.4, 0.6, 0.8, 0.5});
  EpsGreedyPolicy policy(env, std::make_shared<ExactOracle>(env), 50.0);
  CHECK(policy.epsilon(1) == 1.0);
  CHECK(policy.epsilon(50) == 1.0);
  CHECK(policy.epsilon(100) == doctest::Approx(0.5));
  Rng rng(14);
  for (int t = 1; t <= 50; ++t) {
    policy.select(rng);
    CHECK(policy.last_explored());
  }

  EpsGreedyPolicy never(env, std::make_shared<ExactOracle>(env), 0.0);
  for (int t = 1; t <= 200; ++t) {
    never.select(rng);
    CHECK_FALSE(never.last_explored());
  }
}

TEST_CASE("exploration frequency follows the schedule") {
  auto env = std::make_shared<ClassicalMab>(ExpectationVector{0.2, 0.4, 0.6});
  EpsGreedyPolicy policy(env, std::make_shared<ExactOracle>(env), 30.0);
  Rng rng(15);
  const std::uint64_t t0 = 20000;
  for (std::uint64_t t = 1; t < t0; ++t) policy.select(rng);
  double expected = 0.0, variance = 0.0;
  int explored = 0;
  for (std::uint64_t t = t0; t <= 2 * t0; ++t) {
    policy.select(rng);
    const double e = policy.epsilon(t);
    expected += e;
    variance += e * (1 - e);
    explored += policy.last_explored() ? 1 : 0;
  }
  CHECK(std::abs(explored - expected) <= 3 * std::sqrt(variance));
}

TEST_CASE("exploitation calls the oracle on the raw means") {
  auto env = std::make_shared<ClassicalMab>(ExpectationVector{0.2, 0.4, 0.6});
  EpsGreedyPolicy policy(env, std::make_shared<ExactOracle>(env), 1.0);
  ExactOracle reference(env);
  Rng rng(16), scratch(0);
  int exploited = 0;
  for (std::uint64_t t = 1; t <= 300; ++t) {
    const auto r = policy.select(rng);
    if (!policy.last_explored()) {
      ++exploited;
      CHECK(r.super_arm == reference.select(policy.stats().means(), scratch).super_arm);
    }
    const double x = t % 3 == 0 ? 1.0 : 0.0;
    policy.update({t, r.super_arm.id, {{r.super_arm.id, x}}, x});
  }
  CHECK(exploited > 250);
}

TEST_CASE("epsilon-greedy parameter") {
  const auto id = Smoothness::identity();
  CHECK(eps_greedy_gamma(2.0, 5, id, 2.0) == doctest::Approx(200.0));
  CHECK(eps_greedy_gamma(2.0, 5, id, 0.02) == doctest::Approx(450000.0));
  CHECK(eps_greedy_gamma(2.0, 10, id, 0.02) == doctest::Approx(2 * eps_greedy_gamma(2.0, 5, id, 0.02)));
  CHECK(eps_greedy_gamma(2.0, 10, id, 2.0) == doctest::Approx(2 * eps_greedy_gamma(2.0, 5, id, 2.0)));
  CHECK_THROWS_AS(eps_greedy_gamma(2.0, 5, id, 0.0), std::invalid_argument);
}

TEST_CASE("cluster schemes and the initialization schedule") {
  // 3x3 coverage, k = 2; clusters are the edge sets of each left node.
  PmcInstance pmc(3, 3, {{0, 0, 0.5}, {0, 1, 0.5}, {1, 1, 0.5}, {2, 2, 0.5}}, 2);
  const auto scheme = ClusterScheme::per_node(pmc);
  REQUIRE(scheme.clusters.size() == 3);
  const auto schedule = clustered_init_schedule(pmc, scheme);
  REQUIRE(schedule.size() == 3);
  std::vector<char> covered(3, 0);
  for (const auto& s : schedule)
    for (std::size_t u : s.nodes) covered[u] = 1;
  CHECK(std::count(covered.begin(), covered.end(), 1) == 3);

  ClassicalMab mab({0.1, 0.2, 0.3});
  const auto singletons = ClusterScheme::per_node(mab);
  const auto init = clustered_init_schedule(mab, singletons);
  REQUIRE(init.size() == 3);
  for (std::size_t j = 0; j < 3; ++j) CHECK(init[j].id == j);

  // Arm 2 alone is no union of {0, 1} and {2, 1}-style clusters.
  CHECK_THROWS_AS(ClusterScheme::from_clusters(mab, {{0}, {1}}), std::invalid_argument);
  ClusterScheme orphan = singletons;
  orphan.clusters.push_back({0, 1});
  CHECK_THROWS_AS(clustered_init_schedule(mab, orphan), std::invalid_argument);
}

TEST_CASE("clustered CUCB plays its schedule first") {
  auto env = std::make_shared<ClassicalMab>(ExpectationVector{0.9, 0.2, 0.3});
  const auto scheme = ClusterScheme::per_node(*env);
  CucbPolicy policy(3, std::make_shared<ExactOracle>(env), ExplorationRule::standard(),
                    clustered_init_schedule(*env, scheme));
  CHECK(policy.name() == "cucb_clustered");
  Rng er(17), pr(18);
  for (std::uint64_t t = 1; t <= 3; ++t) CHECK(step(policy, *env, er, pr).super_arm == t - 1);
}

TEST_CASE("UCB1 variant") {
  // (c + 1) / 2 = 3 / 2 exactly when c = 2.
  const double t = 50.0, plays = 7.0;
  CHECK(std::sqrt((2.0 + 1.0) * std::log(t) / (2 * plays)) ==
        doctest::Approx(std::sqrt(3 * std::log(t) / (2 * plays))).epsilon(1e-15));
  CHECK(std::sqrt((3.0 + 1.0) * std::log(t) / (2 * plays)) !=
        doctest::Approx(std::sqrt(3 * std::log(t) / (2 * plays))));

  auto env = std::make_shared<ClassicalMab>(ExpectationVector{0.5, 0.5, 0.5});
  Ucb1ImprovedPolicy policy(env, 2.0);
  Rng rng(19);
  // Initialization plays every arm once; equal outcomes leave a tie at arm 0.
  for (std::uint64_t r = 1; r <= 3; ++r) {
    const auto s = policy.select(rng).super_arm;
    CHECK(s.id == r - 1);
    policy.update({r, s.id, {{s.id, 0.5}}, 0.5});
  }
  CHECK(policy.argmax_index(4) == 0);

  // Hand-built state: means (0.2, 0.6, 0.5), plays (1, 10, 2), t = 13, c = 2.
  Ucb1ImprovedPolicy hand(env, 2.0);
  std::uint64_t round = 0;
  auto feed = [&](ArmIndex i, double x) {
    ++round;
    hand.select(rng);
    hand.update({round, i, {{i, x}}, x});
  };
  feed(0, 0.2);
  for (int k = 0; k < 10; ++k) feed(1, 0.6);
  feed(2, 0.0);
  feed(2, 1.0);
  const double ln = std::log(13.0);
  const double idx[] = {0.2 + std::sqrt(3 * ln / 2), 0.6 + std::sqrt(3 * ln / 20), 0.5 + std::sqrt(3 * ln / 4)};
  const auto expected = static_cast<ArmIndex>(std::max_element(idx, idx + 3) - idx);
  CHECK(hand.argmax_index(13) == expected);
  CHECK(expected == 0);

  CHECK_THROWS_AS(Ucb1ImprovedPolicy(env, 1.0), std::invalid_argument);
}

TEST_CASE("counter diagnostics follow the argmin rule") {
  // a->b, b->c with p = 0.5, and d->e, d->f certain. Seeding a is bad and
  // triggers edge 0 with p = 1 and edge 1 with p = 0.5 (its minimum).
  IcInstance env(6, {{0, 1, 0.5}, {1, 2, 0.5}, {3, 4, 1.0}, {3, 5, 1.0}}, 1);
  const auto profile = compute_gap_profile(env, 1.0);
  const SuperArmId a = env.super_arm_for_nodes({0}).id;
  REQUIRE(profile.is_bad(a));
  REQUIRE(profile.p(0) == doctest::Approx(1.0));
  REQUIRE(profile.p(1) == doctest::Approx(0.5));

  CounterDiagnostics diag(profile);
  std::vector<ArmIndex> trace;
  for (int i = 0; i < 5; ++i) {
    diag.record(a);
    trace.push_back(*diag.last_incremented());
  }
  CHECK(trace == std::vector<ArmIndex>{0, 1, 1, 0, 1});

  CounterDiagnostics quiet(profile);
  for (int i = 0; i < 20; ++i) quiet.record(profile.optimal);
  CHECK(quiet.bad_rounds() == 0);
  CHECK(std::accumulate(quiet.counters().begin(), quiet.counters().end(), std::uint64_t{0}) == 0);

  CounterDiagnostics busy(profile);
  for (int i = 0; i < 100; ++i) busy.record(a);
  CHECK(std::accumulate(busy.counters().begin(), busy.counters().end(), std::uint64_t{0}) == 100);
}

TEST_CASE("counters sum to the number of bad rounds along a run") {
  Rng gen(20);
  auto env = std::make_shared<PmcInstance>(make_random_pmc(4, 4, 2, 0.5, 0.1, 0.9, gen));
  const auto profile = compute_gap_profile(*env, 1.0);
  CucbPolicy policy(env->num_arms(), std::make_shared<ExactOracle>(env));
  CounterDiagnostics diag(profile);
  Rng er(21), pr(22);
  std::uint64_t bad = 0;
  for (int i = 0; i < 2000; ++i) {
    const auto fb = step(policy, *env, er, pr);
    diag.record(fb.super_arm);
    bad += profile.is_bad(fb.super_arm) ? 1 : 0;
  }
  CHECK(diag.bad_rounds() == bad);
  CHECK(std::accumulate(diag.counters().begin(), diag.counters().end(), std::uint64_t{0}) == bad);
}

TEST_CASE("nice-run check") {
  ArmStatistics stats(3);
  CHECK(nice_run_check(stats, {0.1, 0.5, 0.9}, 1).nice);

  stats.observe(0, 1.0);
  // One play: the radius clamps at 1, so a deviation of 0.9 is allowed.
  const auto check = nice_run_check(stats, {0.1, 0.5, 0.9}, 100);
  CHECK(check.nice);
  CHECK(check.radii[0] == 1.0);
  CHECK(check.radii[1] == 1.0);
  CHECK(check.deviations[0] == doctest::Approx(0.9));

  for (int i = 0; i < 100; ++i) stats.observe(1, 1.0);
  // sqrt(3 ln 200 / 200) is about 0.28 < 0.5.
  const auto bad = nice_run_check(stats, {0.1, 0.5, 0.9}, 200);
  CHECK_FALSE(bad.nice);
  CHECK(bad.radii[1] == doctest::Approx(std::sqrt(3 * std::log(200.0) / 200)));

  ArmStatistics exact(2);
  exact.observe(0, 1.0);
  exact.observe(1, 0.0);
  CHECK(nice_run_check(exact, {1.0, 0.0}, 50).nice);
}
