#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "fixtures.hpp"
#include "npglab/solver.hpp"

using namespace npglab;
using test::deterministic_policy;
using test::make_m2;
using test::random_policy;
using test::random_rho;

using test::power_series_value;

TEST_CASE("evaluate_policy matches hand-solved fixed points") {
  const Mdp bandit = bandit_mdp({1.0, 0.0}, 0.9);
  const ValueFn vb = evaluate_policy(bandit, uniform_policy(1, 2));
  CHECK(vb.v[0] == doctest::Approx(5.0).epsilon(1e-12));

  const Mdp m2 = make_m2();
  const ValueFn v2 = evaluate_policy(m2, uniform_policy(2, 2));
  CHECK(v2.v[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(v2.v[1] == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("evaluate_policy of a zero-reward instance is the zero vector") {
  Mdp m2 = make_m2();
  std::fill(m2.reward.begin(), m2.reward.end(), 0.0);
  for (double v : evaluate_policy(m2, uniform_policy(2, 2)).v) CHECK(v == 0.0);
}

TEST_CASE("evaluate_policy rejects mismatched dimensions") {
  CHECK_THROWS_AS(evaluate_policy(make_m2(), uniform_policy(3, 2)),
                  std::invalid_argument);
}

TEST_CASE("evaluate_policy agrees with the truncated power series") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Mdp mdp = random_mdp({seed}, 2 + seed % 5, 2 + seed % 3, 0.8);
    const Policy pi = random_policy(seed + 100, mdp.n_states, mdp.n_actions);
    const ValueFn v = evaluate_policy(mdp, pi);
    const std::vector<double> oracle = power_series_value(mdp, pi);
    for (int s = 0; s < mdp.n_states; ++s) {
      CHECK(std::abs(v.v[s] - oracle[s]) < 1e-8);
    }
  }
}

TEST_CASE("evaluate_policy residual stays below 1e-10") {
  const Mdp mdp = random_mdp({3}, 40, 5, 0.99);
  const Policy pi = random_policy(4, 40, 5);
  const ValueFn v = evaluate_policy(mdp, pi);
  const Eigen::MatrixXd p = policy_transition_matrix(mdp, pi);
  const Eigen::VectorXd r = policy_reward_vector(mdp, pi);
  Eigen::VectorXd vv(40);
  for (int s = 0; s < 40; ++s) vv(s) = v.v[s];
  const Eigen::VectorXd residual =
      (Eigen::MatrixXd::Identity(40, 40) - mdp.discount * p) * vv - r;
  CHECK(residual.cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("q_from_policy applies the one-step backup") {
  const Mdp bandit = bandit_mdp({1.0, 0.0}, 0.9);
  const QFn qb = q_from_policy(bandit, evaluate_policy(bandit, uniform_policy(1, 2)));
  CHECK(qb.at(0, 0) == doctest::Approx(5.5).epsilon(1e-12));
  CHECK(qb.at(0, 1) == doctest::Approx(4.5).epsilon(1e-12));

  const Mdp m2 = make_m2();
  const QFn q2 = q_from_policy(m2, evaluate_policy(m2, uniform_policy(2, 2)));
  CHECK(q2.at(0, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(q2.at(0, 1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(q2.at(1, 0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(q2.at(1, 1) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("advantage is the elementwise difference") {
  const Mdp bandit = bandit_mdp({1.0, 0.0}, 0.9);
  const ValueFn v = evaluate_policy(bandit, uniform_policy(1, 2));
  const AdvantageFn a = advantage(q_from_policy(bandit, v), v);
  CHECK(a.at(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(a.at(0, 1) == doctest::Approx(-0.5).epsilon(1e-12));
}

TEST_CASE("advantage of the played action vanishes for deterministic policies") {
  const Mdp mdp = random_mdp({11}, 5, 3, 0.9);
  const Policy pi = deterministic_policy(5, 3, {0, 2, 1, 1, 0});
  const ValueFn v = evaluate_policy(mdp, pi);
  const AdvantageFn a = advantage(q_from_policy(mdp, v), v);
  for (int s = 0; s < 5; ++s) {
    int played = 0;
    for (int act = 0; act < 3; ++act) {
      if (pi.prob(s, act) == 1.0) played = act;
    }
    CHECK(std::abs(a.at(s, played)) < 1e-10);
  }
}

TEST_CASE("advantage averages to zero under the generating policy") {
  const Mdp mdp = random_mdp({13}, 6, 4, 0.8);
  const Policy pi = random_policy(14, 6, 4);
  const ValueFn v = evaluate_policy(mdp, pi);
  const AdvantageFn a = advantage(q_from_policy(mdp, v), v);
  for (int s = 0; s < 6; ++s) {
    double mean = 0.0;
    for (int act = 0; act < 4; ++act) mean += pi.prob(s, act) * a.at(s, act);
    CHECK(std::abs(mean) < 1e-10);
  }
}

TEST_CASE("discounted_visitation matches hand values") {
  const Mdp bandit = bandit_mdp({0.3}, 0.5);
  const VisitDist single =
      discounted_visitation(bandit, uniform_policy(1, 1), uniform_dist(1));
  CHECK(single.d[0] == doctest::Approx(1.0).epsilon(1e-12));

  const Mdp m2 = make_m2();
  const VisitDist d =
      discounted_visitation(m2, uniform_policy(2, 2), delta_dist(2, 0));
  CHECK(d.d[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(d.d[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("discounted_visitation fixes stationary initial distributions") {
  // All transition rows identical, so P_pi is doubly stochastic and the
  // uniform distribution is stationary.
  Mdp mdp = make_m2();
  for (int s = 0; s < 2; ++s) {
    for (int a = 0; a < 2; ++a) {
      mdp.p(s, a, 0) = 0.5;
      mdp.p(s, a, 1) = 0.5;
    }
  }
  const VisitDist d =
      discounted_visitation(mdp, test::random_policy(5, 2, 2), uniform_dist(2));
  CHECK(d.d[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(d.d[1] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("discounted_visitation normalizes") {
  const Mdp mdp = random_mdp({21}, 8, 3, 0.95);
  const VisitDist d =
      discounted_visitation(mdp, random_policy(2, 8, 3), random_rho(3, 8));
  double sum = 0.0;
  for (double v : d.d) {
    CHECK(v >= 0.0);
    sum += v;
  }
  CHECK(std::abs(sum - 1.0) < 1e-10);
}

TEST_CASE("perf_difference closed cases") {
  const Mdp bandit = bandit_mdp({1.0, 0.0}, 0.9);
  const Policy best = deterministic_policy(1, 2, {0});
  const Policy uni = uniform_policy(1, 2);
  CHECK(perf_difference(bandit, best, uni, uniform_dist(1)) ==
        doctest::Approx(5.0).epsilon(1e-10));
  CHECK(std::abs(perf_difference(bandit, uni, uni, uniform_dist(1))) < 1e-10);

  const Mdp m2 = make_m2();
  const Policy uni2 = uniform_policy(2, 2);
  CHECK(std::abs(perf_difference(m2, uni2, uni2, uniform_dist(2))) < 1e-10);
}

TEST_CASE("perf_difference equals the direct value difference") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Mdp mdp = random_mdp({seed}, 2 + seed % 5, 2 + seed % 3, 0.8);
    const Policy pi1 = random_policy(seed * 3 + 1, mdp.n_states, mdp.n_actions);
    const Policy pi2 = random_policy(seed * 3 + 2, mdp.n_states, mdp.n_actions);
    const InitialDist rho = random_rho(seed * 3 + 3, mdp.n_states);
    const double lhs =
        evaluate_policy(mdp, pi1)(rho) - evaluate_policy(mdp, pi2)(rho);
    const double rhs = perf_difference(mdp, pi1, pi2, rho);
    CHECK(std::abs(lhs - rhs) < 1e-8);
  }
}

TEST_CASE("value_iteration solves the closed-form instances") {
  const ViResult bandit = value_iteration(bandit_mdp({1.0, 0.0}, 0.9));
  CHECK(bandit.v_star.v[0] == doctest::Approx(10.0).epsilon(1e-11));
  CHECK(bandit.q_star.at(0, 0) == doctest::Approx(10.0).epsilon(1e-11));
  CHECK(bandit.q_star.at(0, 1) == doctest::Approx(9.0).epsilon(1e-11));

  const ViResult m2 = value_iteration(make_m2());
  CHECK(m2.v_star.v[0] == doctest::Approx(1.0).epsilon(1e-11));
  CHECK(m2.v_star.v[1] == doctest::Approx(2.0).epsilon(1e-11));
  CHECK(m2.q_star.at(0, 0) == doctest::Approx(0.5).epsilon(1e-11));
  CHECK(m2.q_star.at(0, 1) == doctest::Approx(1.0).epsilon(1e-11));

  Mdp zero = make_m2();
  std::fill(zero.reward.begin(), zero.reward.end(), 0.0);
  for (double v : value_iteration(zero).v_star.v) CHECK(v == 0.0);

  CHECK_THROWS_AS(value_iteration(make_m2(), 0.0), std::invalid_argument);
}

TEST_CASE("value_iteration dominates every policy") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Mdp mdp = random_mdp({seed}, 5, 3, 0.9);
    const ViResult vi = value_iteration(mdp);
    for (int trial = 0; trial < 100; ++trial) {
      const ValueFn v = evaluate_policy(
          mdp, random_policy(seed * 1000 + trial, mdp.n_states, mdp.n_actions));
      for (int s = 0; s < mdp.n_states; ++s) {
        CHECK(vi.v_star.v[s] >= v.v[s] - 1e-9);
      }
    }
  }
}

TEST_CASE("value and Q functions respect the strict-mode range bounds") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Mdp mdp = random_mdp({seed}, 4, 3, 0.9);
    const double cap = 1.0 / (1.0 - mdp.discount);
    const Policy pi = random_policy(seed + 7, 4, 3);
    const ValueFn v = evaluate_policy(mdp, pi);
    const QFn q = q_from_policy(mdp, v);
    const AdvantageFn a = advantage(q, v);
    for (int s = 0; s < 4; ++s) {
      CHECK(v.v[s] >= -1e-10);
      CHECK(v.v[s] <= cap + 1e-10);
      for (int act = 0; act < 3; ++act) {
        CHECK(q.at(s, act) >= -1e-10);
        CHECK(q.at(s, act) <= cap + 1e-10);
        CHECK(a.at(s, act) >= -cap - 1e-10);
        CHECK(a.at(s, act) <= cap + 1e-10);
      }
    }
  }
}

TEST_CASE("optimality_report classifies M2") {
  const Mdp m2 = make_m2();
  const OptimalityReport rep = solve_optimal(m2);
  CHECK(rep.dummy_states == std::vector<int>{1});
  CHECK(rep.optimal_sets[0] == std::vector<int>{1});
  CHECK(rep.gap_delta == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(!rep.is_dummy[0]);
  CHECK(rep.is_dummy[1]);
}

TEST_CASE("optimality_report on bandits") {
  const OptimalityReport sep = solve_optimal(bandit_mdp({1.0, 0.0}, 0.9));
  CHECK(sep.dummy_states.empty());
  CHECK(sep.gap_delta == doctest::Approx(1.0).epsilon(1e-9));

  const OptimalityReport flat = solve_optimal(bandit_mdp({0.4, 0.4, 0.4}, 0.9));
  CHECK(flat.dummy_states == std::vector<int>{0});
  CHECK(flat.gap_delta == kInf);
}

TEST_CASE("optimality_report keeps delta nonnegative across random instances") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const OptimalityReport rep = solve_optimal(random_mdp({seed}, 5, 3, 0.8));
    CHECK(rep.gap_delta >= 0.0);
    if (static_cast<int>(rep.dummy_states.size()) != 5) CHECK(rep.gap_delta > 0.0);
    for (const auto& set : rep.optimal_sets) CHECK(!set.empty());
  }
}

TEST_CASE("greedy_report gaps and conventions") {
  const Mdp bandit = bandit_mdp({1.0, 0.0}, 0.9);
  const ValueFn vb = evaluate_policy(bandit, uniform_policy(1, 2));
  const GreedyReport gb = greedy_report(q_from_policy(bandit, vb));
  CHECK(gb.greedy_sets[0] == std::vector<int>{0});
  CHECK(gb.q_gap[0] == doctest::Approx(1.0).epsilon(1e-10));

  const Mdp m2 = make_m2();
  const ValueFn v2 = evaluate_policy(m2, uniform_policy(2, 2));
  const GreedyReport g2 = greedy_report(q_from_policy(m2, v2));
  CHECK(g2.greedy_sets[0] == std::vector<int>{1});
  CHECK(g2.q_gap[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-10));
  CHECK(g2.greedy_sets[1] == std::vector<int>{0, 1});
  CHECK(g2.q_gap[1] == kInf);

  QFn flat{1, 3, {2.0, 2.0, 2.0}};
  CHECK(greedy_report(flat).q_gap[0] == kInf);
}

TEST_CASE("pi_target renormalizes prior mass onto the greedy set") {
  const Mdp bandit = bandit_mdp({1.0, 0.0}, 0.9);
  const Policy uni = uniform_policy(1, 2);
  const ValueFn vb = evaluate_policy(bandit, uni);
  const Policy tb = pi_target(uni, greedy_report(q_from_policy(bandit, vb)));
  CHECK(tb.prob(0, 0) == 1.0);
  CHECK(tb.prob(0, 1) == 0.0);

  const Mdp m2 = make_m2();
  const Policy uni2 = uniform_policy(2, 2);
  const ValueFn v2 = evaluate_policy(m2, uni2);
  const Policy t2 = pi_target(uni2, greedy_report(q_from_policy(m2, v2)));
  CHECK(t2.prob(0, 0) == 0.0);
  CHECK(t2.prob(0, 1) == 1.0);
  // Full-support greedy set renormalizes to the original row exactly.
  CHECK(t2.log_p(1, 0) == uni2.log_p(1, 0));
  CHECK(t2.log_p(1, 1) == uni2.log_p(1, 1));
}

TEST_CASE("pi_target rejects zero-mass greedy sets") {
  QFn q{1, 2, {0.0, 1.0}};
  const Policy pi = deterministic_policy(1, 2, {0});
  CHECK_THROWS_AS(pi_target(pi, greedy_report(q)), std::domain_error);
}

TEST_CASE("pi_target rows stay normalized with support inside the greedy set") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Mdp mdp = random_mdp({seed}, 4, 4, 0.8);
    const Policy pi = random_policy(seed + 5, 4, 4);
    const ValueFn v = evaluate_policy(mdp, pi);
    const GreedyReport g = greedy_report(q_from_policy(mdp, v));
    const Policy t = pi_target(pi, g);
    CHECK(max_row_normalization_defect(t) < 1e-13);
    for (int s = 0; s < 4; ++s) {
      for (int a = 0; a < 4; ++a) {
        if (!g.in_greedy(s, a)) CHECK(t.prob(s, a) == 0.0);
      }
    }
  }
}

TEST_CASE("policy_iteration converges on the closed-form instances") {
  const Mdp m2 = make_m2();
  const PiResult pr = policy_iteration(m2);
  CHECK(pr.iterations <= 2);
  const ValueFn v = evaluate_policy(m2, pr.policy);
  CHECK(v.v[0] == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(v.v[1] == doctest::Approx(2.0).epsilon(1e-10));

  const PiResult pb = policy_iteration(bandit_mdp({1.0, 0.0}, 0.9));
  CHECK(pb.iterations == 1);
  CHECK(pb.policy.prob(0, 0) == 1.0);
}

TEST_CASE("policy_iteration recognizes an optimal start") {
  const Mdp m2 = make_m2();
  const PiResult pr =
      policy_iteration(m2, kDefaultTieTol, 100, deterministic_policy(2, 2, {1, 0}));
  CHECK(pr.iterations == 0);
}

TEST_CASE("policy_iteration survives greedy sets that lost their mass") {
  // After improving state 1, the previously rejected action at state 0
  // becomes greedy while carrying zero probability; the improvement step
  // must fall back to the uniform distribution on the set.
  Mdp mdp;
  mdp.n_states = 3;
  mdp.n_actions = 2;
  mdp.discount = 0.9;
  mdp.reward.assign(6, 0.0);
  mdp.transition.assign(18, 0.0);
  mdp.r(0, 1) = 0.85;          // bail out directly
  mdp.p(0, 0, 1) = 1.0;        // enter state 1
  mdp.p(0, 1, 2) = 1.0;
  mdp.r(1, 0) = 1.0;
  mdp.p(1, 0, 2) = 1.0;        // cash in, then absorb
  mdp.p(1, 1, 1) = 1.0;        // idle
  mdp.p(2, 0, 2) = 1.0;
  mdp.p(2, 1, 2) = 1.0;
  REQUIRE(validate(mdp).empty());

  const PiResult pr = policy_iteration(mdp);
  const ValueFn v = evaluate_policy(mdp, pr.policy);
  const ViResult vi = value_iteration(mdp);
  for (int s = 0; s < 3; ++s) {
    CHECK(std::abs(v.v[s] - vi.v_star.v[s]) < 1e-9);
  }
  CHECK(v.v[0] == doctest::Approx(0.9).epsilon(1e-10));
}

TEST_CASE("policy_iteration matches value_iteration on random instances") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Mdp mdp = random_mdp({seed}, 6, 4, 0.85);
    const ValueFn v = evaluate_policy(mdp, policy_iteration(mdp).policy);
    const ViResult vi = value_iteration(mdp);
    for (int s = 0; s < mdp.n_states; ++s) {
      CHECK(std::abs(v.v[s] - vi.v_star.v[s]) < 1e-9);
    }
  }
}
