#include <doctest.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <stdexcept>

#include "fixtures.hpp"
#include "npglab/io.hpp"
#include "npglab/mdp.hpp"

using namespace npglab;
using test::make_m2;

TEST_CASE("validate accepts exact stochastic instances") {
  CHECK(validate(make_m2()).empty());
  CHECK(validate(bandit_mdp({1.0, 0.0}, 0.9)).empty());
}

TEST_CASE("validate reports a deficient row with its location") {
  Mdp mdp = make_m2();
  mdp.p(0, 1, 1) = 0.999;
  const auto report = validate(mdp);
  REQUIRE(report.size() == 1);
  CHECK(report[0].s == 0);
  CHECK(report[0].a == 1);
  CHECK(report[0].magnitude == doctest::Approx(-1e-3).epsilon(1e-6));
}

TEST_CASE("validate reports reward range violations in strict mode only") {
  Mdp mdp = make_m2();
  mdp.r(0, 0) = 1.5;
  const auto strict = validate(mdp);
  REQUIRE(strict.size() == 1);
  CHECK(strict[0].s == 0);
  CHECK(strict[0].a == 0);
  CHECK(validate(mdp, RewardMode::kRelaxed).empty());
}

TEST_CASE("validate rejects bad discounts") {
  Mdp mdp = make_m2();
  mdp.discount = 1.0;
  CHECK(!validate(mdp).empty());
  mdp.discount = 0.0;
  CHECK(!validate(mdp).empty());
}

TEST_CASE("random_mdp produces valid instances of the requested shape") {
  const Mdp mdp = random_mdp({7}, 70, 10, 0.9);
  CHECK(mdp.n_states == 70);
  CHECK(mdp.n_actions == 10);
  CHECK(mdp.discount == 0.9);
  CHECK(validate(mdp).empty());
  REQUIRE(mdp.seed_metadata.has_value());
  CHECK(mdp.seed_metadata->generator == kGeneratorId);
  CHECK(mdp.seed_metadata->seed == 7);
}

TEST_CASE("random_mdp is deterministic in the seed") {
  const Mdp a = random_mdp({7}, 6, 3, 0.8);
  const Mdp b = random_mdp({7}, 6, 3, 0.8);
  CHECK(a.transition == b.transition);
  CHECK(a.reward == b.reward);
  const Mdp c = random_mdp({8}, 6, 3, 0.8);
  CHECK(a.transition != c.transition);
}

TEST_CASE("random_mdp single-state rows are exactly the point mass") {
  const Mdp mdp = random_mdp({7}, 1, 2, 0.9);
  CHECK(mdp.p(0, 0, 0) == 1.0);
  CHECK(mdp.p(0, 1, 0) == 1.0);
}

TEST_CASE("random_mdp rejects bad parameters") {
  CHECK_THROWS_AS(random_mdp({1}, 0, 2, 0.9), std::invalid_argument);
  CHECK_THROWS_AS(random_mdp({1}, 2, 0, 0.9), std::invalid_argument);
  CHECK_THROWS_AS(random_mdp({1}, 2, 2, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(random_mdp({1}, 2, 2, 0.0), std::invalid_argument);
}

TEST_CASE("generated instances validate across many seeds and shapes") {
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const int ns = 1 + static_cast<int>(seed % 6);
    const int na = 1 + static_cast<int>((seed / 6) % 4);
    CHECK(validate(random_mdp({seed}, ns, na, 0.8)).empty());
  }
}

TEST_CASE("bandit_mdp builds a single self-looping state") {
  const Mdp mdp = bandit_mdp({1.0, 0.0}, 0.9);
  CHECK(mdp.n_states == 1);
  CHECK(mdp.n_actions == 2);
  CHECK(mdp.p(0, 0, 0) == 1.0);
  CHECK(mdp.p(0, 1, 0) == 1.0);
  CHECK(mdp.r(0, 0) == 1.0);
  CHECK(mdp.r(0, 1) == 0.0);
  CHECK(validate(mdp).empty());
  CHECK_NOTHROW(bandit_mdp({1.0}, 0.5));
  CHECK_THROWS_AS(bandit_mdp({1.5}, 0.9), std::invalid_argument);
  CHECK_NOTHROW(bandit_mdp({1.5}, 0.9, RewardMode::kRelaxed));
}

TEST_CASE("uniform_policy stores -log|A| and exposes the matching probabilities") {
  const Policy small = uniform_policy(1, 2);
  CHECK(small.prob(0, 0) == 0.5);
  CHECK(small.prob(0, 1) == 0.5);

  const Policy wide = uniform_policy(70, 10);
  const double expected_log = -std::log(10.0);
  for (int s = 0; s < 70; ++s) {
    for (int a = 0; a < 10; ++a) {
      CHECK(wide.log_p(s, a) == expected_log);
      CHECK(wide.prob(s, a) == doctest::Approx(0.1).epsilon(1e-15));
    }
  }

  const Policy single = uniform_policy(3, 1);
  for (int s = 0; s < 3; ++s) CHECK(single.prob(s, 0) == 1.0);
}

TEST_CASE("uniform_policy rows are normalized to working precision") {
  // exp(-log|A|) is within an ulp of 1/|A| but rarely equal to it, so row
  // sums are 1 to working precision rather than bitwise; n = 1, 2 and 4
  // happen to be exact on common libms.
  for (int na : {1, 2, 4}) {
    const Policy pi = uniform_policy(2, na);
    double sum = 0.0;
    for (int a = 0; a < na; ++a) sum += pi.prob(0, a);
    CHECK(sum == 1.0);
  }
  for (int na : {3, 7, 10, 16, 70, 997}) {
    const Policy pi = uniform_policy(2, na);
    double sum = 0.0;
    for (int a = 0; a < na; ++a) sum += pi.prob(0, a);
    CHECK(std::abs(sum - 1.0) < 1e-13);
  }
  CHECK(max_row_normalization_defect(uniform_policy(5, 13)) < 1e-14);
}

TEST_CASE("distribution helpers") {
  CHECK(is_distribution(uniform_dist(4)));
  const InitialDist d = delta_dist(3, 1);
  CHECK(d.rho == std::vector<double>{0.0, 1.0, 0.0});
  CHECK(is_distribution(d));
  CHECK(!is_distribution(InitialDist{{0.5, 0.4}}));
  CHECK(!is_distribution(InitialDist{{1.5, -0.5}}));
}

TEST_CASE("mdp document round-trip is value-exact") {
  const Mdp mdp = random_mdp({7}, 5, 3, 0.9);
  const std::string doc = to_document(mdp);
  const Mdp back = mdp_from_document(doc);
  CHECK(back.n_states == mdp.n_states);
  CHECK(back.n_actions == mdp.n_actions);
  CHECK(back.discount == mdp.discount);
  CHECK(back.reward == mdp.reward);
  CHECK(back.transition == mdp.transition);
  REQUIRE(back.seed_metadata.has_value());
  CHECK(back.seed_metadata->seed == 7);
  // Serialization is a pure function, so the round-trip reproduces the
  // document byte for byte.
  CHECK(to_document(back) == doc);
}

TEST_CASE("mdp parser names the missing field") {
  const std::string doc = R"({"n_states": 1, "n_actions": 1,
    "reward": [0.5], "transition": [1.0]})";
  try {
    mdp_from_document(doc);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.field() == "discount");
    CHECK(std::string(e.what()).find("discount") != std::string::npos);
  }
}

TEST_CASE("malformed documents report a line") {
  try {
    mdp_from_document("{\n  \"n_states\": 2,\n  oops\n}");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
}

TEST_CASE("policy documents store probabilities and preserve exact zeros") {
  Policy pi = test::deterministic_policy(2, 3, {1, 2});
  const std::string doc = to_document(pi);
  const Policy back = policy_from_document(doc);
  const double neg_inf = -std::numeric_limits<double>::infinity();
  for (int s = 0; s < 2; ++s) {
    for (int a = 0; a < 3; ++a) {
      if (pi.log_p(s, a) == neg_inf) {
        CHECK(back.log_p(s, a) == neg_inf);
        CHECK(back.prob(s, a) == 0.0);
      }
    }
  }
  CHECK(back.prob(0, 1) == 1.0);
  CHECK(back.prob(1, 2) == 1.0);
}

TEST_CASE("policy probability round-trip is tight") {
  const Policy pi = test::random_policy(3, 4, 5);
  const Policy back = policy_from_document(to_document(pi));
  for (int s = 0; s < 4; ++s) {
    for (int a = 0; a < 5; ++a) {
      // One log/exp round trip costs at most an ulp on the probability.
      CHECK(back.prob(s, a) == doctest::Approx(pi.prob(s, a)).epsilon(1e-15));
    }
  }
  CHECK(max_row_normalization_defect(back) < 1e-13);
}

TEST_CASE("policy parser rejects negative, unnormalized, or missing entries") {
  CHECK_THROWS_AS(
      policy_from_document(R"({"n_states":1,"n_actions":2,"prob":[0.5,-0.5]})"),
      ParseError);
  CHECK_THROWS_AS(
      policy_from_document(R"({"n_states":1,"n_actions":2,"prob":[1.0]})"),
      ParseError);
  CHECK_THROWS_AS(
      policy_from_document(R"({"n_states":1,"n_actions":2,"prob":[0.3,0.3]})"),
      ParseError);
}

TEST_CASE("content hash ignores provenance fields but not data") {
  Mdp a = random_mdp({7}, 3, 2, 0.8);
  Mdp b = a;
  b.name = "renamed";
  b.seed_metadata.reset();
  CHECK(content_hash(a) == content_hash(b));
  b.reward[0] = 1.0 - b.reward[0];
  CHECK(content_hash(a) != content_hash(b));
}
