#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace npglab {

/// Tolerance for transition-row and initial-distribution normalization.
inline constexpr double kDistributionTol = 1e-12;
/// Tolerance for policy row normalization (log-sum-exp of a row vs 0).
inline constexpr double kPolicyRowTol = 1e-10;

/// Identifies the random draw scheme so output metadata pins down the
/// generator. Draws are the top 53 bits of std::mt19937_64 mapped to [0,1),
/// which is reproducible bit-for-bit across standard libraries (unlike
/// std::uniform_real_distribution).
inline constexpr const char* kGeneratorId = "mt19937_64-u53";

struct RngSeed {
  std::uint64_t seed = 0;
};

struct SeedMetadata {
  std::string generator;
  std::uint64_t seed = 0;
};

/**
 * Finite discounted MDP: dense transition tensor P(s'|s,a), expected-reward
 * table R(s,a) and discount factor in (0,1). Instances are immutable after
 * construction by convention; all solver code takes them by const reference.
 */
struct Mdp {
  int n_states = 0;
  int n_actions = 0;
  std::vector<double> transition;  // row-major (s, a, s')
  std::vector<double> reward;      // row-major (s, a)
  double discount = 0.0;
  std::string name;
  std::optional<SeedMetadata> seed_metadata;

  double p(int s, int a, int s2) const {
    return transition[(static_cast<std::size_t>(s) * n_actions + a) * n_states + s2];
  }
  double& p(int s, int a, int s2) {
    return transition[(static_cast<std::size_t>(s) * n_actions + a) * n_states + s2];
  }
  double r(int s, int a) const {
    return reward[static_cast<std::size_t>(s) * n_actions + a];
  }
  double& r(int s, int a) {
    return reward[static_cast<std::size_t>(s) * n_actions + a];
  }
};

/**
 * Row-stochastic policy stored as log-probabilities. Adaptive step sizes
 * produce exponents far beyond double range in probability space, so the
 * log table is the source of truth; -inf encodes an exact zero and
 * prob() returns exactly 0 there (exp(-inf) == +0.0).
 */
struct Policy {
  int n_states = 0;
  int n_actions = 0;
  std::vector<double> log_prob;  // row-major (s, a)

  double log_p(int s, int a) const {
    return log_prob[static_cast<std::size_t>(s) * n_actions + a];
  }
  double& log_p(int s, int a) {
    return log_prob[static_cast<std::size_t>(s) * n_actions + a];
  }
  double prob(int s, int a) const { return std::exp(log_p(s, a)); }
};

/// Initial state distribution rho.
struct InitialDist {
  std::vector<double> rho;

  int n_states() const { return static_cast<int>(rho.size()); }
};

/// Strict mode requires rewards in [0,1], which the range and gap bounds
/// assume. Relaxed mode admits any finite rewards and disables those bounds.
enum class RewardMode { kStrict, kRelaxed };

/// One violated invariant, with its location where that makes sense.
struct Violation {
  std::string what;
  int s = -1;
  int a = -1;
  double magnitude = 0.0;
};

/// Checks every Mdp invariant and reports all violations (empty == valid).
std::vector<Violation> validate(const Mdp& mdp, RewardMode mode = RewardMode::kStrict);

/// Formats a violation list for diagnostics.
std::string describe(const std::vector<Violation>& violations);

/**
 * Seeded random instance: rewards i.i.d. uniform on [0,1], then each
 * transition row built from i.i.d. uniform entries rescaled by the row sum.
 * A row is the |S|-vector P(.|s,a) for one (s,a) pair. Deterministic in the
 * seed; the draw scheme is recorded in seed_metadata.
 */
Mdp random_mdp(RngSeed seed, int n_states, int n_actions, double gamma);

/// Single-state MDP: every action self-loops with the given reward.
Mdp bandit_mdp(const std::vector<double>& rewards, double gamma,
               RewardMode mode = RewardMode::kStrict);

/// Policy with log pi(a|s) = -log|A| everywhere.
Policy uniform_policy(int n_states, int n_actions);

/// rho(s) = 1/|S|.
InitialDist uniform_dist(int n_states);

/// Point mass on state s.
InitialDist delta_dist(int n_states, int s);

/// Validates rho: entries >= 0 and sum 1 within kDistributionTol.
bool is_distribution(const InitialDist& rho);

/// Max over rows of |log-sum-exp(row) - 0|; rows of a valid policy are 0
/// within kPolicyRowTol.
double max_row_normalization_defect(const Policy& policy);

/// Deterministic uniform variates; see kGeneratorId.
class UniformSource {
 public:
  explicit UniformSource(std::uint64_t seed) : gen_(seed) {}

  /// Next variate in [0,1).
  double next() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  /// Next raw 64-bit draw (used for discrete tie breaking).
  std::uint64_t next_u64() { return gen_(); }

 private:
  std::mt19937_64 gen_;
};

}  // namespace npglab
