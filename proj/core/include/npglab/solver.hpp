#pragma once

#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "npglab/mdp.hpp"

namespace npglab {

/// Default absolute tolerance used when forming argmax sets over Q values.
/// Q values are O(1/(1-gamma)) and solver residuals stay below 1e-10, so
/// near-ties beyond this width are treated as exact ties.
inline constexpr double kDefaultTieTol = 1e-9;

/// Default value-iteration accuracy; differences of Q* entries computed from
/// it are then good to ~1e-10, which the gap quantities need.
inline constexpr double kDefaultViTol = 1e-12;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct ValueFn {
  std::vector<double> v;

  double at(int s) const { return v[s]; }
  double operator()(const InitialDist& rho) const {
    double out = 0.0;
    for (std::size_t s = 0; s < v.size(); ++s) out += rho.rho[s] * v[s];
    return out;
  }
};

struct QFn {
  int n_states = 0;
  int n_actions = 0;
  std::vector<double> q;  // row-major (s, a)

  double at(int s, int a) const {
    return q[static_cast<std::size_t>(s) * n_actions + a];
  }
  double& at(int s, int a) { return q[static_cast<std::size_t>(s) * n_actions + a]; }
};

struct AdvantageFn {
  int n_states = 0;
  int n_actions = 0;
  std::vector<double> a;  // row-major (s, a)

  double at(int s, int ai) const {
    return a[static_cast<std::size_t>(s) * n_actions + ai];
  }
};

struct VisitDist {
  std::vector<double> d;
};

/**
 * Everything instance-dependent derived from the optimal Q-function:
 * per-state optimal action sets, the states where every action is optimal,
 * and the optimal advantage gap (the smallest margin by which a suboptimal
 * action loses in a state where some action is suboptimal; +inf when no such
 * state exists).
 */
struct OptimalityReport {
  ValueFn v_star;
  QFn q_star;
  std::vector<std::vector<int>> optimal_sets;  // A*_s, ascending action ids
  std::vector<char> optimal_mask;              // (s,a) flags, row-major
  std::vector<int> dummy_states;               // ascending state ids
  std::vector<char> is_dummy;                  // per-state flags
  double gap_delta = kInf;
  double tie_tolerance = kDefaultTieTol;

  bool action_optimal(int s, int a) const {
    return optimal_mask[static_cast<std::size_t>(s) * q_star.n_actions + a] != 0;
  }
};

/// Per-policy analogue of OptimalityReport: tolerance-argmax sets of a Q
/// table and the gap from the best action to the best action outside the
/// set (+inf when the set is the whole action space).
struct GreedyReport {
  int n_states = 0;
  int n_actions = 0;
  std::vector<std::vector<int>> greedy_sets;
  std::vector<char> greedy_mask;  // (s,a) flags, row-major
  std::vector<double> q_gap;      // per state, > 0, +inf allowed
  double tie_tolerance = kDefaultTieTol;

  bool in_greedy(int s, int a) const {
    return greedy_mask[static_cast<std::size_t>(s) * n_actions + a] != 0;
  }
};

/// Average transition matrix P_pi(s,s') = sum_a pi(a|s) P(s'|s,a).
Eigen::MatrixXd policy_transition_matrix(const Mdp& mdp, const Policy& policy);

/// Average reward vector r_pi(s) = sum_a pi(a|s) R(s,a).
Eigen::VectorXd policy_reward_vector(const Mdp& mdp, const Policy& policy);

/// Unique solution of (I - gamma P_pi) V = r_pi by dense LU with one round of
/// iterative refinement; residual below 1e-10 in max norm.
ValueFn evaluate_policy(const Mdp& mdp, const Policy& policy);

/// Q(s,a) = R(s,a) + gamma sum_s' P(s'|s,a) V(s').
QFn q_from_policy(const Mdp& mdp, const ValueFn& value);

/// A = Q - V, broadcast over actions.
AdvantageFn advantage(const QFn& q, const ValueFn& v);

/// Discounted state-visitation distribution
/// d(s) = (1-gamma) sum_t gamma^t P(S_t = s), via one solve on the
/// transposed system.
VisitDist discounted_visitation(const Mdp& mdp, const Policy& policy,
                                const InitialDist& rho);

/// Value difference V^{pi1}(rho) - V^{pi2}(rho) computed from pi1's
/// visitation and pi2's advantages; equality with the direct difference is a
/// tested identity, not an assumption.
double perf_difference(const Mdp& mdp, const Policy& pi1, const Policy& pi2,
                       const InitialDist& rho);

struct ViResult {
  ValueFn v_star;
  QFn q_star;
  long iterations = 0;
};

/// Bellman optimality iteration run until ||V - TV||_inf <=
/// tolerance*(1-gamma)/(2*gamma), which puts the returned V within
/// `tolerance` of V* in max norm.
ViResult value_iteration(const Mdp& mdp, double tolerance = kDefaultViTol);

OptimalityReport optimality_report(const Mdp& mdp, const QFn& q_star,
                                   const ValueFn& v_star,
                                   double tie_tolerance = kDefaultTieTol);

/// Convenience: value_iteration followed by optimality_report.
OptimalityReport solve_optimal(const Mdp& mdp, double tie_tolerance = kDefaultTieTol,
                               double vi_tolerance = kDefaultViTol);

GreedyReport greedy_report(const QFn& q, double tie_tolerance = kDefaultTieTol);

/// Prior mass renormalized onto the greedy set; zero exactly elsewhere.
/// Throws std::domain_error when the greedy set carries no mass.
Policy pi_target(const Policy& policy, const GreedyReport& greedy);

struct PiResult {
  Policy policy;
  long iterations = 0;  // improvement steps taken
};

/// Policy iteration with set-renormalizing improvement, starting from the
/// uniform policy unless one is given. Stops once the current policy is
/// supported on its own greedy sets. When a greedy set carries no prior mass
/// (possible after earlier improvements elsewhere), the improvement falls
/// back to the uniform distribution on that set.
PiResult policy_iteration(const Mdp& mdp, double tie_tolerance = kDefaultTieTol,
                          long max_iters = 1000,
                          std::optional<Policy> start = std::nullopt);

}  // namespace npglab
