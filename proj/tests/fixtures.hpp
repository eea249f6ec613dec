#pragma once

#include <cmath>
#include <vector>

#include "npglab/mdp.hpp"
#include "npglab/solver.hpp"

namespace npglab::test {

// Two-state chain used throughout: state 0 can stay (action 0, reward 0) or
// move to state 1 (action 1, reward 0); state 1 absorbs with reward 1 under
// both actions. With gamma = 0.5 the uniform policy evaluates to (2/3, 2)
// and the optimal values are (1, 2).
inline Mdp make_m2(double gamma = 0.5) {
  Mdp mdp;
  mdp.n_states = 2;
  mdp.n_actions = 2;
  mdp.discount = gamma;
  mdp.reward = {0.0, 0.0, 1.0, 1.0};
  mdp.transition.assign(8, 0.0);
  mdp.p(0, 0, 0) = 1.0;
  mdp.p(0, 1, 1) = 1.0;
  mdp.p(1, 0, 1) = 1.0;
  mdp.p(1, 1, 1) = 1.0;
  return mdp;
}

// Deterministic policy: action choice per state.
inline Policy deterministic_policy(int n_states, int n_actions,
                                   const std::vector<int>& actions) {
  Policy pi;
  pi.n_states = n_states;
  pi.n_actions = n_actions;
  pi.log_prob.assign(static_cast<std::size_t>(n_states) * n_actions,
                     -std::numeric_limits<double>::infinity());
  for (int s = 0; s < n_states; ++s) pi.log_p(s, actions[s]) = 0.0;
  return pi;
}

// Full-support random policy (normalized uniform draws), in log space.
inline Policy random_policy(std::uint64_t seed, int n_states, int n_actions) {
  UniformSource rng(seed);
  Policy pi;
  pi.n_states = n_states;
  pi.n_actions = n_actions;
  pi.log_prob.resize(static_cast<std::size_t>(n_states) * n_actions);
  for (int s = 0; s < n_states; ++s) {
    double sum = 0.0;
    std::vector<double> row(n_actions);
    for (int a = 0; a < n_actions; ++a) {
      row[a] = rng.next() + 1e-3;
      sum += row[a];
    }
    for (int a = 0; a < n_actions; ++a) pi.log_p(s, a) = std::log(row[a] / sum);
  }
  return pi;
}

inline InitialDist random_rho(std::uint64_t seed, int n_states) {
  UniformSource rng(seed);
  InitialDist rho;
  rho.rho.resize(n_states);
  double sum = 0.0;
  for (double& v : rho.rho) {
    v = rng.next() + 1e-3;
    sum += v;
  }
  for (double& v : rho.rho) v /= sum;
  return rho;
}

// Independent evaluation oracle: truncated power series
// sum_{t<=T} gamma^t P_pi^t r_pi with T chosen so the tail
// gamma^T/(1-gamma) falls below 1e-12. Never touches the linear solver.
inline std::vector<double> power_series_value(const Mdp& mdp, const Policy& pi) {
  const Eigen::MatrixXd p = policy_transition_matrix(mdp, pi);
  const Eigen::VectorXd r = policy_reward_vector(mdp, pi);
  const double gamma = mdp.discount;
  const long horizon = static_cast<long>(
      std::ceil(std::log(1e-12 * (1.0 - gamma)) / std::log(gamma)));
  Eigen::VectorXd v = Eigen::VectorXd::Zero(mdp.n_states);
  Eigen::VectorXd term = r;
  double scale = 1.0;
  for (long t = 0; t <= horizon; ++t) {
    v += scale * term;
    term = p * term;
    scale *= gamma;
  }
  return {v.data(), v.data() + v.size()};
}

}  // namespace npglab::test
