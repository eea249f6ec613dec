#include "npglab/solver.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>

namespace npglab {

namespace {

void check_dims(const Mdp& mdp, const Policy& policy) {
  if (mdp.n_states != policy.n_states || mdp.n_actions != policy.n_actions) {
    throw std::invalid_argument("mdp/policy dimension mismatch");
  }
}

void check_rho(const Mdp& mdp, const InitialDist& rho) {
  if (rho.n_states() != mdp.n_states) {
    throw std::invalid_argument("mdp/rho dimension mismatch");
  }
}

// Solves A x = b by partial-pivot LU with one round of iterative refinement.
Eigen::VectorXd solve_refined(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  Eigen::VectorXd x = lu.solve(b);
  x += lu.solve(b - a * x);
  return x;
}

}  // namespace

Eigen::MatrixXd policy_transition_matrix(const Mdp& mdp, const Policy& policy) {
  check_dims(mdp, policy);
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(mdp.n_states, mdp.n_states);
  for (int s = 0; s < mdp.n_states; ++s) {
    for (int a = 0; a < mdp.n_actions; ++a) {
      const double w = policy.prob(s, a);
      if (w == 0.0) continue;
      for (int s2 = 0; s2 < mdp.n_states; ++s2) {
        p(s, s2) += w * mdp.p(s, a, s2);
      }
    }
  }
  return p;
}

Eigen::VectorXd policy_reward_vector(const Mdp& mdp, const Policy& policy) {
  check_dims(mdp, policy);
  Eigen::VectorXd r = Eigen::VectorXd::Zero(mdp.n_states);
  for (int s = 0; s < mdp.n_states; ++s) {
    for (int a = 0; a < mdp.n_actions; ++a) {
      const double w = policy.prob(s, a);
      if (w == 0.0) continue;
      r(s) += w * mdp.r(s, a);
    }
  }
  return r;
}

ValueFn evaluate_policy(const Mdp& mdp, const Policy& policy) {
  const Eigen::MatrixXd p = policy_transition_matrix(mdp, policy);
  const Eigen::VectorXd r = policy_reward_vector(mdp, policy);
  const Eigen::MatrixXd a =
      Eigen::MatrixXd::Identity(mdp.n_states, mdp.n_states) - mdp.discount * p;
  const Eigen::VectorXd v = solve_refined(a, r);
  ValueFn out;
  out.v.assign(v.data(), v.data() + v.size());
  return out;
}

QFn q_from_policy(const Mdp& mdp, const ValueFn& value) {
  if (static_cast<int>(value.v.size()) != mdp.n_states) {
    throw std::invalid_argument("mdp/value dimension mismatch");
  }
  QFn q;
  q.n_states = mdp.n_states;
  q.n_actions = mdp.n_actions;
  q.q.resize(static_cast<std::size_t>(mdp.n_states) * mdp.n_actions);
  for (int s = 0; s < mdp.n_states; ++s) {
    for (int a = 0; a < mdp.n_actions; ++a) {
      double acc = 0.0;
      for (int s2 = 0; s2 < mdp.n_states; ++s2) acc += mdp.p(s, a, s2) * value.v[s2];
      q.at(s, a) = mdp.r(s, a) + mdp.discount * acc;
    }
  }
  return q;
}

AdvantageFn advantage(const QFn& q, const ValueFn& v) {
  if (static_cast<int>(v.v.size()) != q.n_states) {
    throw std::invalid_argument("q/value dimension mismatch");
  }
  AdvantageFn adv;
  adv.n_states = q.n_states;
  adv.n_actions = q.n_actions;
  adv.a.resize(q.q.size());
  for (int s = 0; s < q.n_states; ++s) {
    for (int a = 0; a < q.n_actions; ++a) {
      adv.a[static_cast<std::size_t>(s) * q.n_actions + a] = q.at(s, a) - v.v[s];
    }
  }
  return adv;
}

VisitDist discounted_visitation(const Mdp& mdp, const Policy& policy,
                                const InitialDist& rho) {
  check_rho(mdp, rho);
  const Eigen::MatrixXd p = policy_transition_matrix(mdp, policy);
  const Eigen::MatrixXd a =
      (Eigen::MatrixXd::Identity(mdp.n_states, mdp.n_states) - mdp.discount * p)
          .transpose();
  Eigen::VectorXd rho_vec(mdp.n_states);
  for (int s = 0; s < mdp.n_states; ++s) rho_vec(s) = rho.rho[s];
  const Eigen::VectorXd x = solve_refined(a, rho_vec);
  VisitDist d;
  d.d.resize(mdp.n_states);
  for (int s = 0; s < mdp.n_states; ++s) d.d[s] = (1.0 - mdp.discount) * x(s);
  return d;
}

double perf_difference(const Mdp& mdp, const Policy& pi1, const Policy& pi2,
                       const InitialDist& rho) {
  check_dims(mdp, pi1);
  check_dims(mdp, pi2);
  check_rho(mdp, rho);
  const VisitDist d1 = discounted_visitation(mdp, pi1, rho);
  const ValueFn v2 = evaluate_policy(mdp, pi2);
  const QFn q2 = q_from_policy(mdp, v2);
  const AdvantageFn a2 = advantage(q2, v2);
  double acc = 0.0;
  for (int s = 0; s < mdp.n_states; ++s) {
    if (d1.d[s] == 0.0) continue;
    double row = 0.0;
    for (int a = 0; a < mdp.n_actions; ++a) {
      const double w = pi1.prob(s, a);
      if (w == 0.0) continue;
      row += w * a2.at(s, a);
    }
    acc += d1.d[s] * row;
  }
  return acc / (1.0 - mdp.discount);
}

ViResult value_iteration(const Mdp& mdp, double tolerance) {
  if (!(tolerance > 0.0)) {
    throw std::invalid_argument("value_iteration: tolerance must be positive");
  }
  const double gamma = mdp.discount;
  const int n = mdp.n_states;
  // Residual target: ||V - TV||_inf <= target implies
  // ||TV - V*||_inf <= gamma*target/(1-gamma) <= tolerance/2.
  const double target = tolerance * (1.0 - gamma) / (2.0 * gamma);
  // From V=0 the residual shrinks by gamma per sweep starting at the reward
  // scale; the cap adds slack over the implied count.
  double r0 = 1.0;
  for (double r : mdp.reward) r0 = std::max(r0, std::abs(r));
  const long cap = std::max<long>(
      64, static_cast<long>(std::ceil((std::log(target) - std::log(r0)) /
                                      std::log(gamma))) +
              200);

  std::vector<double> v(n, 0.0), tv(n, 0.0);
  long iters = 0;
  double residual = kInf;
  while (residual > target) {
    if (++iters > cap) {
      throw std::runtime_error("value_iteration: iteration cap exceeded");
    }
    residual = 0.0;
    for (int s = 0; s < n; ++s) {
      double best = -kInf;
      for (int a = 0; a < mdp.n_actions; ++a) {
        double acc = 0.0;
        for (int s2 = 0; s2 < n; ++s2) acc += mdp.p(s, a, s2) * v[s2];
        best = std::max(best, mdp.r(s, a) + gamma * acc);
      }
      tv[s] = best;
      residual = std::max(residual, std::abs(tv[s] - v[s]));
    }
    v.swap(tv);
  }

  ViResult out;
  out.iterations = iters;
  out.v_star.v = v;
  out.q_star = q_from_policy(mdp, out.v_star);
  return out;
}

namespace {

// Tolerance-argmax over one Q row.
std::vector<int> argmax_set(const QFn& q, int s, double tie_tolerance) {
  double best = -kInf;
  for (int a = 0; a < q.n_actions; ++a) best = std::max(best, q.at(s, a));
  std::vector<int> set;
  for (int a = 0; a < q.n_actions; ++a) {
    if (q.at(s, a) >= best - tie_tolerance) set.push_back(a);
  }
  return set;
}

}  // namespace

OptimalityReport optimality_report(const Mdp& mdp, const QFn& q_star,
                                   const ValueFn& v_star, double tie_tolerance) {
  if (tie_tolerance < 0.0) {
    throw std::invalid_argument("optimality_report: tie_tolerance must be >= 0");
  }
  OptimalityReport rep;
  rep.v_star = v_star;
  rep.q_star = q_star;
  rep.tie_tolerance = tie_tolerance;
  rep.optimal_sets.resize(mdp.n_states);
  rep.optimal_mask.assign(q_star.q.size(), 0);
  rep.is_dummy.assign(mdp.n_states, 0);
  double delta = kInf;
  for (int s = 0; s < mdp.n_states; ++s) {
    rep.optimal_sets[s] = argmax_set(q_star, s, tie_tolerance);
    for (int a : rep.optimal_sets[s]) {
      rep.optimal_mask[static_cast<std::size_t>(s) * mdp.n_actions + a] = 1;
    }
    if (static_cast<int>(rep.optimal_sets[s].size()) == mdp.n_actions) {
      rep.is_dummy[s] = 1;
      rep.dummy_states.push_back(s);
      continue;
    }
    double best = -kInf;
    for (int a = 0; a < mdp.n_actions; ++a) best = std::max(best, q_star.at(s, a));
    for (int a = 0; a < mdp.n_actions; ++a) {
      if (!rep.action_optimal(s, a)) {
        delta = std::min(delta, best - q_star.at(s, a));
      }
    }
  }
  rep.gap_delta = delta;  // +inf exactly when every state is dummy
  return rep;
}

OptimalityReport solve_optimal(const Mdp& mdp, double tie_tolerance,
                               double vi_tolerance) {
  const ViResult vi = value_iteration(mdp, vi_tolerance);
  return optimality_report(mdp, vi.q_star, vi.v_star, tie_tolerance);
}

GreedyReport greedy_report(const QFn& q, double tie_tolerance) {
  if (tie_tolerance < 0.0) {
    throw std::invalid_argument("greedy_report: tie_tolerance must be >= 0");
  }
  GreedyReport rep;
  rep.n_states = q.n_states;
  rep.n_actions = q.n_actions;
  rep.tie_tolerance = tie_tolerance;
  rep.greedy_sets.resize(q.n_states);
  rep.greedy_mask.assign(q.q.size(), 0);
  rep.q_gap.assign(q.n_states, kInf);
  for (int s = 0; s < q.n_states; ++s) {
    rep.greedy_sets[s] = argmax_set(q, s, tie_tolerance);
    for (int a : rep.greedy_sets[s]) {
      rep.greedy_mask[static_cast<std::size_t>(s) * q.n_actions + a] = 1;
    }
    if (static_cast<int>(rep.greedy_sets[s].size()) == q.n_actions) continue;
    double best = -kInf, best_out = -kInf;
    for (int a = 0; a < q.n_actions; ++a) {
      best = std::max(best, q.at(s, a));
      if (!rep.in_greedy(s, a)) best_out = std::max(best_out, q.at(s, a));
    }
    rep.q_gap[s] = best - best_out;
  }
  return rep;
}

Policy pi_target(const Policy& policy, const GreedyReport& greedy) {
  if (policy.n_states != greedy.n_states || policy.n_actions != greedy.n_actions) {
    throw std::invalid_argument("pi_target: policy/greedy dimension mismatch");
  }
  Policy out;
  out.n_states = policy.n_states;
  out.n_actions = policy.n_actions;
  out.log_prob.assign(policy.log_prob.size(), -kInf);
  for (int s = 0; s < policy.n_states; ++s) {
    // Log-space renormalization over the greedy set.
    double mx = -kInf;
    for (int a : greedy.greedy_sets[s]) mx = std::max(mx, policy.log_p(s, a));
    if (mx == -kInf) {
      throw std::domain_error("pi_target: greedy set at state " + std::to_string(s) +
                              " carries zero probability mass");
    }
    double sum = 0.0;
    for (int a : greedy.greedy_sets[s]) sum += std::exp(policy.log_p(s, a) - mx);
    const double log_mass = mx + std::log(sum);
    for (int a : greedy.greedy_sets[s]) {
      out.log_p(s, a) = policy.log_p(s, a) - log_mass;
    }
  }
  return out;
}

PiResult policy_iteration(const Mdp& mdp, double tie_tolerance, long max_iters,
                          std::optional<Policy> start) {
  if (max_iters < 1) {
    throw std::invalid_argument("policy_iteration: max_iters must be >= 1");
  }
  Policy pi = start ? std::move(*start) : uniform_policy(mdp.n_states, mdp.n_actions);
  check_dims(mdp, pi);
  for (long iter = 0; iter <= max_iters; ++iter) {
    const ValueFn v = evaluate_policy(mdp, pi);
    const QFn q = q_from_policy(mdp, v);
    const GreedyReport greedy = greedy_report(q, tie_tolerance);

    bool stable = true;
    for (int s = 0; s < mdp.n_states && stable; ++s) {
      for (int a = 0; a < mdp.n_actions; ++a) {
        if (pi.prob(s, a) > 0.0 && !greedy.in_greedy(s, a)) {
          stable = false;
          break;
        }
      }
    }
    if (stable) return {pi, iter};
    if (iter == max_iters) break;

    Policy next;
    next.n_states = mdp.n_states;
    next.n_actions = mdp.n_actions;
    next.log_prob.assign(pi.log_prob.size(), -kInf);
    for (int s = 0; s < mdp.n_states; ++s) {
      double mx = -kInf;
      for (int a : greedy.greedy_sets[s]) mx = std::max(mx, pi.log_p(s, a));
      if (mx == -kInf) {
        // Greedy set lost all prior mass; spread uniformly over it.
        const double l = -std::log(static_cast<double>(greedy.greedy_sets[s].size()));
        for (int a : greedy.greedy_sets[s]) next.log_p(s, a) = l;
        continue;
      }
      double sum = 0.0;
      for (int a : greedy.greedy_sets[s]) sum += std::exp(pi.log_p(s, a) - mx);
      const double log_mass = mx + std::log(sum);
      for (int a : greedy.greedy_sets[s]) next.log_p(s, a) = pi.log_p(s, a) - log_mass;
    }
    pi = std::move(next);
  }
  throw std::runtime_error("policy_iteration: did not converge within max_iters");
}

}  // namespace npglab
