#include "npglab/algorithms.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "npglab/io.hpp"

namespace npglab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string describe_rho(const InitialDist& rho) {
  const int n = rho.n_states();
  int support = 0, point = -1;
  for (int s = 0; s < n; ++s) {
    if (rho.rho[s] > 0.0) {
      ++support;
      point = s;
    }
  }
  if (support == 1) return "delta:" + std::to_string(point);
  const double u = 1.0 / static_cast<double>(n);
  for (double v : rho.rho) {
    if (std::abs(v - u) > 1e-15) return "custom";
  }
  return "uniform";
}

TraceMetadata make_metadata(const Mdp& mdp, const InitialDist& rho) {
  TraceMetadata meta;
  if (mdp.seed_metadata) {
    meta.generator = mdp.seed_metadata->generator;
    meta.seed = mdp.seed_metadata->seed;
    meta.has_seed = true;
  }
  meta.n_states = mdp.n_states;
  meta.n_actions = mdp.n_actions;
  meta.gamma = mdp.discount;
  meta.mdp_hash = content_hash(mdp);
  meta.rho_desc = describe_rho(rho);
  return meta;
}

double subopt_mass(const OptimalityReport& opt, const Policy& pi) {
  double worst = 0.0;
  for (int s = 0; s < pi.n_states; ++s) {
    if (opt.is_dummy[s]) continue;
    double mass = 0.0;
    for (int a = 0; a < pi.n_actions; ++a) {
      if (!opt.action_optimal(s, a)) mass += pi.prob(s, a);
    }
    worst = std::max(worst, mass);
  }
  return worst;
}

struct StepOutcome {
  Policy next;
  double eta = kNaN;
  double l_k = kNaN;
  std::optional<Policy> target;  // adaptive runs: renormalized greedy target
};

using Stepper =
    std::function<StepOutcome(long k, const Policy& pi, const ValueFn& v, const QFn& q)>;

// Shared run loop. Record k carries pi_k's statistics plus the step applied
// at k; fields describing pi_{k+1} are backfilled on the next pass.
RunTrace run_loop(const Mdp& mdp, long K, const InitialDist& rho, std::string algorithm,
                  StepSchedule schedule, const Stepper& step) {
  if (K < 0) throw std::invalid_argument("iteration count must be >= 0");
  if (rho.n_states() != mdp.n_states) {
    throw std::invalid_argument("mdp/rho dimension mismatch");
  }

  RunTrace trace;
  trace.algorithm = std::move(algorithm);
  trace.schedule = std::move(schedule);
  trace.mdp_metadata = make_metadata(mdp, rho);
  trace.records.reserve(K + 1);
  trace.policies.reserve(K + 1);

  const OptimalityReport opt = solve_optimal(mdp);
  const double v_star_rho = opt.v_star(rho);

  Policy pi = uniform_policy(mdp.n_states, mdp.n_actions);
  std::vector<double> prev_v;
  double pending_target_value = kNaN;

  for (long k = 0; k <= K; ++k) {
    const ValueFn v = evaluate_policy(mdp, pi);
    const double value_rho = v(rho);

    if (k > 0) {
      TraceRecord& prev = trace.records.back();
      double min_inc = kInf;
      for (int s = 0; s < mdp.n_states; ++s) {
        min_inc = std::min(min_inc, v.v[s] - prev_v[s]);
      }
      prev.value_vector_min_increase = min_inc;
      if (!std::isnan(pending_target_value)) {
        prev.pi_gap_value = std::abs(value_rho - pending_target_value);
        pending_target_value = kNaN;
      }
    }

    TraceRecord rec;
    rec.iter = k;
    rec.eta_used = kNaN;
    rec.l_k = kNaN;
    rec.value_rho = value_rho;
    rec.error = v_star_rho - value_rho;
    rec.scaled_error = static_cast<double>(mdp.n_states) * rec.error;
    rec.subopt_mass = subopt_mass(opt, pi);
    rec.value_vector_min_increase = kNaN;
    rec.pi_gap_tv = kNaN;
    rec.pi_gap_value = kNaN;

    trace.policies.push_back(pi);

    if (k < K) {
      const QFn q = q_from_policy(mdp, v);
      StepOutcome out = step(k, pi, v, q);
      rec.eta_used = out.eta;
      rec.l_k = out.l_k;
      if (out.target) {
        rec.pi_gap_tv = max_probability_gap(out.next, *out.target);
        pending_target_value = evaluate_policy(mdp, *out.target)(rho);
      }
      prev_v = v.v;
      pi = std::move(out.next);
    }
    trace.records.push_back(rec);
  }

  trace.final_policy = pi;
  return trace;
}

}  // namespace

double max_probability_gap(const Policy& pi1, const Policy& pi2) {
  assert(pi1.n_states == pi2.n_states && pi1.n_actions == pi2.n_actions);
  double worst = 0.0;
  for (std::size_t i = 0; i < pi1.log_prob.size(); ++i) {
    worst = std::max(worst,
                     std::abs(std::exp(pi1.log_prob[i]) - std::exp(pi2.log_prob[i])));
  }
  return worst;
}

Policy npg_step(const Policy& policy, const QFn& q, double eta) {
  if (policy.n_states != q.n_states || policy.n_actions != q.n_actions) {
    throw std::invalid_argument("npg_step: policy/q dimension mismatch");
  }
  if (!(eta >= 0.0) || !std::isfinite(eta)) {
    throw std::invalid_argument("npg_step: eta must be finite and >= 0");
  }
  for (double qv : q.q) {
    if (!std::isfinite(qv)) {
      throw std::invalid_argument("npg_step: q has non-finite entries");
    }
  }
  Policy out;
  out.n_states = policy.n_states;
  out.n_actions = policy.n_actions;
  out.log_prob.resize(policy.log_prob.size());
  std::vector<double> x(policy.n_actions);
  for (int s = 0; s < policy.n_states; ++s) {
    double mx = -kInf;
    for (int a = 0; a < policy.n_actions; ++a) {
      x[a] = policy.log_p(s, a) + eta * q.at(s, a);  // -inf + finite = -inf
      mx = std::max(mx, x[a]);
    }
    double sum = 0.0;
    for (int a = 0; a < policy.n_actions; ++a) sum += std::exp(x[a] - mx);
    const double lse = mx + std::log(sum);
    for (int a = 0; a < policy.n_actions; ++a) out.log_p(s, a) = x[a] - lse;
  }
  return out;
}

RunTrace run_npg_constant(const Mdp& mdp, double eta, long K, const InitialDist& rho) {
  ConstantEta sched{eta};
  validate_schedule(sched);
  return run_loop(mdp, K, rho, "npg-c", StepSchedule{sched},
                  [eta](long, const Policy& pi, const ValueFn&, const QFn& q) {
                    return StepOutcome{npg_step(pi, q, eta), eta, kNaN, std::nullopt};
                  });
}

RunTrace run_npg_increasing(const Mdp& mdp, const IncreasingEta& schedule, long K,
                            const InitialDist& rho) {
  validate_schedule(schedule);
  return run_loop(mdp, K, rho, "npg-i", StepSchedule{schedule},
                  [schedule](long k, const Policy& pi, const ValueFn&, const QFn& q) {
                    const double eta = schedule.eta_at(k);
                    return StepOutcome{npg_step(pi, q, eta), eta, kNaN, std::nullopt};
                  });
}

double adaptive_eta(const Policy& policy, const GreedyReport& greedy, double l_k) {
  if (policy.n_states != greedy.n_states || policy.n_actions != greedy.n_actions) {
    throw std::invalid_argument("adaptive_eta: policy/greedy dimension mismatch");
  }
  if (!(l_k >= 0.0) || !std::isfinite(l_k)) {
    throw std::invalid_argument("adaptive_eta: L_k must be finite and >= 0");
  }
  const double log_na = std::log(static_cast<double>(policy.n_actions));
  double best = 0.0;
  bool any_finite = false;
  for (int s = 0; s < policy.n_states; ++s) {
    if (greedy.q_gap[s] == kInf) continue;  // no constraint from fully-greedy states
    any_finite = true;
    for (int a : greedy.greedy_sets[s]) {
      const double lp = policy.log_p(s, a);
      assert(std::isfinite(lp));
      if (!std::isfinite(lp)) {
        throw std::runtime_error("adaptive_eta: greedy action carries zero mass");
      }
      best = std::max(best, (l_k + log_na - lp) / greedy.q_gap[s]);
    }
  }
  return any_finite ? best : 1.0;
}

RunTrace run_npg_adaptive(const Mdp& mdp, const LSchedule& schedule, long K,
                          const InitialDist& rho) {
  validate_schedule(schedule);
  const bool linear = std::holds_alternative<LinearL>(schedule);
  const bool geometric = std::holds_alternative<GeometricL>(schedule);
  const std::string id = geometric ? "npg-ag" : (linear ? "npg-ai" : "npg-a");
  return run_loop(
      mdp, K, rho, id, StepSchedule{AdaptiveL{schedule}},
      [&schedule](long k, const Policy& pi, const ValueFn&, const QFn& q) {
        const GreedyReport greedy = greedy_report(q);
        const double l_k = l_at(schedule, k);
        const double eta = adaptive_eta(pi, greedy, l_k);
        StepOutcome out{npg_step(pi, q, eta), eta, l_k, pi_target(pi, greedy)};
        return out;
      });
}

TerminatedResult run_terminated_npg(const Mdp& mdp, double eta, double delta,
                                    double lambda, const InitialDist& rho,
                                    RngSeed tie_seed) {
  if (!(lambda > 1.0)) {
    throw std::invalid_argument("run_terminated_npg: lambda must be > 1");
  }
  if (!(eta > 0.0) || !std::isfinite(eta)) {
    throw std::invalid_argument("run_terminated_npg: eta must be positive");
  }
  if (!(delta > 0.0)) {
    throw std::invalid_argument("run_terminated_npg: delta must be positive");
  }

  TerminatedResult result;
  if (delta == kInf) {
    // Every policy is optimal; nothing to iterate.
    result.trace = run_npg_constant(mdp, eta, 0, rho);
    result.trace.algorithm = "terminated";
    result.policy = result.trace.final_policy;
    result.kappa = 0;
    return result;
  }

  const double gamma = mdp.discount;
  const double c = std::log(static_cast<double>(mdp.n_actions)) / eta +
                   1.0 / ((1.0 - gamma) * (1.0 - gamma));
  const long kappa = static_cast<long>(std::ceil(lambda / delta * c));

  result.trace = run_npg_constant(mdp, eta, kappa, rho);
  result.trace.algorithm = "terminated";
  result.kappa = kappa;

  const Policy& pi_kappa = result.trace.final_policy;
  const ValueFn v = evaluate_policy(mdp, pi_kappa);
  const QFn q = q_from_policy(mdp, v);
  const AdvantageFn adv = advantage(q, v);

  UniformSource rng(tie_seed.seed);
  Policy out;
  out.n_states = mdp.n_states;
  out.n_actions = mdp.n_actions;
  out.log_prob.assign(pi_kappa.log_prob.size(), -kInf);
  for (int s = 0; s < mdp.n_states; ++s) {
    double best = -kInf;
    for (int a = 0; a < mdp.n_actions; ++a) best = std::max(best, adv.at(s, a));
    std::vector<int> maximizers;
    for (int a = 0; a < mdp.n_actions; ++a) {
      if (adv.at(s, a) == best) maximizers.push_back(a);
    }
    int chosen = maximizers.front();
    if (maximizers.size() > 1) {
      const std::size_t idx = static_cast<std::size_t>(rng.next() * maximizers.size());
      chosen = maximizers[std::min(idx, maximizers.size() - 1)];
    }
    out.log_p(s, chosen) = 0.0;
  }
  result.policy = std::move(out);
  return result;
}

double softmax_pg_step_size(double gamma, int n_actions) {
  const double one_minus = 1.0 - gamma;
  return one_minus * one_minus * one_minus / (2.0 * n_actions * gamma);
}

RunTrace run_softmax_pg(const Mdp& mdp, long K, const InitialDist& rho) {
  const double eta = softmax_pg_step_size(mdp.discount, mdp.n_actions);
  // Logits evolve by plain gradient ascent; the policy rows are their
  // softmax, kept in log space like everywhere else.
  auto theta = std::make_shared<std::vector<double>>(
      static_cast<std::size_t>(mdp.n_states) * mdp.n_actions, 0.0);
  const Mdp* mdp_ptr = &mdp;
  const InitialDist* rho_ptr = &rho;
  return run_loop(
      mdp, K, rho, "pg", StepSchedule{ConstantEta{eta}},
      [theta, eta, mdp_ptr, rho_ptr](long, const Policy& pi, const ValueFn& v,
                                     const QFn& q) {
        const Mdp& m = *mdp_ptr;
        const AdvantageFn adv = advantage(q, v);
        const VisitDist d = discounted_visitation(m, pi, *rho_ptr);
        const double scale = 1.0 / (1.0 - m.discount);
        for (int s = 0; s < m.n_states; ++s) {
          for (int a = 0; a < m.n_actions; ++a) {
            const double g = scale * d.d[s] * pi.prob(s, a) * adv.at(s, a);
            (*theta)[static_cast<std::size_t>(s) * m.n_actions + a] += eta * g;
          }
        }
        Policy next;
        next.n_states = m.n_states;
        next.n_actions = m.n_actions;
        next.log_prob.resize(theta->size());
        for (int s = 0; s < m.n_states; ++s) {
          double mx = -kInf;
          for (int a = 0; a < m.n_actions; ++a) {
            mx = std::max(mx, (*theta)[static_cast<std::size_t>(s) * m.n_actions + a]);
          }
          double sum = 0.0;
          for (int a = 0; a < m.n_actions; ++a) {
            sum += std::exp((*theta)[static_cast<std::size_t>(s) * m.n_actions + a] - mx);
          }
          const double lse = mx + std::log(sum);
          for (int a = 0; a < m.n_actions; ++a) {
            next.log_p(s, a) =
                (*theta)[static_cast<std::size_t>(s) * m.n_actions + a] - lse;
          }
        }
        return StepOutcome{std::move(next), eta, kNaN, std::nullopt};
      });
}

std::string describe(const StepSchedule& sched) {
  std::ostringstream os;
  if (const auto* c = std::get_if<ConstantEta>(&sched)) {
    os << "constant-eta eta=" << format_double(c->eta);
  } else if (const auto* inc = std::get_if<IncreasingEta>(&sched)) {
    os << "increasing-eta coeff=" << format_double(inc->coeff)
       << " offset=" << inc->offset;
  } else {
    const auto& ad = std::get<AdaptiveL>(sched);
    if (const auto* cl = std::get_if<ConstantL>(&ad.l)) {
      os << "adaptive constant-l L=" << format_double(cl->l);
    } else if (const auto* ll = std::get_if<LinearL>(&ad.l)) {
      os << "adaptive linear-l L=" << format_double(ll->l) << " offset=" << ll->offset;
    } else {
      const auto& g = std::get<GeometricL>(ad.l);
      os << "adaptive geometric-l L=" << format_double(g.l) << " p=" << format_double(g.p);
    }
  }
  return os.str();
}

}  // namespace npglab
