#include "npglab/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace npglab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

void BoundParams::validate() const {
  require(gamma > 0.0 && gamma < 1.0, "bound params: gamma must lie in (0,1)");
  require(n_actions >= 1, "bound params: n_actions must be >= 1");
  require(eta > 0.0 && std::isfinite(eta), "bound params: eta must be positive");
  require(lambda > 1.0, "bound params: lambda must be > 1");
  require(delta > 0.0, "bound params: delta must be positive");
}

long BanditBoundParams::kappa_b() const {
  const double denom = 1.0 - std::exp(-eta * delta * lambda_b);
  return static_cast<long>(std::ceil(big_c() * (1.0 - gamma) / delta / denom));
}

void BanditBoundParams::validate() const {
  require(gamma > 0.0 && gamma < 1.0, "bandit params: gamma must lie in (0,1)");
  require(n_actions >= 1, "bandit params: n_actions must be >= 1");
  require(eta > 0.0 && std::isfinite(eta), "bandit params: eta must be positive");
  require(delta > 0.0 && std::isfinite(delta), "bandit params: delta must be finite");
  require(lambda_b > 0.0 && lambda_b < 1.0,
          "bandit params: lambda_b must lie in (0,1)");
}

double const_step_tail_envelope(const BoundParams& params, double K) {
  params.validate();
  const double scale = 1.0 / ((1.0 - params.gamma) * (1.0 - params.gamma));
  if (params.delta == kInf) return K >= 1.0 ? 0.0 : scale;
  const double exponent =
      -(K - params.kappa()) * (1.0 - 1.0 / params.lambda) * params.eta * params.delta;
  return scale * std::exp(exponent);
}

double sublinear_envelope(double gamma, int n_actions, double eta, long k) {
  require(k >= 1, "sublinear envelope undefined at k = 0");
  require(gamma > 0.0 && gamma < 1.0, "sublinear envelope: gamma must lie in (0,1)");
  require(eta > 0.0, "sublinear envelope: eta must be positive");
  const double c = std::log(static_cast<double>(n_actions)) / eta +
                   1.0 / ((1.0 - gamma) * (1.0 - gamma));
  return c / static_cast<double>(k);
}

double policy_decay_envelope(double pi_ref_value, double K, const BoundParams& params,
                             std::optional<double> ref_iter) {
  params.validate();
  require(params.delta != kInf, "policy decay envelope needs a finite delta");
  const double ref = ref_iter.value_or(params.kappa());
  if (K < ref) {
    throw std::domain_error("policy decay envelope: K must be >= the reference iterate");
  }
  return pi_ref_value *
         std::exp(-(K - ref) * (1.0 - 1.0 / params.lambda) * params.eta * params.delta);
}

double adaptive_beta(double gamma, double l, long k) {
  if (l == -std::log(gamma)) {
    return static_cast<double>(k) * std::exp(l);
  }
  return 1.0 / std::abs(gamma - std::exp(-l));
}

double adaptive_envelope(double gamma, double l, AdaptiveMode mode, double err0, long k) {
  require(gamma > 0.0 && gamma < 1.0, "adaptive envelope: gamma must lie in (0,1)");
  require(l > 0.0, "adaptive envelope: L must be positive");
  require(k >= 0, "adaptive envelope: k must be >= 0");
  const double head = std::pow(gamma, static_cast<double>(k)) * err0;
  if (mode == AdaptiveMode::kConstant) {
    return head + std::exp(-l) / ((1.0 - gamma) * (1.0 - gamma));
  }
  const double tail = std::max(std::pow(gamma, static_cast<double>(k)),
                               std::exp(-l * static_cast<double>(k)));
  return head + adaptive_beta(gamma, l, k) * tail / (1.0 - gamma);
}

double pi_target_value_gap_bound(double gamma, double l_k) {
  return std::exp(-l_k) / (1.0 - gamma);
}

double entry_gap_bound(int n_actions, double l_k) {
  return std::exp(-l_k) / static_cast<double>(n_actions);
}

double bandit_lower_envelope(const BanditBoundParams& params, long K) {
  params.validate();
  require(K >= 0, "bandit lower envelope: K must be >= 0");
  return params.delta / ((1.0 - params.gamma) * params.n_actions) *
         std::exp(-params.eta * params.delta * static_cast<double>(K));
}

double bandit_upper_envelope(const BanditBoundParams& params, double err_at_kappa_b,
                             long K) {
  params.validate();
  const long kb = params.kappa_b();
  if (K < kb) {
    throw std::domain_error("bandit upper envelope: K must be >= kappa_b");
  }
  const double decay = std::exp(-params.eta * params.delta * (1.0 - params.lambda_b) *
                                static_cast<double>(K - kb));
  return decay * std::min(err_at_kappa_b, trivial_error_cap(params.gamma));
}

BanditEnvelopes bandit_envelopes(const BanditBoundParams& params, double err_at_kappa_b,
                                 long K) {
  return {bandit_lower_envelope(params, K),
          bandit_upper_envelope(params, err_at_kappa_b, K)};
}

double weighted_l1_matrix_norm(const Eigen::MatrixXd& t, const InitialDist& rho) {
  const Eigen::Index n = t.rows();
  require(t.cols() == n, "weighted norm: matrix must be square");
  require(rho.n_states() == n, "weighted norm: rho dimension mismatch");
  for (double w : rho.rho) {
    if (!(w > 0.0)) {
      throw std::domain_error("weighted norm: rho must be strictly positive");
    }
  }
  double worst = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    double col = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) col += rho.rho[i] * std::abs(t(i, j));
    worst = std::max(worst, col / rho.rho[j]);
  }
  return worst;
}

Eigen::MatrixXd t_operator(const Mdp& mdp, const Policy& policy) {
  return mdp.discount * policy_transition_matrix(mdp, policy) -
         Eigen::MatrixXd::Identity(mdp.n_states, mdp.n_states);
}

SuperlinearDiag superlinear_diag(const Mdp& mdp, const RunTrace& trace,
                                 const InitialDist& rho, double p, double l) {
  require(p > 1.0 && p <= 2.0, "superlinear diagnostic: p must lie in (1,2]");
  require(l > 0.0, "superlinear diagnostic: L must be positive");
  const auto* adaptive = std::get_if<AdaptiveL>(&trace.schedule);
  if (adaptive == nullptr || !std::holds_alternative<GeometricL>(adaptive->l)) {
    throw std::invalid_argument(
        "superlinear diagnostic needs a geometric-schedule adaptive trace");
  }
  for (double w : rho.rho) {
    if (!(w > 0.0)) {
      throw std::domain_error("superlinear diagnostic: rho must be strictly positive");
    }
  }

  SuperlinearDiag diag;
  diag.p = p;
  diag.l = l;

  const Policy pi_star = policy_iteration(mdp).policy;
  const Eigen::MatrixXd t_star = t_operator(mdp, pi_star);
  const ValueFn v_star = evaluate_policy(mdp, pi_star);

  double l_tilde = 0.0, m_norm = 0.0;
  for (std::size_t k = 0; k < trace.policies.size(); ++k) {
    const Eigen::MatrixXd t_k = t_operator(mdp, trace.policies[k]);
    m_norm = std::max(m_norm, weighted_l1_matrix_norm(t_k.inverse(), rho));
    if (trace.records[k].error < 1e-12) continue;  // curvature ratio degenerates
    const ValueFn v_k = evaluate_policy(mdp, trace.policies[k]);
    double dist = 0.0;
    for (int s = 0; s < mdp.n_states; ++s) {
      dist += rho.rho[s] * std::abs(v_k.v[s] - v_star.v[s]);
    }
    const double num = weighted_l1_matrix_norm(t_k - t_star, rho);
    // Operator differences at floating-point noise level are zero in exact
    // arithmetic (policy-independent transitions); dividing them by a tiny
    // value distance would fabricate curvature.
    if (num < 1e-13) continue;
    l_tilde = std::max(l_tilde, num / std::pow(dist, p - 1.0));
  }
  diag.l_tilde = l_tilde;
  diag.m_norm = m_norm;
  diag.b = l_tilde * m_norm;

  // Leading constant of the envelope; -inf when b = 0 (policy-independent
  // transitions), which makes every exponent term vanish.
  const double a_const = std::log(diag.b) / (p - 1.0) +
                         p * std::log(p) / ((p - 1.0) * (p - 1.0));
  diag.err0 = std::abs(trace.records.empty() ? 0.0 : trace.records.front().error);
  const double log_err0 = std::log(diag.err0);
  diag.condition_ok =
      log_err0 < -a_const && l > a_const - std::log(1.0 - mdp.discount);

  diag.envelope.resize(trace.records.size());
  for (std::size_t k = 0; k < trace.records.size(); ++k) {
    const double pk = std::pow(p, static_cast<double>(k));
    const double term1 = std::exp(pk * (a_const + log_err0));
    const double term2 =
        k == 0 ? 0.0
               : std::exp(pk * (a_const - std::log(1.0 - mdp.discount) - l) +
                          std::log(static_cast<double>(k)));
    diag.envelope[k] = term1 + term2;
  }

  diag.log_ratio.assign(trace.records.size(), kNaN);
  for (std::size_t k = 0; k + 1 < trace.records.size(); ++k) {
    const double e0 = trace.records[k].error;
    const double e1 = trace.records[k + 1].error;
    if (e0 > 0.0 && e0 < 1.0 && e1 > 0.0) {
      diag.log_ratio[k] = std::log(e1) / std::log(e0);
    }
  }
  return diag;
}

// --- certification -------------------------------------------------------

namespace {

// The constant-step envelopes are statements about the multiplicative
// update, so a pg trace (which also carries a fixed step size) is not
// certifiable against them.
const ConstantEta* constant_schedule(const RunTrace& trace) {
  if (trace.algorithm != "npg-c" && trace.algorithm != "terminated") return nullptr;
  return std::get_if<ConstantEta>(&trace.schedule);
}

const AdaptiveL* adaptive_schedule(const RunTrace& trace) {
  return std::get_if<AdaptiveL>(&trace.schedule);
}

void finalize(EnvelopeCert& cert) {
  for (const CertRow& row : cert.rows) {
    if (!row.ok) {
      cert.first_violation = row.iter;
      break;
    }
  }
}

EnvelopeCert cert_geom_tail(const RunTrace& trace, const OptimalityReport& report,
                            const CertifyOptions& opts) {
  const ConstantEta* sched = constant_schedule(trace);
  require(sched != nullptr, "geom-tail needs a constant-step npg trace");
  BoundParams params{trace.mdp_metadata.gamma, trace.mdp_metadata.n_actions, sched->eta,
                     opts.lambda, report.gap_delta};
  EnvelopeCert cert{"geom-tail", "upper", {}, std::nullopt};
  for (const TraceRecord& rec : trace.records) {
    const double bound = const_step_tail_envelope(params, static_cast<double>(rec.iter));
    cert.rows.push_back(
        {rec.iter, rec.error, bound, rec.error <= bound + opts.slack});
  }
  finalize(cert);
  return cert;
}

EnvelopeCert cert_sublinear(const RunTrace& trace, const CertifyOptions& opts) {
  const ConstantEta* sched = constant_schedule(trace);
  require(sched != nullptr, "sublinear needs a constant-step npg trace");
  EnvelopeCert cert{"sublinear", "upper", {}, std::nullopt};
  for (const TraceRecord& rec : trace.records) {
    if (rec.iter < 1) continue;
    const double bound = sublinear_envelope(
        trace.mdp_metadata.gamma, trace.mdp_metadata.n_actions, sched->eta, rec.iter);
    cert.rows.push_back(
        {rec.iter, rec.error, bound, rec.error <= bound + opts.slack});
  }
  finalize(cert);
  return cert;
}

EnvelopeCert cert_prob_decay(const RunTrace& trace, const OptimalityReport& report,
                             const CertifyOptions& opts) {
  const ConstantEta* sched = constant_schedule(trace);
  require(sched != nullptr, "prob-decay needs a constant-step npg trace");
  EnvelopeCert cert{"prob-decay", "upper", {}, std::nullopt};
  if (report.gap_delta == kInf) return cert;  // no suboptimal pairs to bound
  BoundParams params{trace.mdp_metadata.gamma, trace.mdp_metadata.n_actions, sched->eta,
                     opts.lambda, report.gap_delta};
  // Anchor at the first integer iterate covered by the statement.
  const long anchor = static_cast<long>(std::ceil(params.kappa()));
  if (anchor >= static_cast<long>(trace.policies.size())) return cert;
  const Policy& pi_ref = trace.policies[anchor];
  const int na = trace.mdp_metadata.n_actions;
  for (long k = anchor; k < static_cast<long>(trace.policies.size()); ++k) {
    const Policy& pi_k = trace.policies[k];
    // Worst excess of pi_k(a|s) over its per-entry envelope across all
    // suboptimal pairs; the bound column is the zero excess line.
    double worst = -kInf;
    for (int s = 0; s < pi_k.n_states; ++s) {
      if (report.is_dummy[s]) continue;
      for (int a = 0; a < na; ++a) {
        if (report.action_optimal(s, a)) continue;
        const double envelope = policy_decay_envelope(
            pi_ref.prob(s, a), static_cast<double>(k), params,
            static_cast<double>(anchor));
        worst = std::max(worst, pi_k.prob(s, a) - envelope);
      }
    }
    if (worst == -kInf) continue;
    cert.rows.push_back({k, worst, 0.0, worst <= opts.entry_slack});
  }
  finalize(cert);
  return cert;
}

EnvelopeCert cert_pi_gap(const RunTrace& trace, const CertifyOptions& opts) {
  require(adaptive_schedule(trace) != nullptr, "pi-gap needs an adaptive trace");
  EnvelopeCert cert{"pi-gap", "upper", {}, std::nullopt};
  const double gamma = trace.mdp_metadata.gamma;
  for (const TraceRecord& rec : trace.records) {
    if (std::isnan(rec.pi_gap_value)) continue;
    const double bound = pi_target_value_gap_bound(gamma, rec.l_k);
    cert.rows.push_back(
        {rec.iter, rec.pi_gap_value, bound, rec.pi_gap_value <= bound + opts.slack});
  }
  finalize(cert);
  return cert;
}

EnvelopeCert cert_entry_gap(const RunTrace& trace, const CertifyOptions& opts) {
  require(adaptive_schedule(trace) != nullptr, "entry-gap needs an adaptive trace");
  EnvelopeCert cert{"entry-gap", "upper", {}, std::nullopt};
  for (const TraceRecord& rec : trace.records) {
    if (std::isnan(rec.pi_gap_tv)) continue;
    const double bound = entry_gap_bound(trace.mdp_metadata.n_actions, rec.l_k);
    cert.rows.push_back(
        {rec.iter, rec.pi_gap_tv, bound, rec.pi_gap_tv <= bound + opts.entry_slack});
  }
  finalize(cert);
  return cert;
}

EnvelopeCert cert_adaptive(const RunTrace& trace, const CertifyOptions& opts) {
  const AdaptiveL* sched = adaptive_schedule(trace);
  require(sched != nullptr, "adaptive needs an adaptive trace");
  double l = 0.0;
  AdaptiveMode mode;
  if (const auto* cl = std::get_if<ConstantL>(&sched->l)) {
    mode = AdaptiveMode::kConstant;
    l = cl->l;
  } else if (const auto* ll = std::get_if<LinearL>(&sched->l)) {
    mode = AdaptiveMode::kLinear;
    l = ll->l;
  } else {
    throw std::invalid_argument(
        "adaptive envelope covers constant and linear L schedules only");
  }
  EnvelopeCert cert{"adaptive", "upper", {}, std::nullopt};
  const double err0 = trace.records.empty() ? 0.0 : trace.records.front().error;
  for (const TraceRecord& rec : trace.records) {
    const double bound =
        adaptive_envelope(trace.mdp_metadata.gamma, l, mode, err0, rec.iter);
    cert.rows.push_back(
        {rec.iter, rec.error, bound, rec.error <= bound + opts.slack});
  }
  finalize(cert);
  return cert;
}

EnvelopeCert cert_bandit(const RunTrace& trace, const OptimalityReport& report,
                         const CertifyOptions& opts, bool lower) {
  const ConstantEta* sched = constant_schedule(trace);
  require(sched != nullptr, "bandit envelopes need a constant-step npg trace");
  require(trace.mdp_metadata.n_states == 1,
          "bandit envelopes apply to single-state instances");
  EnvelopeCert cert{lower ? "bandit-lower" : "bandit-upper", lower ? "lower" : "upper",
                    {}, std::nullopt};
  if (report.gap_delta == kInf) return cert;  // every policy optimal
  BanditBoundParams params{sched->eta, report.gap_delta, trace.mdp_metadata.gamma,
                           trace.mdp_metadata.n_actions, opts.lambda_b};
  params.validate();
  const long kb = params.kappa_b();
  const long last = trace.records.empty() ? -1 : trace.records.back().iter;
  if (!lower && kb > last) return cert;  // nothing certifiable yet
  const double err_kb = lower ? 0.0 : trace.records[kb].error;
  for (const TraceRecord& rec : trace.records) {
    if (lower) {
      const double bound = bandit_lower_envelope(params, rec.iter);
      cert.rows.push_back(
          {rec.iter, rec.error, bound, rec.error >= bound - opts.slack});
    } else {
      if (rec.iter < kb) continue;
      const double bound = bandit_upper_envelope(params, err_kb, rec.iter);
      cert.rows.push_back(
          {rec.iter, rec.error, bound, rec.error <= bound + opts.slack});
    }
  }
  finalize(cert);
  return cert;
}

}  // namespace

std::vector<std::string> known_envelopes() {
  return {"geom-tail", "sublinear", "prob-decay", "pi-gap",
          "entry-gap", "adaptive",  "bandit-lower", "bandit-upper"};
}

std::vector<std::string> default_envelopes(const RunTrace& trace) {
  std::vector<std::string> out;
  if (constant_schedule(trace) != nullptr) {
    out = {"geom-tail", "sublinear", "prob-decay"};
    if (trace.mdp_metadata.n_states == 1) {
      out.push_back("bandit-lower");
      out.push_back("bandit-upper");
    }
  } else if (const AdaptiveL* sched = adaptive_schedule(trace)) {
    out = {"pi-gap", "entry-gap"};
    if (!std::holds_alternative<GeometricL>(sched->l)) out.push_back("adaptive");
  }
  return out;
}

CertReport certify(const RunTrace& trace, const OptimalityReport& report,
                   const std::vector<std::string>& which, const CertifyOptions& opts) {
  if (report.q_star.n_states != trace.mdp_metadata.n_states ||
      report.q_star.n_actions != trace.mdp_metadata.n_actions) {
    throw std::invalid_argument("certify: trace and report describe different instances");
  }
  CertReport out;
  for (const std::string& id : which) {
    if (id == "geom-tail") {
      out.envelopes.push_back(cert_geom_tail(trace, report, opts));
    } else if (id == "sublinear") {
      out.envelopes.push_back(cert_sublinear(trace, opts));
    } else if (id == "prob-decay") {
      out.envelopes.push_back(cert_prob_decay(trace, report, opts));
    } else if (id == "pi-gap") {
      out.envelopes.push_back(cert_pi_gap(trace, opts));
    } else if (id == "entry-gap") {
      out.envelopes.push_back(cert_entry_gap(trace, opts));
    } else if (id == "adaptive") {
      out.envelopes.push_back(cert_adaptive(trace, opts));
    } else if (id == "bandit-lower") {
      out.envelopes.push_back(cert_bandit(trace, report, opts, true));
    } else if (id == "bandit-upper") {
      out.envelopes.push_back(cert_bandit(trace, report, opts, false));
    } else {
      throw std::invalid_argument("certify: unknown envelope id \"" + id + "\"");
    }
  }
  return out;
}

}  // namespace npglab
