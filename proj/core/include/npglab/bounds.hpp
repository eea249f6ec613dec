#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "npglab/algorithms.hpp"
#include "npglab/mdp.hpp"
#include "npglab/solver.hpp"

namespace npglab {

/// 1/(1-gamma), the largest possible value of any value function in strict
/// reward mode; reported alongside the raw envelopes, never min'ed into them.
inline double trivial_error_cap(double gamma) { return 1.0 / (1.0 - gamma); }

/**
 * Parameters of the constant-step error envelopes. kappa is the iteration
 * threshold (lambda/delta) * (log|A|/eta + 1/(1-gamma)^2) past which the
 * suboptimal-action mass provably decays geometrically.
 */
struct BoundParams {
  double gamma = 0.0;
  int n_actions = 0;
  double eta = 0.0;
  double lambda = 2.0;  // free parameter, > 1
  double delta = kInf;  // optimal advantage gap

  double big_c() const {
    return std::log(static_cast<double>(n_actions)) / eta +
           1.0 / ((1.0 - gamma) * (1.0 - gamma));
  }
  double kappa() const { return delta == kInf ? 0.0 : lambda / delta * big_c(); }
  void validate() const;
};

/// Single-state analogue; lambda_b in (0,1) splits the decay rate between
/// the pre-threshold and post-threshold phases.
struct BanditBoundParams {
  double eta = 0.0;
  double delta = 0.0;
  double gamma = 0.0;
  int n_actions = 0;
  double lambda_b = 0.5;

  double big_c() const {
    return 1.0 / ((1.0 - gamma) * (1.0 - gamma)) +
           std::log(static_cast<double>(n_actions)) / eta;
  }
  long kappa_b() const;
  void validate() const;
};

/// Raw tail envelope (1/(1-gamma)^2) exp(-(K-kappa)(1-1/lambda) eta delta).
/// With delta = +inf: 0 for K >= 1, the K=kappa value 1/(1-gamma)^2 at K=0.
double const_step_tail_envelope(const BoundParams& params, double K);

/// Global sublinear envelope (log|A|/eta + 1/(1-gamma)^2) / k, k >= 1.
double sublinear_envelope(double gamma, int n_actions, double eta, long k);

/**
 * Per-entry decay of suboptimal action probability:
 * pi_ref * exp(-(K - ref_iter)(1-1/lambda) eta delta). ref_iter defaults to
 * params.kappa(); certification anchors it at ceil(kappa), the first integer
 * iterate the statement applies to. Domain error when K < ref_iter.
 */
double policy_decay_envelope(double pi_ref_value, double K, const BoundParams& params,
                             std::optional<double> ref_iter = std::nullopt);

enum class AdaptiveMode { kLinear, kConstant };

/// beta(k) factor of the linear-mode adaptive envelope: 1/|gamma - e^-L|
/// off the resonance L = -log(gamma), k e^L on it.
double adaptive_beta(double gamma, double l, long k);

/**
 * Adaptive-step error envelope. Linear mode (L_k = L k):
 * gamma^k err0 + beta(k) max(gamma^k, e^{-Lk}) / (1-gamma). Constant mode
 * (L_k = L): gamma^k err0 + e^{-L}/(1-gamma)^2.
 */
double adaptive_envelope(double gamma, double l, AdaptiveMode mode, double err0, long k);

/// Per-step value gap bound e^{-L_k}/(1-gamma) between the adaptive update
/// and its renormalized greedy target.
double pi_target_value_gap_bound(double gamma, double l_k);

/// Per-entry probability gap bound e^{-L_k}/|A| for the same pair.
double entry_gap_bound(int n_actions, double l_k);

struct BanditEnvelopes {
  double lower = 0.0;
  double upper = 0.0;
};

/// Lower bound delta e^{-eta delta K} / ((1-gamma)|A|), valid for all K >= 0.
double bandit_lower_envelope(const BanditBoundParams& params, long K);

/// Upper bound e^{-eta delta (1-lambda_b)(K-kappa_b)} * err_at_kappa_b,
/// additionally capped by the same decay applied to 1/(1-gamma).
/// Domain error when K < kappa_b.
double bandit_upper_envelope(const BanditBoundParams& params, double err_at_kappa_b,
                             long K);

BanditEnvelopes bandit_envelopes(const BanditBoundParams& params, double err_at_kappa_b,
                                 long K);

/// Induced norm of the weighted L1 vector norm ||v|| = sum_s rho(s)|v(s)|:
/// max over columns j of sum_i rho(i)|T(i,j)| / rho(j). Domain error unless
/// rho is strictly positive everywhere.
double weighted_l1_matrix_norm(const Eigen::MatrixXd& t, const InitialDist& rho);

/// gamma P_pi - I.
Eigen::MatrixXd t_operator(const Mdp& mdp, const Policy& policy);

/**
 * Ex-post diagnostic for super-linear convergence under a geometric L
 * schedule. The curvature constant l_tilde and resolvent-norm bound m_norm
 * are estimated from the trace itself, so condition_ok is evidence, not a
 * certificate; the ratio test log err_{k+1} / log err_k -> p is reported as
 * supplementary evidence.
 */
struct SuperlinearDiag {
  double p = 2.0;
  double l = 0.0;
  double l_tilde = 0.0;
  double m_norm = 0.0;
  double b = 0.0;
  bool condition_ok = false;
  double err0 = 0.0;            // |V*(rho) - V^{pi_0}(rho)|; equals the
                                // rho-weighted L1 distance since V* dominates
  std::vector<double> envelope;  // per iterate
  std::vector<double> log_ratio;  // log err_{k+1}/log err_k, NaN where undefined
};

SuperlinearDiag superlinear_diag(const Mdp& mdp, const RunTrace& trace,
                                 const InitialDist& rho, double p, double l);

// --- certification -------------------------------------------------------

struct CertifyOptions {
  double lambda = 2.0;      // tail-envelope free parameter
  double lambda_b = 0.5;    // bandit rate split
  double slack = 1e-9;      // absolute slack on value-scale comparisons
  double entry_slack = 1e-12;  // absolute slack on probability-scale comparisons
};

struct CertRow {
  long iter = 0;
  double empirical = 0.0;
  double bound = 0.0;
  bool ok = true;
};

struct EnvelopeCert {
  std::string envelope;
  std::string kind;  // "upper" or "lower"
  std::vector<CertRow> rows;
  std::optional<long> first_violation;
};

struct CertReport {
  std::vector<EnvelopeCert> envelopes;

  bool all_ok() const {
    for (const auto& e : envelopes) {
      if (e.first_violation) return false;
    }
    return true;
  }
};

/// Envelope ids understood by certify().
/// "geom-tail", "sublinear", "prob-decay": constant-step traces.
/// "pi-gap", "entry-gap", "adaptive": adaptive traces.
/// "bandit-lower", "bandit-upper": constant-step traces on single-state
/// instances.
std::vector<std::string> known_envelopes();

/// Applicable envelope set for a trace, used for the CLI's auto mode.
std::vector<std::string> default_envelopes(const RunTrace& trace);

/**
 * Compares the recorded empirical quantities of a run against the requested
 * envelopes. The trace and report must describe the same instance (checked
 * by dimension; the CLI additionally checks the embedded content hash).
 */
CertReport certify(const RunTrace& trace, const OptimalityReport& report,
                   const std::vector<std::string>& which,
                   const CertifyOptions& opts = {});

}  // namespace npglab
