#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "npglab/mdp.hpp"
#include "npglab/schedule.hpp"
#include "npglab/solver.hpp"

namespace npglab {

/**
 * One iteration of a run. Record k describes the iterate pi_k together with
 * the step taken from it: eta_used is the step size applied at iteration k
 * and the *_increase / pi_gap_* fields compare pi_{k+1} against pi_k and the
 * renormalized greedy target. Forward-looking fields are NaN on the final
 * record, pi_gap_* are NaN outside adaptive runs.
 */
struct TraceRecord {
  long iter = 0;
  double eta_used = 0.0;
  double l_k = 0.0;        // adaptive runs only
  double value_rho = 0.0;  // V^{pi_k}(rho)
  double error = 0.0;      // V*(rho) - V^{pi_k}(rho)
  double scaled_error = 0.0;
  double subopt_mass = 0.0;
  double value_vector_min_increase = 0.0;  // min_s V^{pi_{k+1}}(s) - V^{pi_k}(s)
  double pi_gap_tv = 0.0;     // max_{s,a} |pi_{k+1}(a|s) - target(a|s)|
  double pi_gap_value = 0.0;  // |V^{pi_{k+1}}(rho) - V^{target}(rho)|
};

struct TraceMetadata {
  std::string generator;
  std::uint64_t seed = 0;
  bool has_seed = false;
  int n_states = 0;
  int n_actions = 0;
  double gamma = 0.0;
  std::uint64_t mdp_hash = 0;
  std::string rho_desc;  // "uniform" or "delta:<s>"
};

struct RunTrace {
  std::string algorithm;
  StepSchedule schedule;
  std::vector<TraceRecord> records;  // indexed 0..K contiguously
  std::vector<Policy> policies;      // iterates 0..K, aligned with records
  Policy final_policy;
  TraceMetadata mdp_metadata;
};

/**
 * Multiplicative softmax update: in log space,
 * l'(a|s) = l(a|s) + eta q(s,a) - logsumexp_a'(l(a'|s) + eta q(s,a')),
 * with a max-shifted log-sum-exp. Zero-probability actions stay at zero.
 */
Policy npg_step(const Policy& policy, const QFn& q, double eta);

/// Constant-step natural policy gradient from the uniform policy; exactly K
/// update steps, K+1 records.
RunTrace run_npg_constant(const Mdp& mdp, double eta, long K, const InitialDist& rho);

/// Same loop with eta_k = coeff * (k + offset).
RunTrace run_npg_increasing(const Mdp& mdp, const IncreasingEta& schedule, long K,
                            const InitialDist& rho);

/**
 * Smallest step size satisfying
 * eta >= (l_k + log(|A| / pi(a|s))) / gap(s) over every state with a finite
 * Q-gap and every greedy action a there. Returns 1.0 when every state's
 * greedy set is the whole action space (any step reproduces the target).
 */
double adaptive_eta(const Policy& policy, const GreedyReport& greedy, double l_k);

/// Adaptive-step run: per iteration computes the greedy report of the exact
/// Q, picks eta_k from the L schedule and records the gap to the renormalized
/// greedy target (both per-entry and in value at rho).
RunTrace run_npg_adaptive(const Mdp& mdp, const LSchedule& schedule, long K,
                          const InitialDist& rho);

struct TerminatedResult {
  Policy policy;      // deterministic output policy
  long kappa = 0;     // NPG iterations performed
  RunTrace trace;     // the constant-step iterates 0..kappa
};

/**
 * Runs kappa = ceil((lambda/delta) (log|A|/eta + 1/(1-gamma)^2)) constant-step
 * iterations, then outputs the deterministic policy picking the advantage
 * argmax per state (seeded random choice between exact ties). When delta is
 * +inf every policy is optimal and the uniform policy is returned with
 * kappa = 0.
 */
TerminatedResult run_terminated_npg(const Mdp& mdp, double eta, double delta,
                                    double lambda, const InitialDist& rho,
                                    RngSeed tie_seed = {0});

/// Vanilla softmax policy gradient on logits theta(s,a) with the fixed step
/// (1-gamma)^3 / (2 |A| gamma); gradient (1/(1-gamma)) d_rho(s) pi(a|s) A(s,a).
RunTrace run_softmax_pg(const Mdp& mdp, long K, const InitialDist& rho);

/// Step size used by run_softmax_pg.
double softmax_pg_step_size(double gamma, int n_actions);

/// Max over (s,a) of |pi1(a|s) - pi2(a|s)|.
double max_probability_gap(const Policy& pi1, const Policy& pi2);

}  // namespace npglab
