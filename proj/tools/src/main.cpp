#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "experiment.hpp"
#include "npglab/bounds.hpp"
#include "npglab/io.hpp"
#include "npglab/solver.hpp"
#include "trace_csv.hpp"

namespace {

using namespace npglab;
using namespace npglab::cli;

constexpr int kExitOk = 0;
constexpr int kExitViolation = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void require_gamma(double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw std::invalid_argument("gamma must lie strictly in (0,1)");
  }
}

Mdp load_mdp_file(const std::string& path) {
  return mdp_from_document(read_text_file(path));
}

std::string join_ints(const std::vector<int>& values) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) os << ',';
    os << values[i];
  }
  os << ']';
  return os.str();
}

std::string format_or_inf(double v) {
  return v == kInf ? "inf" : format_double(v);
}

int cmd_gen(int states, int actions, double gamma, std::uint64_t seed,
            const std::string& out, const std::string& name) {
  require_gamma(gamma);
  Mdp mdp = random_mdp({seed}, states, actions, gamma);
  mdp.name = name;
  write_text_file(out, to_document(mdp));
  const OptimalityReport rep = solve_optimal(mdp);
  std::cout << "generated states=" << states << " actions=" << actions
            << " gamma=" << format_double(gamma) << " seed=" << seed
            << " generator=" << kGeneratorId
            << " delta=" << format_or_inf(rep.gap_delta)
            << " dummy_states=" << rep.dummy_states.size() << "\n";
  std::cout << "wrote " << out << "\n";
  return kExitOk;
}

void require_valid(const Mdp& mdp, bool relaxed) {
  const auto issues =
      validate(mdp, relaxed ? RewardMode::kRelaxed : RewardMode::kStrict);
  if (!issues.empty()) {
    throw std::invalid_argument("invalid mdp:\n" + describe(issues));
  }
}

int cmd_solve(const std::string& mdp_path, const std::string& rho_desc, double tie_tol,
              double eta, double lambda, const std::string& policy_out, bool relaxed) {
  const Mdp mdp = load_mdp_file(mdp_path);
  require_valid(mdp, relaxed);
  const InitialDist rho = parse_rho(rho_desc, mdp.n_states);
  const OptimalityReport rep = solve_optimal(mdp, tie_tol);

  std::cout << "states=" << mdp.n_states << " actions=" << mdp.n_actions
            << " gamma=" << format_double(mdp.discount) << "\n";
  std::cout << "v_star_rho=" << format_double(rep.v_star(rho)) << "\n";
  std::cout << "delta=" << format_or_inf(rep.gap_delta) << "\n";
  std::cout << "dummy_states=" << join_ints(rep.dummy_states) << "\n";
  std::vector<int> set_sizes;
  set_sizes.reserve(rep.optimal_sets.size());
  for (const auto& s : rep.optimal_sets) set_sizes.push_back(static_cast<int>(s.size()));
  std::cout << "optimal_set_sizes=" << join_ints(set_sizes) << "\n";
  std::cout << "trivial_error_cap=" << format_double(trivial_error_cap(mdp.discount))
            << "\n";
  if (eta > 0.0) {
    if (rep.gap_delta == kInf) {
      std::cout << "kappa=n/a (delta=inf: every policy is optimal)\n";
    } else {
      BoundParams params{mdp.discount, mdp.n_actions, eta, lambda, rep.gap_delta};
      std::cout << "kappa=" << format_double(params.kappa()) << " (eta="
                << format_double(eta) << " lambda=" << format_double(lambda) << ")\n";
    }
  }
  if (!policy_out.empty()) {
    const PiResult pi = policy_iteration(mdp, tie_tol);
    write_text_file(policy_out, to_document(pi.policy));
    std::cout << "wrote optimal policy to " << policy_out << "\n";
  }
  return kExitOk;
}

int cmd_run(const std::string& mdp_path, const std::string& algorithm, double eta,
            double coeff, int offset, double l, double p, long iters, double lambda,
            double delta, std::uint64_t tie_seed, const std::string& rho_desc,
            const std::string& out, const std::string& policy_out,
            const std::string& bound_cols, double bound_lambda, bool relaxed) {
  const Mdp mdp = load_mdp_file(mdp_path);
  require_valid(mdp, relaxed);
  const InitialDist rho = parse_rho(rho_desc, mdp.n_states);
  AlgorithmParams params;
  params.eta = eta;
  params.coeff = coeff;
  params.offset = offset;
  params.l = l;
  params.p = p;
  params.lambda = lambda;
  params.delta = delta;
  params.tie_seed = tie_seed;

  RunTrace trace;
  Policy output_policy;
  long kappa = 0;
  double used_delta = delta;
  if (algorithm == "terminated") {
    const double used_eta =
        eta > 0.0 ? eta : std::log(static_cast<double>(mdp.n_actions));
    if (used_delta == kInf) used_delta = solve_optimal(mdp).gap_delta;
    TerminatedResult res =
        run_terminated_npg(mdp, used_eta, used_delta, lambda, rho, {tie_seed});
    trace = std::move(res.trace);
    output_policy = std::move(res.policy);
    kappa = res.kappa;
  } else {
    trace = run_algorithm(mdp, algorithm, params, iters, rho);
    output_policy = trace.final_policy;
  }

  std::vector<EnvelopeCert> bounds;
  if (!bound_cols.empty()) {
    std::vector<std::string> which;
    if (bound_cols == "auto") {
      which = default_envelopes(trace);
    } else {
      std::istringstream in(bound_cols);
      std::string item;
      while (std::getline(in, item, ',')) which.push_back(item);
    }
    CertifyOptions opts;
    opts.lambda = bound_lambda;
    const CertReport cert = certify(trace, solve_optimal(mdp), which, opts);
    bounds = cert.envelopes;
  }

  write_text_file(out, trace_to_csv(trace, bounds));
  std::cout << "wrote " << out << " (" << trace.records.size() << " rows)\n";

  if (algorithm == "terminated") {
    const OptimalityReport rep = solve_optimal(mdp);
    const ValueFn v = evaluate_policy(mdp, output_policy);
    double residual = 0.0;
    for (int s = 0; s < mdp.n_states; ++s) {
      residual = std::max(residual, std::abs(v.v[s] - rep.v_star.v[s]));
    }
    std::cout << "kappa=" << kappa << " delta=" << format_or_inf(used_delta)
              << " optimality_residual=" << format_double(residual) << "\n";
  }
  if (!policy_out.empty()) {
    write_text_file(policy_out, to_document(output_policy));
    std::cout << "wrote final policy to " << policy_out << "\n";
  }
  return kExitOk;
}

int cmd_bounds(const std::string& mdp_path, const std::string& trace_path,
               const std::string& envelopes, double lambda, double lambda_b,
               const std::string& out) {
  const Mdp mdp = load_mdp_file(mdp_path);
  // The envelopes assume rewards in [0,1]; relaxed instances are not
  // certifiable.
  require_valid(mdp, false);
  const CsvTrace csv = trace_from_csv(read_text_file(trace_path));

  const std::string expected_hash = hex64(content_hash(mdp));
  if (csv.meta_at("mdp_hash") != expected_hash) {
    throw std::invalid_argument("trace provenance mismatch: trace was produced from a "
                                "different instance (hash " +
                                csv.meta_at("mdp_hash") + ", file " + expected_hash +
                                ")");
  }

  const RunTrace trace = reconstruct_run(mdp, csv);
  const OptimalityReport rep = solve_optimal(mdp);

  std::vector<std::string> which;
  if (envelopes == "auto") {
    which = default_envelopes(trace);
  } else {
    std::istringstream in(envelopes);
    std::string item;
    while (std::getline(in, item, ',')) which.push_back(item);
  }

  if (which.empty()) {
    std::cout << "no applicable envelopes for algorithm \"" << trace.algorithm
              << "\"\n";
    return kExitOk;
  }
  CertifyOptions opts;
  opts.lambda = lambda;
  opts.lambda_b = lambda_b;
  const CertReport cert = certify(trace, rep, which, opts);

  if (!out.empty()) {
    write_text_file(out, cert_to_csv(cert));
    std::cout << "wrote " << out << "\n";
  }
  for (const EnvelopeCert& env : cert.envelopes) {
    std::cout << env.envelope << " (" << env.kind << "): " << env.rows.size()
              << " rows, ";
    if (env.first_violation) {
      std::cout << "first_violation_iter=" << *env.first_violation << "\n";
    } else {
      std::cout << "ok\n";
    }
  }
  return cert.all_ok() ? kExitOk : kExitViolation;
}

int cmd_experiment(const std::string& config_path, ExperimentConfig overrides,
                   const std::vector<std::string>& set_flags) {
  ExperimentConfig cfg;
  if (!config_path.empty()) {
    cfg = parse_config(read_text_file(config_path));
  }
  // Flags named on the command line win over the config file.
  for (const std::string& flag : set_flags) {
    if (flag == "states") cfg.n_states = overrides.n_states;
    if (flag == "actions") cfg.n_actions = overrides.n_actions;
    if (flag == "gamma") cfg.gamma = overrides.gamma;
    if (flag == "seed") cfg.seed = overrides.seed;
    if (flag == "iters") cfg.iterations = overrides.iterations;
    if (flag == "rho") cfg.rho = overrides.rho;
    if (flag == "algorithms") cfg.algorithms = overrides.algorithms;
    if (flag == "out-dir") cfg.out_dir = overrides.out_dir;
  }
  require_gamma(cfg.gamma);

  const ExperimentResult result = run_experiment(cfg);

  std::filesystem::create_directories(cfg.out_dir);
  const std::string csv_path = cfg.out_dir + "/trace.csv";
  const std::string svg_path = cfg.out_dir + "/chart.svg";
  write_text_file(csv_path, experiment_csv(cfg, result));
  write_text_file(svg_path, experiment_svg(result));

  std::cout << "instance: states=" << cfg.n_states << " actions=" << cfg.n_actions
            << " gamma=" << format_double(cfg.gamma) << " seed=" << cfg.seed << "\n";
  for (const RunTrace& trace : result.traces) {
    std::cout << trace.algorithm
              << ": final_error=" << format_double(trace.records.back().error) << "\n";
  }
  std::cout << "wrote " << csv_path << "\n";
  std::cout << "wrote " << svg_path << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"npglab: exact tabular policy-optimization runs and their "
               "instance-dependent convergence envelopes"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "generate a seeded random instance");
  int g_states = 70, g_actions = 10;
  double g_gamma = 0.9;
  std::uint64_t g_seed = 7;
  std::string g_out = "mdp.json", g_name;
  gen->add_option("--states", g_states, "number of states")->check(CLI::PositiveNumber);
  gen->add_option("--actions", g_actions, "number of actions")
      ->check(CLI::PositiveNumber);
  gen->add_option("--gamma", g_gamma, "discount factor in (0,1)");
  gen->add_option("--seed", g_seed, "generator seed");
  gen->add_option("-o,--out", g_out, "output path");
  gen->add_option("--name", g_name, "instance name stored in the file");

  // solve
  auto* solve = app.add_subcommand("solve", "exact solve and gap report");
  std::string s_mdp, s_rho = "uniform", s_policy_out;
  double s_tie = kDefaultTieTol, s_eta = 0.0, s_lambda = 2.0;
  bool s_relaxed = false;
  solve->add_option("mdp", s_mdp, "mdp file")->required();
  solve->add_option("--rho", s_rho, "initial distribution (uniform or delta:<s>)");
  solve->add_option("--tie-tol", s_tie, "argmax tie tolerance");
  solve->add_option("--eta", s_eta, "report kappa for this step size");
  solve->add_option("--lambda", s_lambda, "kappa free parameter (> 1)");
  solve->add_option("--policy-out", s_policy_out, "write the optimal policy here");
  solve->add_flag("--relaxed", s_relaxed,
                  "accept any finite rewards (range-dependent bounds unavailable)");

  // run
  auto* run = app.add_subcommand("run", "run one algorithm and write its trace");
  std::string r_mdp, r_alg, r_rho = "uniform", r_out = "trace.csv", r_policy_out;
  std::string r_bound_cols;
  double r_eta = 0.0, r_coeff = 0.0, r_l = 0.0, r_p = 2.0, r_lambda = 2.0;
  double r_delta = kInf, r_bound_lambda = 2.0;
  int r_offset = 1;
  long r_iters = 50;
  std::uint64_t r_tie_seed = 0;
  bool r_relaxed = false;
  run->add_option("mdp", r_mdp, "mdp file")->required();
  run->add_option("--alg", r_alg,
                  "pg | npg-c | npg-i | npg-a | npg-ai | npg-ag | terminated")
      ->required();
  run->add_option("--eta", r_eta, "constant step size (npg-c, terminated)");
  run->add_option("--coeff", r_coeff, "increasing-step coefficient (npg-i)");
  run->add_option("--offset", r_offset,
                  "schedule offset for npg-i / npg-ai (0 = literal)");
  run->add_option("--L", r_l, "adaptive L parameter");
  run->add_option("--p", r_p, "geometric schedule order in (1,2]");
  run->add_option("--iters", r_iters, "number of update steps");
  run->add_option("--lambda", r_lambda, "terminated: threshold parameter (> 1)");
  run->add_option("--delta", r_delta, "terminated: known gap (default: solve)");
  run->add_option("--seed", r_tie_seed, "terminated: tie-break seed");
  run->add_option("--rho", r_rho, "initial distribution");
  run->add_option("-o,--out", r_out, "trace csv path");
  run->add_option("--policy-out", r_policy_out, "write the final policy here");
  run->add_option("--bound-cols", r_bound_cols,
                  "append bound_* columns (auto or comma list)");
  run->add_option("--bound-lambda", r_bound_lambda, "lambda for bound columns");
  run->add_flag("--relaxed", r_relaxed,
                "accept any finite rewards (range-dependent bounds unavailable)");

  // bounds
  auto* bounds = app.add_subcommand("bounds", "certify a trace against envelopes");
  std::string b_mdp, b_trace, b_envelopes = "auto", b_out = "cert.csv";
  double b_lambda = 2.0, b_lambda_b = 0.5;
  bounds->add_option("mdp", b_mdp, "mdp file")->required();
  bounds->add_option("trace", b_trace, "trace csv produced by run")->required();
  bounds->add_option("--envelopes", b_envelopes, "auto or comma list");
  bounds->add_option("--lambda", b_lambda, "tail envelope parameter (> 1)");
  bounds->add_option("--lambda-b", b_lambda_b, "bandit rate split in (0,1)");
  bounds->add_option("-o,--out", b_out, "certification csv path");

  // experiment
  auto* exp = app.add_subcommand("experiment",
                                 "run the algorithm suite and plot the comparison");
  std::string e_config;
  ExperimentConfig e_cfg;
  std::string e_algorithms;
  exp->add_option("--config", e_config, "key = value config file");
  auto* f_states = exp->add_option("--states", e_cfg.n_states, "number of states");
  auto* f_actions = exp->add_option("--actions", e_cfg.n_actions, "number of actions");
  auto* f_gamma = exp->add_option("--gamma", e_cfg.gamma, "discount factor");
  auto* f_seed = exp->add_option("--seed", e_cfg.seed, "instance seed");
  auto* f_iters = exp->add_option("--iters", e_cfg.iterations, "update steps");
  auto* f_rho = exp->add_option("--rho", e_cfg.rho, "initial distribution");
  auto* f_algs = exp->add_option("--algorithms", e_algorithms, "comma list");
  std::string e_out_dir = ".";
  auto* f_out = exp->add_option("--out-dir", e_out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (gen->parsed()) return cmd_gen(g_states, g_actions, g_gamma, g_seed, g_out, g_name);
    if (solve->parsed()) {
      return cmd_solve(s_mdp, s_rho, s_tie, s_eta, s_lambda, s_policy_out, s_relaxed);
    }
    if (run->parsed()) {
      return cmd_run(r_mdp, r_alg, r_eta, r_coeff, r_offset, r_l, r_p, r_iters,
                     r_lambda, r_delta, r_tie_seed, r_rho, r_out, r_policy_out,
                     r_bound_cols, r_bound_lambda, r_relaxed);
    }
    if (bounds->parsed()) {
      return cmd_bounds(b_mdp, b_trace, b_envelopes, b_lambda, b_lambda_b, b_out);
    }
    if (exp->parsed()) {
      std::vector<std::string> set_flags;
      if (!f_states->empty()) set_flags.push_back("states");
      if (!f_actions->empty()) set_flags.push_back("actions");
      if (!f_gamma->empty()) set_flags.push_back("gamma");
      if (!f_seed->empty()) set_flags.push_back("seed");
      if (!f_iters->empty()) set_flags.push_back("iters");
      if (!f_rho->empty()) set_flags.push_back("rho");
      if (!f_algs->empty()) {
        set_flags.push_back("algorithms");
        e_cfg.algorithms.clear();
        std::istringstream in(e_algorithms);
        std::string item;
        while (std::getline(in, item, ',')) e_cfg.algorithms.push_back(item);
      }
      if (!f_out->empty()) {
        set_flags.push_back("out-dir");
        e_cfg.out_dir = e_out_dir;
      }
      return cmd_experiment(e_config, e_cfg, set_flags);
    }
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitUsage;
}
