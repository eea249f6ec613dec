#include "experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "npglab/io.hpp"
#include "npglab/solver.hpp"
#include "svg_chart.hpp"

namespace npglab::cli {

InitialDist parse_rho(const std::string& desc, int n_states) {
  if (desc == "uniform" || desc.empty()) return uniform_dist(n_states);
  if (desc.rfind("delta:", 0) == 0) {
    const int s = std::stoi(desc.substr(6));
    if (s < 0 || s >= n_states) {
      throw std::invalid_argument("rho: state index out of range in \"" + desc + "\"");
    }
    return delta_dist(n_states, s);
  }
  throw std::invalid_argument("rho: expected \"uniform\" or \"delta:<state>\", got \"" +
                              desc + "\"");
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const auto not_space = line.find_first_not_of(" \t\r");
    if (not_space == std::string::npos) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError("config: expected key = value", "line", lineno);
    }
    auto strip = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      if (a == std::string::npos) return std::string();
      const auto b = s.find_last_not_of(" \t\r");
      return s.substr(a, b - a + 1);
    };
    const std::string key = strip(line.substr(0, eq));
    const std::string value = strip(line.substr(eq + 1));
    try {
      if (key == "n_states") {
        cfg.n_states = std::stoi(value);
      } else if (key == "n_actions") {
        cfg.n_actions = std::stoi(value);
      } else if (key == "gamma") {
        cfg.gamma = std::stod(value);
      } else if (key == "seed") {
        cfg.seed = std::stoull(value);
      } else if (key == "iterations") {
        cfg.iterations = std::stol(value);
      } else if (key == "rho") {
        cfg.rho = value;
      } else if (key == "algorithms") {
        cfg.algorithms.clear();
        std::istringstream algs(value);
        std::string item;
        while (std::getline(algs, item, ',')) {
          const auto a = item.find_first_not_of(" \t");
          const auto b = item.find_last_not_of(" \t");
          if (a != std::string::npos) cfg.algorithms.push_back(item.substr(a, b - a + 1));
        }
      } else if (key == "npgc_eta") {
        cfg.npgc_eta = std::stod(value);
      } else if (key == "npgi_coeff") {
        cfg.npgi_coeff = std::stod(value);
      } else if (key == "npgi_offset") {
        cfg.npgi_offset = std::stoi(value);
      } else if (key == "npga_L") {
        cfg.npga_l = std::stod(value);
      } else if (key == "npgai_L") {
        cfg.npgai_l = std::stod(value);
      } else if (key == "npgai_offset") {
        cfg.npgai_offset = std::stoi(value);
      } else if (key == "out_dir") {
        cfg.out_dir = value;
      } else {
        throw ParseError("config: unknown key \"" + key + "\"", key, lineno);
      }
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception&) {
      throw ParseError("config: bad value for key \"" + key + "\"", key, lineno);
    }
  }
  if (cfg.n_states < 1 || cfg.n_actions < 1) {
    throw ParseError("config: dimensions must be positive", "n_states");
  }
  if (!(cfg.gamma > 0.0 && cfg.gamma < 1.0)) {
    throw ParseError("config: gamma must lie in (0,1)", "gamma");
  }
  if (cfg.iterations < 0) {
    throw ParseError("config: iterations must be >= 0", "iterations");
  }
  return cfg;
}

RunTrace run_algorithm(const Mdp& mdp, const std::string& algorithm,
                       const AlgorithmParams& params, long iterations,
                       const InitialDist& rho) {
  const double log_na = std::log(static_cast<double>(mdp.n_actions));
  const double neg_log_gamma = -std::log(mdp.discount);
  if (algorithm == "pg") {
    return run_softmax_pg(mdp, iterations, rho);
  }
  if (algorithm == "npg-c") {
    return run_npg_constant(mdp, params.eta > 0.0 ? params.eta : log_na, iterations,
                            rho);
  }
  if (algorithm == "npg-i") {
    const double coeff = params.coeff > 0.0 ? params.coeff : neg_log_gamma;
    return run_npg_increasing(mdp, IncreasingEta{coeff, params.offset}, iterations, rho);
  }
  if (algorithm == "npg-a") {
    const double l = params.l > 0.0 ? params.l : neg_log_gamma;
    return run_npg_adaptive(mdp, LSchedule{ConstantL{l}}, iterations, rho);
  }
  if (algorithm == "npg-ai") {
    const double l = params.l > 0.0 ? params.l : neg_log_gamma;
    return run_npg_adaptive(mdp, LSchedule{LinearL{l, params.offset}}, iterations, rho);
  }
  if (algorithm == "npg-ag") {
    const double l = params.l > 0.0 ? params.l : neg_log_gamma;
    return run_npg_adaptive(mdp, LSchedule{GeometricL{l, params.p}}, iterations, rho);
  }
  if (algorithm == "terminated") {
    const double eta = params.eta > 0.0 ? params.eta : log_na;
    double delta = params.delta;
    if (delta == kInf) delta = solve_optimal(mdp).gap_delta;
    TerminatedResult res = run_terminated_npg(mdp, eta, delta, params.lambda, rho,
                                              {params.tie_seed});
    return std::move(res.trace);
  }
  throw std::invalid_argument("unknown algorithm id \"" + algorithm + "\"");
}

namespace {

int thread_cap() {
  if (const char* env = std::getenv("NPGLAB_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 2 : static_cast<int>(hw);
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
  ExperimentResult result;
  result.mdp = random_mdp({config.seed}, config.n_states, config.n_actions, config.gamma);
  const InitialDist rho = parse_rho(config.rho, config.n_states);

  result.traces.resize(config.algorithms.size());
  const int cap = std::max(1, std::min<int>(thread_cap(),
                                            static_cast<int>(config.algorithms.size())));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= config.algorithms.size()) return;
      try {
        AlgorithmParams params;
        const std::string& alg = config.algorithms[i];
        if (alg == "npg-c") params.eta = config.npgc_eta;
        if (alg == "npg-i") {
          params.coeff = config.npgi_coeff;
          params.offset = config.npgi_offset;
        }
        if (alg == "npg-a") params.l = config.npga_l;
        if (alg == "npg-ai") {
          params.l = config.npgai_l;
          params.offset = config.npgai_offset;
        }
        result.traces[i] =
            run_algorithm(result.mdp, alg, params, config.iterations, rho);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(cap);
  for (int i = 0; i < cap; ++i) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return result;
}

std::string experiment_csv(const ExperimentConfig& config, const ExperimentResult& result) {
  std::ostringstream os;
  os << "# npglab-experiment v1\n";
  os << "# generator = " << kGeneratorId << "\n";
  os << "# seed = " << config.seed << "\n";
  os << "# n_states = " << config.n_states << "\n";
  os << "# n_actions = " << config.n_actions << "\n";
  os << "# gamma = " << format_double(config.gamma) << "\n";
  os << "# iters = " << config.iterations << "\n";
  os << "# rho = " << config.rho << "\n";
  os << "# mdp_hash = ";
  {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(content_hash(result.mdp)));
    os << buf << "\n";
  }
  for (const RunTrace& trace : result.traces) {
    os << "# alg " << trace.algorithm << ": " << describe(trace.schedule) << "\n";
  }
  os << "algorithm,iter,eta,value,error,scaled_error,subopt_mass\n";
  for (const RunTrace& trace : result.traces) {
    for (const TraceRecord& rec : trace.records) {
      os << trace.algorithm << ',' << rec.iter << ','
         << (std::isnan(rec.eta_used) ? std::string() : format_double(rec.eta_used))
         << ',' << format_double(rec.value_rho) << ',' << format_double(rec.error)
         << ',' << format_double(rec.scaled_error) << ','
         << format_double(rec.subopt_mass) << "\n";
    }
  }
  return os.str();
}

std::string experiment_svg(const ExperimentResult& result, double y_floor) {
  std::vector<ChartSeries> series;
  series.reserve(result.traces.size());
  for (const RunTrace& trace : result.traces) {
    ChartSeries s;
    s.label = trace.algorithm;
    for (const TraceRecord& rec : trace.records) {
      s.points.emplace_back(static_cast<double>(rec.iter), rec.scaled_error);
    }
    series.push_back(std::move(s));
  }
  std::ostringstream title;
  title << "Scaled error vs iteration (" << result.mdp.n_states << " states, "
        << result.mdp.n_actions << " actions)";
  return render_log_line_chart(title.str(), "iteration", "|S| * (V*(rho) - V(rho))",
                               series, y_floor);
}

RunTrace reconstruct_run(const Mdp& mdp, const CsvTrace& csv) {
  const std::string algorithm = csv.meta_at("algorithm");
  const std::string kind = csv.meta_at("schedule_kind");
  const long iters = std::stol(csv.meta_at("iters"));
  const InitialDist rho = parse_rho(csv.meta_at("rho"), mdp.n_states);

  AlgorithmParams params;
  if (kind == "constant-eta") {
    params.eta = std::stod(csv.meta_at("eta"));
  } else if (kind == "increasing-eta") {
    params.coeff = std::stod(csv.meta_at("coeff"));
    params.offset = std::stoi(csv.meta_at("offset"));
  } else if (kind == "adaptive-constant") {
    params.l = std::stod(csv.meta_at("L"));
  } else if (kind == "adaptive-linear") {
    params.l = std::stod(csv.meta_at("L"));
    params.offset = std::stoi(csv.meta_at("offset"));
  } else if (kind == "adaptive-geometric") {
    params.l = std::stod(csv.meta_at("L"));
    params.p = std::stod(csv.meta_at("p"));
  } else {
    throw ParseError("trace: unknown schedule_kind \"" + kind + "\"", "schedule_kind");
  }

  std::string run_as = algorithm;
  if (algorithm == "terminated") run_as = "npg-c";  // same iterate sequence
  RunTrace trace = run_algorithm(mdp, run_as, params, iters, rho);
  trace.algorithm = algorithm;

  if (csv.rows.size() != trace.records.size()) {
    throw std::invalid_argument(
        "trace rows do not match the reconstructed run (corrupted iters?)");
  }
  // Judge the file as written: recorded errors win over recomputed ones.
  for (std::size_t i = 0; i < csv.rows.size(); ++i) {
    if (csv.rows[i].iter != trace.records[i].iter) {
      throw std::invalid_argument("trace rows are not contiguous in iter");
    }
    trace.records[i].value_rho = csv.rows[i].value;
    trace.records[i].error = csv.rows[i].error;
    trace.records[i].scaled_error = csv.rows[i].scaled_error;
    trace.records[i].subopt_mass = csv.rows[i].subopt_mass;
  }
  return trace;
}

}  // namespace npglab::cli
