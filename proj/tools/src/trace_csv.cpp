#include "trace_csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "npglab/io.hpp"

namespace npglab::cli {

namespace {

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string cell(double v) { return std::isnan(v) ? std::string() : format_double(v); }

void append_schedule_meta(std::ostringstream& os, const StepSchedule& sched) {
  if (const auto* c = std::get_if<ConstantEta>(&sched)) {
    os << "# schedule_kind = constant-eta\n";
    os << "# eta = " << format_double(c->eta) << "\n";
  } else if (const auto* inc = std::get_if<IncreasingEta>(&sched)) {
    os << "# schedule_kind = increasing-eta\n";
    os << "# coeff = " << format_double(inc->coeff) << "\n";
    os << "# offset = " << inc->offset << "\n";
  } else {
    const auto& ad = std::get<AdaptiveL>(sched);
    if (const auto* cl = std::get_if<ConstantL>(&ad.l)) {
      os << "# schedule_kind = adaptive-constant\n";
      os << "# L = " << format_double(cl->l) << "\n";
    } else if (const auto* ll = std::get_if<LinearL>(&ad.l)) {
      os << "# schedule_kind = adaptive-linear\n";
      os << "# L = " << format_double(ll->l) << "\n";
      os << "# offset = " << ll->offset << "\n";
    } else {
      const auto& g = std::get<GeometricL>(ad.l);
      os << "# schedule_kind = adaptive-geometric\n";
      os << "# L = " << format_double(g.l) << "\n";
      os << "# p = " << format_double(g.p) << "\n";
    }
  }
}

}  // namespace

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file for reading: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open file for writing: " + path);
  out << text;
  out.flush();
  if (!out) throw IoError("write failed: " + path);
}

std::string trace_to_csv(const RunTrace& trace,
                         const std::vector<EnvelopeCert>& bound_columns) {
  std::ostringstream os;
  os << "# npglab-trace v1\n";
  os << "# algorithm = " << trace.algorithm << "\n";
  append_schedule_meta(os, trace.schedule);
  const TraceMetadata& meta = trace.mdp_metadata;
  if (meta.has_seed) {
    os << "# generator = " << meta.generator << "\n";
    os << "# seed = " << meta.seed << "\n";
  }
  os << "# n_states = " << meta.n_states << "\n";
  os << "# n_actions = " << meta.n_actions << "\n";
  os << "# gamma = " << format_double(meta.gamma) << "\n";
  os << "# rho = " << meta.rho_desc << "\n";
  os << "# mdp_hash = " << hex64(meta.mdp_hash) << "\n";
  os << "# iters = " << (trace.records.empty() ? 0 : trace.records.back().iter) << "\n";

  // Bound columns come from certification rows keyed by iteration.
  std::vector<std::map<long, double>> bound_by_iter(bound_columns.size());
  os << "algorithm,iter,eta,value,error,scaled_error,subopt_mass";
  for (std::size_t i = 0; i < bound_columns.size(); ++i) {
    std::string name = bound_columns[i].envelope;
    for (char& c : name) {
      if (c == '-') c = '_';
    }
    os << ",bound_" << name;
    for (const CertRow& row : bound_columns[i].rows) {
      bound_by_iter[i][row.iter] = row.bound;
    }
  }
  os << "\n";

  for (const TraceRecord& rec : trace.records) {
    os << trace.algorithm << ',' << rec.iter << ',' << cell(rec.eta_used) << ','
       << format_double(rec.value_rho) << ',' << format_double(rec.error) << ','
       << format_double(rec.scaled_error) << ',' << format_double(rec.subopt_mass);
    for (const auto& by_iter : bound_by_iter) {
      auto it = by_iter.find(rec.iter);
      os << ',' << (it == by_iter.end() ? std::string() : format_double(it->second));
    }
    os << "\n";
  }
  return os.str();
}

const std::string& CsvTrace::meta_at(const std::string& key) const {
  auto it = meta.find(key);
  if (it == meta.end()) {
    throw ParseError("trace: missing metadata key \"" + key + "\"", key);
  }
  return it->second;
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double parse_cell(const std::string& s, int line, const char* col) {
  if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("trace: bad numeric cell in column " + std::string(col), col, line);
  }
}

}  // namespace

CsvTrace trace_from_csv(const std::string& text) {
  CsvTrace out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  bool header_seen = false;
  std::vector<std::string> columns;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::size_t eq = line.find('=');
      if (eq != std::string::npos) {
        const std::string key = trim(line.substr(1, eq - 1));
        out.meta[key] = trim(line.substr(eq + 1));
      }
      continue;
    }
    if (!header_seen) {
      columns = split(line, ',');
      if (columns.size() < 7 || columns[0] != "algorithm" || columns[1] != "iter") {
        throw ParseError("trace: unexpected header row", "header", lineno);
      }
      header_seen = true;
      continue;
    }
    const std::vector<std::string> cells = split(line, ',');
    if (cells.size() < 7) {
      throw ParseError("trace: expected at least 7 cells", "row", lineno);
    }
    CsvTraceRow row;
    row.algorithm = cells[0];
    row.iter = static_cast<long>(parse_cell(cells[1], lineno, "iter"));
    row.eta = parse_cell(cells[2], lineno, "eta");
    row.value = parse_cell(cells[3], lineno, "value");
    row.error = parse_cell(cells[4], lineno, "error");
    row.scaled_error = parse_cell(cells[5], lineno, "scaled_error");
    row.subopt_mass = parse_cell(cells[6], lineno, "subopt_mass");
    out.rows.push_back(std::move(row));
  }
  if (!header_seen) throw ParseError("trace: no header row found", "header", lineno);
  return out;
}

std::string cert_to_csv(const CertReport& report) {
  std::ostringstream os;
  os << "envelope,iter,empirical,bound,ok,kind\n";
  for (const EnvelopeCert& env : report.envelopes) {
    for (const CertRow& row : env.rows) {
      os << env.envelope << ',' << row.iter << ',' << format_double(row.empirical)
         << ',' << format_double(row.bound) << ',' << (row.ok ? 1 : 0) << ','
         << env.kind << "\n";
    }
  }
  return os.str();
}

}  // namespace npglab::cli
