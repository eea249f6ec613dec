#include "npglab/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace npglab {

using nlohmann::json;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

void append_array(std::ostream& os, const std::vector<double>& values) {
  os << '[';
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) os << ',';
    os << format_double(values[i]);
  }
  os << ']';
}

int line_of_offset(const std::string& text, std::size_t byte) {
  int line = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') ++line;
  }
  return line;
}

json parse_json(const std::string& text, const char* doc_kind) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    const int line = line_of_offset(text, e.byte);
    std::ostringstream msg;
    msg << doc_kind << ": malformed document at line " << line << ": " << e.what();
    throw ParseError(msg.str(), "", line);
  }
}

const json& field(const json& j, const char* name, const char* doc_kind) {
  auto it = j.find(name);
  if (it == j.end()) {
    throw ParseError(std::string(doc_kind) + ": missing field \"" + name + "\"", name);
  }
  return *it;
}

int int_field(const json& j, const char* name, const char* doc_kind) {
  const json& f = field(j, name, doc_kind);
  if (!f.is_number_integer()) {
    throw ParseError(std::string(doc_kind) + ": field \"" + name + "\" must be an integer",
                     name);
  }
  return f.get<int>();
}

double num_field(const json& j, const char* name, const char* doc_kind) {
  const json& f = field(j, name, doc_kind);
  if (!f.is_number()) {
    throw ParseError(std::string(doc_kind) + ": field \"" + name + "\" must be a number",
                     name);
  }
  return f.get<double>();
}

std::vector<double> array_field(const json& j, const char* name, std::size_t expected,
                                const char* doc_kind) {
  const json& f = field(j, name, doc_kind);
  if (!f.is_array()) {
    throw ParseError(std::string(doc_kind) + ": field \"" + name + "\" must be an array",
                     name);
  }
  if (f.size() != expected) {
    std::ostringstream msg;
    msg << doc_kind << ": field \"" << name << "\" has " << f.size()
        << " entries, expected " << expected;
    throw ParseError(msg.str(), name);
  }
  std::vector<double> out;
  out.reserve(expected);
  for (const auto& e : f) {
    if (!e.is_number()) {
      throw ParseError(std::string(doc_kind) + ": field \"" + name +
                           "\" has a non-numeric entry",
                       name);
    }
    out.push_back(e.get<double>());
  }
  return out;
}

std::string quote(const std::string& s) { return json(s).dump(); }

}  // namespace

std::string to_document(const Mdp& mdp) {
  std::ostringstream os;
  os << "{\n";
  if (!mdp.name.empty()) os << "  \"name\": " << quote(mdp.name) << ",\n";
  os << "  \"n_states\": " << mdp.n_states << ",\n";
  os << "  \"n_actions\": " << mdp.n_actions << ",\n";
  os << "  \"discount\": " << format_double(mdp.discount) << ",\n";
  os << "  \"reward\": ";
  append_array(os, mdp.reward);
  os << ",\n  \"transition\": ";
  append_array(os, mdp.transition);
  if (mdp.seed_metadata) {
    os << ",\n  \"seed_metadata\": {\"generator\": " << quote(mdp.seed_metadata->generator)
       << ", \"seed\": " << mdp.seed_metadata->seed << "}";
  }
  os << "\n}\n";
  return os.str();
}

std::string to_document(const Policy& policy) {
  std::ostringstream os;
  os << "{\n";
  os << "  \"n_states\": " << policy.n_states << ",\n";
  os << "  \"n_actions\": " << policy.n_actions << ",\n";
  os << "  \"prob\": [";
  for (std::size_t i = 0; i < policy.log_prob.size(); ++i) {
    if (i) os << ',';
    os << format_double(std::exp(policy.log_prob[i]));
  }
  os << "]\n}\n";
  return os.str();
}

Mdp mdp_from_document(const std::string& text) {
  const json j = parse_json(text, "mdp");
  Mdp mdp;
  mdp.n_states = int_field(j, "n_states", "mdp");
  mdp.n_actions = int_field(j, "n_actions", "mdp");
  if (mdp.n_states < 1 || mdp.n_actions < 1) {
    throw ParseError("mdp: dimensions must be positive", "n_states");
  }
  mdp.discount = num_field(j, "discount", "mdp");
  const std::size_t sa = static_cast<std::size_t>(mdp.n_states) * mdp.n_actions;
  mdp.reward = array_field(j, "reward", sa, "mdp");
  mdp.transition = array_field(j, "transition", sa * mdp.n_states, "mdp");
  if (auto it = j.find("name"); it != j.end() && it->is_string()) {
    mdp.name = it->get<std::string>();
  }
  if (auto it = j.find("seed_metadata"); it != j.end() && it->is_object()) {
    SeedMetadata meta;
    if (auto g = it->find("generator"); g != it->end() && g->is_string()) {
      meta.generator = g->get<std::string>();
    }
    if (auto s = it->find("seed"); s != it->end() && s->is_number()) {
      meta.seed = s->get<std::uint64_t>();
    }
    mdp.seed_metadata = meta;
  }
  return mdp;
}

Policy policy_from_document(const std::string& text) {
  const json j = parse_json(text, "policy");
  Policy pi;
  pi.n_states = int_field(j, "n_states", "policy");
  pi.n_actions = int_field(j, "n_actions", "policy");
  if (pi.n_states < 1 || pi.n_actions < 1) {
    throw ParseError("policy: dimensions must be positive", "n_states");
  }
  const std::size_t sa = static_cast<std::size_t>(pi.n_states) * pi.n_actions;
  const std::vector<double> prob = array_field(j, "prob", sa, "policy");
  pi.log_prob.resize(sa);
  for (std::size_t i = 0; i < sa; ++i) {
    if (prob[i] < 0.0) {
      throw ParseError("policy: negative probability entry", "prob");
    }
    pi.log_prob[i] = prob[i] == 0.0 ? -std::numeric_limits<double>::infinity()
                                    : std::log(prob[i]);
  }
  if (max_row_normalization_defect(pi) > kPolicyRowTol) {
    throw ParseError("policy: rows must be probability distributions", "prob");
  }
  return pi;
}

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file for reading: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open file for writing: " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace

void save_mdp(const Mdp& mdp, const std::string& path) { write_file(path, to_document(mdp)); }
void save_policy(const Policy& policy, const std::string& path) {
  write_file(path, to_document(policy));
}
Mdp load_mdp(const std::string& path) { return mdp_from_document(read_file(path)); }
Policy load_policy(const std::string& path) {
  return policy_from_document(read_file(path));
}

std::uint64_t content_hash(const Mdp& mdp) {
  // FNV-1a over the canonical document, so formatting differences between
  // files describing the same instance do not break provenance checks.
  Mdp canonical = mdp;
  canonical.name.clear();
  canonical.seed_metadata.reset();
  const std::string doc = to_document(canonical);
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : doc) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace npglab
