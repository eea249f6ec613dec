#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "npglab/algorithms.hpp"
#include "npglab/bounds.hpp"

namespace npglab::cli {

/// File-level failures (open/write); parse problems raise npglab::ParseError.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

/**
 * Trace CSV layout: a '# key = value' metadata block sufficient to reproduce
 * the run bit-exactly, a header row, then one row per iteration with columns
 * algorithm,iter,eta,value,error,scaled_error,subopt_mass and optional
 * trailing bound_* columns. Floats carry 17 significant digits; missing
 * values (the final row's eta, bounds outside their domain) are empty cells.
 */
std::string trace_to_csv(const RunTrace& trace,
                         const std::vector<EnvelopeCert>& bound_columns = {});

struct CsvTraceRow {
  std::string algorithm;
  long iter = 0;
  double eta = 0.0;
  double value = 0.0;
  double error = 0.0;
  double scaled_error = 0.0;
  double subopt_mass = 0.0;
};

struct CsvTrace {
  std::map<std::string, std::string> meta;
  std::vector<CsvTraceRow> rows;

  const std::string& meta_at(const std::string& key) const;
  bool has_meta(const std::string& key) const { return meta.count(key) != 0; }
};

CsvTrace trace_from_csv(const std::string& text);

/// Certification table: envelope,iter,empirical,bound,ok,kind.
std::string cert_to_csv(const CertReport& report);

}  // namespace npglab::cli
