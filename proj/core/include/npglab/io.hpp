#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "npglab/mdp.hpp"

namespace npglab {

/// Raised on malformed documents; carries the offending field or, for
/// low-level syntax errors, the 1-based line.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string message, std::string field, int line = -1)
      : std::runtime_error(std::move(message)), field_(std::move(field)), line_(line) {}

  const std::string& field() const { return field_; }
  int line() const { return line_; }

 private:
  std::string field_;
  int line_;
};

// MDP and policy documents are JSON objects. Numbers are written as decimal
// with 17 significant digits so parse(serialize(x)) is value-exact for every
// finite entry. Policies are stored as probabilities; a probability of 0
// deserializes to a -inf log-probability.

std::string to_document(const Mdp& mdp);
std::string to_document(const Policy& policy);

Mdp mdp_from_document(const std::string& text);
Policy policy_from_document(const std::string& text);

void save_mdp(const Mdp& mdp, const std::string& path);
void save_policy(const Policy& policy, const std::string& path);
Mdp load_mdp(const std::string& path);
Policy load_policy(const std::string& path);

/// FNV-1a hash of the canonical serialized form, used to tie trace files to
/// the instance they were produced from.
std::uint64_t content_hash(const Mdp& mdp);

/// Shortest decimal form that round-trips, padded to 17 significant digits.
std::string format_double(double v);

}  // namespace npglab
