#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <variant>

namespace npglab {

/// Fixed step size eta.
struct ConstantEta {
  double eta = 0.0;
};

/// eta_k = coeff * (k + offset). With offset 0 the first update is the
/// identity, so offset defaults to 1; pass 0 for the literal schedule.
struct IncreasingEta {
  double coeff = 0.0;
  int offset = 1;

  double eta_at(long k) const { return coeff * static_cast<double>(k + offset); }
};

/// L_k = l for all k.
struct ConstantL {
  double l = 0.0;
};

/// L_k = l * (k + offset). Offset defaults to 1 so the first step is not
/// weaker than the constant schedule with the same l; pass 0 for the literal
/// L_k = l*k.
struct LinearL {
  double l = 0.0;
  int offset = 1;
};

/// L_k = l * p^k with p in (1,2].
struct GeometricL {
  double l = 0.0;
  double p = 2.0;
};

using LSchedule = std::variant<ConstantL, LinearL, GeometricL>;

/// Adaptive step-size selection driven by an L schedule.
struct AdaptiveL {
  LSchedule l;
};

using StepSchedule = std::variant<ConstantEta, IncreasingEta, AdaptiveL>;

inline double l_at(const LSchedule& sched, long k) {
  if (const auto* c = std::get_if<ConstantL>(&sched)) return c->l;
  if (const auto* lin = std::get_if<LinearL>(&sched)) {
    return lin->l * static_cast<double>(k + lin->offset);
  }
  const auto& g = std::get<GeometricL>(sched);
  return g.l * std::pow(g.p, static_cast<double>(k));
}

inline void validate_schedule(const ConstantEta& s) {
  if (!(s.eta > 0.0) || !std::isfinite(s.eta)) {
    throw std::invalid_argument("step size eta must be positive and finite");
  }
}

inline void validate_schedule(const IncreasingEta& s) {
  if (!(s.coeff > 0.0) || !std::isfinite(s.coeff)) {
    throw std::invalid_argument("increasing schedule coefficient must be positive");
  }
  if (s.offset < 0) throw std::invalid_argument("schedule offset must be >= 0");
}

inline void validate_schedule(const LSchedule& sched) {
  if (const auto* c = std::get_if<ConstantL>(&sched)) {
    if (!(c->l > 0.0)) throw std::invalid_argument("L must be positive");
    return;
  }
  if (const auto* lin = std::get_if<LinearL>(&sched)) {
    if (!(lin->l > 0.0)) throw std::invalid_argument("L must be positive");
    if (lin->offset < 0) throw std::invalid_argument("schedule offset must be >= 0");
    return;
  }
  const auto& g = std::get<GeometricL>(sched);
  if (!(g.l > 0.0)) throw std::invalid_argument("L must be positive");
  if (!(g.p > 1.0 && g.p <= 2.0)) {
    throw std::invalid_argument("geometric schedule order p must lie in (1,2]");
  }
}

std::string describe(const StepSchedule& sched);

}  // namespace npglab
