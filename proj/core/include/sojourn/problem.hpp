#pragma once

#include "sojourn/process.hpp"
#include "sojourn/sojourn.hpp"

namespace sojourn {

/// How the scaling v(u) multiplying the sojourn integral is chosen: an
/// explicit value, or the model-and-horizon specific rule resolved by the
/// asymptotics module.
struct ScalingRule {
  enum class Kind { canonical, explicit_value };
  Kind kind = Kind::canonical;
  double v = 1.0;

  static ScalingRule canonical() { return {}; }
  static ScalingRule explicit_v(double v) {
    if (!(v > 0.0)) throw std::invalid_argument("ScalingRule: v must be positive");
    return {Kind::explicit_value, v};
  }
};

/// Fully specifies a tail probability P{ v(u) * \int_0^T 1(X(t) - c t > u) dt > x }.
struct SojournProblem {
  ProcessModel model;
  double c = 0.0;
  double u = 0.0;
  double x = 0.0;
  double horizon = kInfinity;  // finite T or infinity
  ScalingRule scaling;
};

// The degenerate level checks (u very negative certain events) are legal for
// the Monte Carlo engine; the asymptotic formulas enforce u > 0 themselves.
inline void validate(const SojournProblem& p) {
  if (p.x < 0.0) throw std::invalid_argument("SojournProblem: x must be >= 0");
  if (!(p.horizon > 0.0)) throw std::invalid_argument("SojournProblem: horizon must be positive");
  if (std::isinf(p.horizon) && !(p.c > 0.0))
    throw std::invalid_argument("SojournProblem: infinite horizon requires c > 0");
}

}  // namespace sojourn
