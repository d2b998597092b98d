#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sojourn/descriptors.hpp"
#include "sojourn/problem.hpp"

namespace sojourn {

// ---------------------------------------------------------------------------
// Scalar formulas
// ---------------------------------------------------------------------------

/// Standard normal tail Psi(z) = 1 - Phi(z). Evaluated in extended precision;
/// relative accuracy 1e-12 wherever the result is a normal double.
double normal_tail(double z);

/// Standard normal CDF.
double normal_cdf(double z);

/// Exact infinite-horizon law for drifted Brownian motion:
/// P{ \int_0^inf 1(B(t) - c t > u) dt > x }
///   = [ 2(1 + c^2 x) Psi(c sqrt(x)) - c sqrt(2x/pi) e^{-c^2 x / 2} ] e^{-2 c u}.
double brownian_sojourn_tail_exact(double c, double u, double x);

/// Unique positive root of psi(alpha) = c * alpha for a strictly convex
/// Laplace exponent with psi'(0+) < c.
double levy_alpha(const LevyExponent& exponent, double c);

/// e^{-alpha u} * base_tail_at_zero.
double levy_factorized_tail(double alpha, double u, double base_tail_at_zero);

// Closed-form constants.
double zero_process_power_constant(double gamma, double beta, double x);  // e^{-gamma x^beta}
double zero_process_halfline_constant(double gamma, double beta, double x, double y);
double hat_b2_constant(double gamma, double x);  // sqrt((1+g)/g) e^{-(1+g)x^2/4}
double brownian_sojourn_constant(double x);      // (2+x) Psi(sqrt(x/2)) - sqrt(x/pi) e^{-x/4}

/// Variant-dispatch view of the closed-form constants (CLI-facing).
struct SpecialConstantSpec {
  enum class Kind { zero_power, zero_halfline, hat_b2, berman_b1 };
  Kind kind = Kind::zero_power;
  double gamma = 1.0;
  double beta = 1.0;
  double x = 0.0;
  double y = 0.0;  // half-line endpoint
};
double special_constant(const SpecialConstantSpec& spec);

/// (1/beta) * \int_{y1}^{y2} |t|^{1/beta - 1} e^{-|t|} dt, absolute accuracy
/// 1e-10; the endpoint singularity is removed by the substitution s = |t|^{1/beta}.
double theta_integral(double beta, double y1, double y2);

/// Numeric inverse of a strictly increasing descriptor on [lo, hi]; exact
/// closed form for pure powers.
double asymptotic_inverse(const RvFunction& f, double y, double lo, double hi);

/// Inverse with automatic bracket expansion (internal helper, exposed for tests).
double inverse_auto(const RvFunction& f, double y);

// ---------------------------------------------------------------------------
// Geometry
// ---------------------------------------------------------------------------

struct InfiniteHorizonGeometry {
  double t_star = 0.0;   // critical time of the scaled problem
  double A = 0.0;        // variance expansion level constant
  double B = 0.0;        // variance expansion curvature constant
  double m_u = 0.0;      // M(u) = inf_t u(1+ct)/sigma(ut)
  double t_u = 0.0;      // argmin
  double v_u = 0.0;      // canonical scaling v(u) from the model geometry
  double phi = 0.0;      // lim sigma^2(u)/u in [0, inf]
  double a_u = 0.0;      // passage-time scale sigma(u t*)/c * sqrt(a_inf/(1-a_inf))
  bool objective_multimodal = false;
};
InfiniteHorizonGeometry infinite_horizon_geometry(const RvFunction& sigma2, double c, double u);

enum class FiniteHorizonCase {
  time_negligible,      // t = o(sigma^2(t)) at 0
  balanced,             // sigma^2(t) ~ theta t
  variance_negligible,  // sigma^2(t) = o(t)
};

struct FiniteHorizonGeometry {
  double m_u = 0.0;  // (u + cT)/sigma(T)
  double v_u = 0.0;
  double sigma_T = 0.0;
  double sigma_dot_T = 0.0;
  FiniteHorizonCase regime_case = FiniteHorizonCase::balanced;
  double theta = 0.0;  // meaningful in the balanced case
};
FiniteHorizonGeometry finite_horizon_geometry(const RvFunction& sigma2, double c, double horizon,
                                              double u);

struct SelfSimilarGeometry {
  double a_hat = 0.0;
  double b_hat = 0.0;
  double t0 = 0.0;     // H/(c(1-H))
  double gamma = 0.0;  // lim t^2/rho(t); NaN when the descriptor does not declare it
};
SelfSimilarGeometry self_similar_geometry(double hurst, double c,
                                          const RvFunction* rho = nullptr);

// ---------------------------------------------------------------------------
// Theorem dispatch
// ---------------------------------------------------------------------------

/// A constant estimate supplied from the Monte Carlo estimator.
struct ConstantValue {
  double value = 0.0;
  double se = 0.0;
  std::string provenance = "estimated";
};
using BermanValues = std::map<std::string, ConstantValue>;

struct BermanInput {
  std::string key;
  double value = 0.0;
  std::string provenance;
};

struct AsymptoticResult {
  double value = 0.0;
  double constant_factor = 0.0;
  double algebraic_factor = 0.0;
  double gauss_tail_factor = 0.0;
  std::string regime;
  std::vector<BermanInput> berman_inputs;
};

/// Evaluates the matching asymptotic formula for the problem. Constants
/// without closed form must be present in `supplied` under their canonical
/// key; otherwise a missing_constant_error names what to estimate.
AsymptoticResult evaluate_asymptotic(const SojournProblem& problem,
                                     const BermanValues* supplied = nullptr);

/// The scaling v(u) for this problem (explicit value or the canonical rule).
double resolve_scaling(const SojournProblem& problem);

// Canonical keys for non-closed-form constants.
std::string pickands_key(double alpha, double x);        // S-normalized limit constant of B_alpha
std::string drifted_b1_key(double gamma, double x);      // B_1 with drift field gamma*|t|, half-line limit
std::string xphi_key(const std::string& label, double x);

// ---------------------------------------------------------------------------
// Passage-time limit laws
// ---------------------------------------------------------------------------

struct ConstantEstimate {
  double value = 0.0;
  double se = 0.0;
};

struct PassageLawPoint {
  double probability = 0.0;  // CDF value (infinite horizon) or survival (finite horizon)
  double atom_mass = 0.0;
  double ratio = 0.0;
  bool inconsistency_warning = false;
};

/// Infinite-horizon law: P{N <= y} = (B(x2)/B(x1)) Phi(y), atom at +inf of
/// mass 1 - ratio. Warns when the ratio exceeds 1 beyond 3 combined standard
/// errors (the constant must be nonincreasing in x).
PassageLawPoint passage_law_infinite(const ConstantEstimate& b_x1, const ConstantEstimate& b_x2,
                                     double y);

/// Finite-horizon law: survival Gamma * e^{-y} for y >= 0, atom at -inf of
/// mass 1 - Gamma.
PassageLawPoint passage_law_finite(const ConstantEstimate& gamma_ratio, double y);

/// The closed-form Gamma of the variance-negligible case: e^{(sigma_dot/sigma)(x1-x2)}.
double finite_passage_ratio_closed(double sigma_dot_over_sigma, double x1, double x2);

// ---------------------------------------------------------------------------
// Regularly varying tail integral, numeric vs asymptotic
// ---------------------------------------------------------------------------

struct RvTailIntegral {
  double numeric = 0.0;
  double asymptotic = 0.0;
};

/// numeric  = \int_0^{g a2} exp(-c1 n^2 w(t)) dt
/// asymptotic = c1^{-1/beta} w<-(n^{-2}) theta_integral(beta, 0, c1 y2),
/// with y2 = n^2 w(g a2) (infinite when g a2 is).
RvTailIntegral rv_tail_integral(double c1, const RvFunction& w, double n, double g, double a2);

}  // namespace sojourn
