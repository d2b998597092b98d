#include "sojourn/asymptotics.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "sojourn/errors.hpp"
#include "sojourn/quadrature.hpp"

namespace sojourn {
namespace {

constexpr long double kSqrt2L = 1.414213562373095048801688724209698079L;
constexpr double kPi = 3.141592653589793238462643383279502884;

std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

double normal_tail(double z) {
  if (std::isnan(z)) throw std::invalid_argument("normal_tail: NaN input");
  return static_cast<double>(0.5L * erfcl(static_cast<long double>(z) / kSqrt2L));
}

double normal_cdf(double z) { return normal_tail(-z); }

double brownian_sojourn_tail_exact(double c, double u, double x) {
  if (!(c > 0.0)) throw std::invalid_argument("brownian_sojourn_tail_exact: c must be > 0");
  if (x < 0.0 || u < 0.0)
    throw std::invalid_argument("brownian_sojourn_tail_exact: u and x must be >= 0");
  const double sx = std::sqrt(x);
  const double bracket =
      2.0 * (1.0 + c * c * x) * normal_tail(c * sx) -
      c * std::sqrt(2.0 * x / kPi) * std::exp(-0.5 * c * c * x);
  return bracket * std::exp(-2.0 * c * u);
}

double levy_alpha(const LevyExponent& exponent, double c) {
  if (!exponent.psi) throw std::invalid_argument("levy_alpha: empty exponent");
  if (!(exponent.psi_prime_zero < c))
    throw no_solution_error("levy_alpha: requires psi'(0+) < c, no positive root exists");
  if (std::fabs(exponent.psi(0.0)) > 1e-9)
    throw std::invalid_argument("levy_alpha: psi(0) must be 0");

  const auto f = [&](double a) { return exponent.psi(a) - c * a; };

  // f(0) = 0, f'(0) < 0, f strictly convex: bracket the unique positive root.
  double lo = 1e-8;
  while (f(lo) >= 0.0 && lo > 1e-300) lo *= 0.25;
  double hi = std::max(1.0, 4.0 * lo);
  int expansions = 0;
  while (f(hi) <= 0.0) {
    hi *= 2.0;
    if (++expansions > 400)
      throw no_solution_error("levy_alpha: psi(a) - c a never becomes positive");
  }

  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (f(mid) < 0.0 ? lo : hi) = mid;
  }
  // secant polish inside the final bracket
  double a = 0.5 * (lo + hi);
  const double flo = f(lo), fhi = f(hi);
  if (fhi != flo) {
    const double sec = lo - flo * (hi - lo) / (fhi - flo);
    if (sec > 0.0 && std::isfinite(sec)) a = sec;
  }
  if (std::fabs(f(a)) > 1e-12 * std::max(1.0, c * a))
    throw numeric_error("levy_alpha: residual tolerance not met");
  return a;
}

double levy_factorized_tail(double alpha, double u, double base_tail_at_zero) {
  return std::exp(-alpha * u) * base_tail_at_zero;
}

double zero_process_power_constant(double gamma, double beta, double x) {
  if (!(gamma > 0.0) || !(beta > 0.0) || x < 0.0)
    throw std::invalid_argument("zero_process_power_constant: need gamma, beta > 0 and x >= 0");
  return std::exp(-gamma * std::pow(x, beta));
}

double zero_process_halfline_constant(double gamma, double beta, double x, double y) {
  if (!(gamma > 0.0) || !(beta > 0.0) || x < 0.0)
    throw std::invalid_argument("zero_process_halfline_constant: need gamma, beta > 0 and x >= 0");
  if (y < 0.5 * x) return std::exp(-gamma * std::pow(x - y, beta));
  return std::exp(-gamma * std::pow(2.0, -beta) * std::pow(x, beta));
}

double hat_b2_constant(double gamma, double x) {
  if (!(gamma > 0.0) || x < 0.0)
    throw std::invalid_argument("hat_b2_constant: need gamma > 0 and x >= 0");
  return std::sqrt((1.0 + gamma) / gamma) * std::exp(-0.25 * (1.0 + gamma) * x * x);
}

double brownian_sojourn_constant(double x) {
  if (x < 0.0) throw std::invalid_argument("brownian_sojourn_constant: x must be >= 0");
  return (2.0 + x) * normal_tail(std::sqrt(0.5 * x)) -
         std::sqrt(x / kPi) * std::exp(-0.25 * x);
}

double special_constant(const SpecialConstantSpec& s) {
  switch (s.kind) {
    case SpecialConstantSpec::Kind::zero_power:
      return zero_process_power_constant(s.gamma, s.beta, s.x);
    case SpecialConstantSpec::Kind::zero_halfline:
      return zero_process_halfline_constant(s.gamma, s.beta, s.x, s.y);
    case SpecialConstantSpec::Kind::hat_b2:
      return hat_b2_constant(s.gamma, s.x);
    case SpecialConstantSpec::Kind::berman_b1:
      return brownian_sojourn_constant(s.x);
  }
  throw std::invalid_argument("special_constant: unknown kind");
}

// ---------------------------------------------------------------------------
// theta_integral
// ---------------------------------------------------------------------------

namespace {

/// t beyond which t^{1/beta-1} e^{-t} integrates to < ~1e-19.
double tail_cutoff(double beta) {
  const double excess = std::max(0.0, 1.0 / beta - 1.0);
  double t = 46.0;
  for (int i = 0; i < 12; ++i) t = 46.0 + excess * std::log(t);
  return t;
}

/// (1/beta) int_lo^hi t^{1/beta-1} e^{-t} dt for 0 <= lo <= hi, via the
/// power substitution t = s^k. The exponent k = 3 max(1, beta) makes the
/// transformed integrand (k/beta) s^{k/beta-1} e^{-s^k} twice continuously
/// differentiable at the origin for every beta > 0, so the adaptive rule
/// converges at full speed.
double theta_half(double beta, double lo, double hi) {
  if (lo >= hi) return 0.0;
  const double cut = tail_cutoff(beta);
  const double top = std::min(hi, cut);
  if (top <= lo) return 0.0;
  const double k = 3.0 * std::max(1.0, beta);
  const double s_lo = std::pow(lo, 1.0 / k);
  const double s_hi = std::pow(top, 1.0 / k);
  const double expo = k / beta - 1.0;
  return integrate(
      [k, beta, expo](double s) {
        return k / beta * std::pow(s, expo) * std::exp(-std::pow(s, k));
      },
      s_lo, s_hi, 1e-11);
}

}  // namespace

double theta_integral(double beta, double y1, double y2) {
  if (!(beta > 0.0)) throw std::invalid_argument("theta_integral: beta must be > 0");
  if (std::isnan(y1) || std::isnan(y2) || y1 > y2)
    throw std::invalid_argument("theta_integral: need y1 <= y2");
  if (y1 == y2) return 0.0;
  if (y1 >= 0.0) return theta_half(beta, y1, y2);
  if (y2 <= 0.0) return theta_half(beta, -y2, -y1);
  return theta_half(beta, 0.0, -y1) + theta_half(beta, 0.0, y2);
}

// ---------------------------------------------------------------------------
// asymptotic inverse
// ---------------------------------------------------------------------------

double asymptotic_inverse(const RvFunction& f, double y, double lo, double hi) {
  if (const auto& p = f.as_power()) return std::pow(y / p->coeff, 1.0 / p->exponent);
  if (!(lo < hi)) throw std::invalid_argument("asymptotic_inverse: bad bracket");
  double flo = f(lo), fhi = f(hi);
  if (!(flo <= y && y <= fhi))
    throw bracket_error("asymptotic_inverse: bracket does not straddle the target value");
  double a = lo, b = hi;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (a + b);
    if (mid == a || mid == b) break;
    const double fm = f(mid);
    if (fm < y)
      a = mid;
    else
      b = mid;
  }
  const double t = 0.5 * (a + b);
  if (std::fabs(f(t) - y) > 1e-12 * std::max(1.0, std::fabs(y)))
    throw numeric_error("asymptotic_inverse: residual tolerance not met");
  return t;
}

double inverse_auto(const RvFunction& f, double y) {
  if (const auto& p = f.as_power()) return std::pow(y / p->coeff, 1.0 / p->exponent);
  double lo = 1.0, hi = 1.0;
  int guard = 0;
  while (f(lo) > y) {
    lo *= 0.25;
    if (++guard > 600) throw bracket_error("inverse_auto: lower bracket expansion failed");
  }
  guard = 0;
  while (f(hi) < y) {
    hi *= 4.0;
    if (++guard > 600) throw bracket_error("inverse_auto: upper bracket expansion failed");
  }
  return asymptotic_inverse(f, y, lo, hi);
}

// ---------------------------------------------------------------------------
// passage laws
// ---------------------------------------------------------------------------

PassageLawPoint passage_law_infinite(const ConstantEstimate& b_x1, const ConstantEstimate& b_x2,
                                     double y) {
  if (!(b_x1.value > 0.0)) throw std::invalid_argument("passage_law_infinite: B(x1) must be > 0");
  PassageLawPoint out;
  out.ratio = b_x2.value / b_x1.value;
  const double rel1 = b_x1.value > 0.0 ? b_x1.se / b_x1.value : 0.0;
  const double rel2 = b_x2.value > 0.0 ? b_x2.se / b_x2.value : 0.0;
  const double combined_se = out.ratio * std::sqrt(rel1 * rel1 + rel2 * rel2);
  out.inconsistency_warning = out.ratio > 1.0 + 3.0 * combined_se;
  out.probability = out.ratio * normal_cdf(y);
  out.atom_mass = 1.0 - out.ratio;
  return out;
}

PassageLawPoint passage_law_finite(const ConstantEstimate& gamma_ratio, double y) {
  PassageLawPoint out;
  out.ratio = gamma_ratio.value;
  out.inconsistency_warning = out.ratio > 1.0 + 3.0 * gamma_ratio.se;
  out.probability = y >= 0.0 ? out.ratio * std::exp(-y) : out.ratio;
  out.atom_mass = 1.0 - out.ratio;
  return out;
}

double finite_passage_ratio_closed(double sigma_dot_over_sigma, double x1, double x2) {
  if (x1 > x2) throw std::invalid_argument("finite_passage_ratio_closed: need x1 <= x2");
  return std::exp(sigma_dot_over_sigma * (x1 - x2));
}

// ---------------------------------------------------------------------------
// rv tail integral
// ---------------------------------------------------------------------------

RvTailIntegral rv_tail_integral(double c1, const RvFunction& w, double n, double g, double a2) {
  if (!(c1 > 0.0) || !(n > 0.0) || !(g > 0.0) || a2 < 0.0)
    throw std::invalid_argument("rv_tail_integral: need c1, n, g > 0 and a2 >= 0");
  const double beta = w.index_at_zero();
  const double upper = g * a2;

  RvTailIntegral out;
  if (upper == 0.0) return out;

  const double scale = c1 * n * n;
  const double t_cut = inverse_auto(w, 60.0 / scale);
  const double top = std::min(upper, t_cut);
  out.numeric = integrate([&](double t) { return std::exp(-scale * w(t)); }, 0.0, top,
                          1e-9 * std::max(top, 1e-12));

  const double y2 = std::isinf(upper) ? kInfinity : n * n * w(upper);
  const double delta = inverse_auto(w, 1.0 / (n * n));
  out.asymptotic = std::pow(c1, -1.0 / beta) * delta * theta_integral(beta, 0.0, c1 * y2);
  return out;
}

// ---------------------------------------------------------------------------
// constant keys
// ---------------------------------------------------------------------------

std::string pickands_key(double alpha, double x) {
  return "B[fbm:" + fmt_g(alpha) + "][h=0][x=" + fmt_g(x) + "][limit]";
}

std::string drifted_b1_key(double gamma, double x) {
  return "B[fbm:1][h=pow:" + fmt_g(gamma) + ",1][x=" + fmt_g(x) + "][halfline-limit]";
}

std::string xphi_key(const std::string& label, double x) {
  return "B[xphi:" + label + "][h=0][x=" + fmt_g(x) + "][limit]";
}

}  // namespace sojourn
