#include <cmath>
#include <stdexcept>
#include <vector>

#include "sojourn/asymptotics.hpp"
#include "sojourn/errors.hpp"

namespace sojourn {
namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

struct MinResult {
  double t = 0.0;
  double value = 0.0;
  bool multimodal = false;
};

/// Golden-section search refined inside [lo, hi]; the caller guarantees a
/// minimum in the bracket.
MinResult golden_section(const std::function<double(double)>& q, double lo, double hi,
                         double rel_tol) {
  constexpr double inv_phi = 0.6180339887498949;
  double a = lo, b = hi;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = q(x1), f2 = q(x2);
  for (int it = 0; it < 400 && (b - a) > rel_tol * std::max(1e-300, std::fabs(a) + std::fabs(b));
       ++it) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = q(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = q(x2);
    }
  }
  const double t = 0.5 * (a + b);
  return {t, q(t), false};
}

/// Scan for extra sign changes of the discrete gradient; a unimodal objective
/// has exactly one. On multimodality, refine around the global grid minimum
/// and flag it.
MinResult minimize_scan(const std::function<double(double)>& q, double lo, double hi,
                        double rel_tol) {
  constexpr int kScan = 257;
  std::vector<double> qa(kScan);
  const double dt = (hi - lo) / (kScan - 1);
  for (int i = 0; i < kScan; ++i) qa[i] = q(lo + i * dt);

  int sign_changes = 0;
  int prev_sign = 0;
  int best = 0;
  for (int i = 1; i < kScan; ++i) {
    if (qa[i] < qa[best]) best = i;
    const double d = qa[i] - qa[i - 1];
    const int s = d > 0.0 ? 1 : (d < 0.0 ? -1 : 0);
    if (s != 0) {
      if (prev_sign != 0 && s != prev_sign) ++sign_changes;
      prev_sign = s;
    }
  }

  if (sign_changes <= 1) return golden_section(q, lo, hi, rel_tol);

  const double a = lo + std::max(0, best - 1) * dt;
  const double b = lo + std::min(kScan - 1, best + 1) * dt;
  MinResult r = golden_section(q, a, b, rel_tol);
  r.multimodal = true;
  return r;
}

RvFunction variance_descriptor(const ProcessModel& model) {
  if (std::holds_alternative<BrownianDrift>(model)) return RvFunction::power(1.0);
  if (const auto* f = std::get_if<Fbm>(&model)) return RvFunction::power(2.0 * f->hurst);
  if (const auto* s = std::get_if<StationaryIncrements>(&model)) return s->sigma2;
  throw regime_error("no stationary-increments variance descriptor for this model");
}

}  // namespace

InfiniteHorizonGeometry infinite_horizon_geometry(const RvFunction& sigma2, double c, double u) {
  if (!(c > 0.0)) throw std::invalid_argument("infinite_horizon_geometry: c must be > 0");
  if (!(u > 0.0)) throw std::invalid_argument("infinite_horizon_geometry: u must be > 0");
  const double a_inf = sigma2.index_at_infinity() / 2.0;
  if (!(a_inf > 0.0) || !(a_inf < 1.0))
    throw regime_error("unsupported regime: variance index at infinity must lie in (0,2)");

  InfiniteHorizonGeometry g;
  g.t_star = a_inf / (c * (1.0 - a_inf));
  g.A = std::pow(g.t_star, -a_inf) / (1.0 - a_inf);
  g.B = std::pow(g.t_star, -a_inf - 2.0) * a_inf;

  const RvFunction sig = sigma_of(sigma2);
  const auto objective = [&](double t) { return u * (1.0 + c * t) / sig(u * t); };
  const MinResult m = minimize_scan(objective, g.t_star / 10.0, 10.0 * g.t_star, 1e-10);
  g.t_u = m.t;
  g.m_u = m.value;
  g.objective_multimodal = m.multimodal;

  const double target = std::sqrt(2.0) * sigma2(u * g.t_star) / (u * (1.0 + c * g.t_star));
  g.v_u = 1.0 / inverse_auto(sig, target);

  const double idx0 = sigma2.index_at_infinity();
  if (idx0 < 1.0)
    g.phi = 0.0;
  else if (idx0 > 1.0)
    g.phi = kInfinity;
  else
    g.phi = sigma2(u) / u;

  g.a_u = sig(u * g.t_star) / c * std::sqrt(a_inf / (1.0 - a_inf));
  return g;
}

FiniteHorizonGeometry finite_horizon_geometry(const RvFunction& sigma2, double c, double horizon,
                                              double u) {
  if (!(horizon > 0.0) || std::isinf(horizon))
    throw std::invalid_argument("finite_horizon_geometry: need a finite positive horizon");
  const double s2T = sigma2(horizon);
  if (!(s2T > 0.0)) throw std::invalid_argument("finite_horizon_geometry: sigma(T) must be > 0");
  const double sT = std::sqrt(s2T);
  const double num = u + c * horizon;
  if (!(num > 0.0))
    throw std::invalid_argument("finite_horizon_geometry: u + cT must be positive");

  FiniteHorizonGeometry g;
  g.sigma_T = sT;
  g.sigma_dot_T = sigma2.derivative(horizon) / (2.0 * sT);
  if (!(g.sigma_dot_T > 0.0))
    throw std::invalid_argument("finite_horizon_geometry: sigma_dot(T) must be positive");
  g.m_u = num / sT;

  const double p0 = sigma2.index_at_zero();
  if (p0 < 1.0) {
    g.regime_case = FiniteHorizonCase::time_negligible;
  } else if (p0 > 1.0) {
    g.regime_case = FiniteHorizonCase::variance_negligible;
  } else {
    g.regime_case = FiniteHorizonCase::balanced;
    const auto theta = sigma2.theta_at_zero();
    if (!theta)
      throw regime_error(
          "finite horizon balanced case: the descriptor must declare theta = lim sigma^2(t)/t");
    g.theta = *theta;
  }

  if (g.regime_case == FiniteHorizonCase::variance_negligible) {
    g.v_u = g.m_u * g.m_u;
  } else {
    const RvFunction sig = sigma_of(sigma2);
    g.v_u = 1.0 / inverse_auto(sig, std::sqrt(2.0) * s2T / num);
  }
  return g;
}

SelfSimilarGeometry self_similar_geometry(double hurst, double c, const RvFunction* rho) {
  if (!(hurst > 0.0) || !(hurst <= 1.0 - 1e-6))
    throw std::invalid_argument("self_similar_geometry: H must lie in (0, 1-1e-6]");
  if (!(c > 0.0)) throw std::invalid_argument("self_similar_geometry: c must be > 0");
  SelfSimilarGeometry g;
  g.t0 = hurst / (c * (1.0 - hurst));
  g.a_hat = std::pow(g.t0, -hurst) / (1.0 - hurst);
  g.b_hat = std::pow(g.t0, -hurst - 2.0) * hurst;
  if (rho) {
    const auto gamma = rho->gamma_at_zero();
    g.gamma = gamma ? *gamma : std::numeric_limits<double>::quiet_NaN();
  } else {
    g.gamma = std::numeric_limits<double>::quiet_NaN();
  }
  return g;
}

// ---------------------------------------------------------------------------
// theorem dispatch
// ---------------------------------------------------------------------------

namespace {

struct Resolved {
  double value = 0.0;
  BermanInput input;
};

Resolved resolve_constant(const std::string& key, std::optional<double> closed,
                          const BermanValues* supplied) {
  Resolved r;
  if (closed) {
    r.value = *closed;
    r.input = {key, *closed, "closed-form"};
    return r;
  }
  if (supplied) {
    const auto it = supplied->find(key);
    if (it != supplied->end()) {
      r.value = it->second.value;
      r.input = {key, it->second.value, it->second.provenance};
      return r;
    }
  }
  throw missing_constant_error(key);
}

/// S-normalized limit constant of the fBm with variance |t|^alpha; closed
/// form exists for alpha == 1.
Resolved resolve_pickands(double alpha, double x, const BermanValues* supplied) {
  std::optional<double> closed;
  if (alpha == 1.0) closed = brownian_sojourn_constant(x);
  return resolve_constant(pickands_key(alpha, x), closed, supplied);
}

AsymptoticResult assemble(double constant, double algebraic, double tail, std::string regime,
                          std::vector<BermanInput> inputs) {
  AsymptoticResult r;
  r.constant_factor = constant;
  r.algebraic_factor = algebraic;
  r.gauss_tail_factor = tail;
  r.value = constant * algebraic * tail;
  r.regime = std::move(regime);
  r.berman_inputs = std::move(inputs);
  return r;
}

AsymptoticResult eval_infinite_si(const SojournProblem& p, const BermanValues* supplied) {
  const RvFunction sigma2 = variance_descriptor(p.model);
  const InfiniteHorizonGeometry g = infinite_horizon_geometry(sigma2, p.c, p.u);

  std::vector<BermanInput> inputs;
  double constant = 0.0;
  if (g.phi > 0.0 && std::isfinite(g.phi)) {
    const auto& pw = sigma2.as_power();
    if (pw && pw->exponent == 1.0) {
      // The rescaled process is standard Brownian motion for any linear
      // variance, so the constant has the closed form.
      constant = brownian_sojourn_constant(p.x);
      inputs.push_back({pickands_key(1.0, p.x), constant, "closed-form"});
    } else {
      const Resolved r =
          resolve_constant(xphi_key(sigma2.label(), p.x), std::nullopt, supplied);
      constant = r.value;
      inputs.push_back(r.input);
    }
  } else {
    const double alpha = g.phi == 0.0 ? sigma2.index_at_zero() : sigma2.index_at_infinity();
    const Resolved r = resolve_pickands(alpha, p.x, supplied);
    constant = r.value;
    inputs.push_back(r.input);
  }

  const double constant_factor = constant * std::sqrt(2.0 * g.A * kPi / g.B);
  const double algebraic = p.u * g.v_u / g.m_u;
  return assemble(constant_factor, algebraic, normal_tail(g.m_u), "thm3.1", std::move(inputs));
}

AsymptoticResult eval_finite_si(const SojournProblem& p, const BermanValues* supplied) {
  const RvFunction sigma2 = variance_descriptor(p.model);
  const FiniteHorizonGeometry g = finite_horizon_geometry(sigma2, p.c, p.horizon, p.u);
  const double tail = normal_tail(g.m_u);

  switch (g.regime_case) {
    case FiniteHorizonCase::time_negligible: {
      const Resolved r = resolve_pickands(sigma2.index_at_zero(), p.x, supplied);
      const double constant = r.value * g.sigma_T / g.sigma_dot_T;
      const double algebraic = g.v_u / (g.m_u * g.m_u);
      return assemble(constant, algebraic, tail, "thm3.4.i", {r.input});
    }
    case FiniteHorizonCase::balanced: {
      const double gamma_drift = 2.0 * g.sigma_T * g.sigma_dot_T / g.theta;
      const Resolved r =
          resolve_constant(drifted_b1_key(gamma_drift, p.x), std::nullopt, supplied);
      return assemble(r.value, 1.0, tail, "thm3.4.ii", {r.input});
    }
    case FiniteHorizonCase::variance_negligible: {
      const double ratio = g.sigma_dot_T / g.sigma_T;
      return assemble(std::exp(-ratio * p.x), 1.0, tail, "thm3.4.iii", {});
    }
  }
  throw regime_error("finite horizon: unknown case");
}

AsymptoticResult eval_infinite_selfsim(const SojournProblem& p, const SelfSimilar& m,
                                       const BermanValues* supplied) {
  const SelfSimilarGeometry g = self_similar_geometry(m.hurst, p.c, &m.rho);
  if (std::isnan(g.gamma))
    throw regime_error(
        "self-similar infinite horizon: the rho descriptor must declare gamma = lim t^2/rho(t)");
  const double n_u = g.a_hat * std::pow(p.u, 1.0 - m.hurst);
  const double tail = normal_tail(n_u);

  if (g.gamma == 0.0) {
    const Resolved r = resolve_pickands(m.rho.index_at_zero(), p.x, supplied);
    const double constant = r.value * std::sqrt(2.0 * g.a_hat * kPi / g.b_hat);
    const double algebraic = 1.0 / (inverse_auto(m.rho, 1.0 / (n_u * n_u)) * n_u);
    return assemble(constant, algebraic, tail, "thm3.6.i", {r.input});
  }
  if (std::isfinite(g.gamma)) {
    const double q = (2.0 * g.a_hat + g.b_hat * g.gamma);
    const double constant =
        std::sqrt(q / (g.b_hat * g.gamma)) * std::exp(-q / (8.0 * g.a_hat) * p.x * p.x);
    return assemble(constant, 1.0, tail, "thm3.6.ii", {});
  }
  const double constant = std::exp(-g.a_hat * g.b_hat * p.x * p.x / 8.0);
  return assemble(constant, 1.0, tail, "thm3.6.iii", {});
}

AsymptoticResult eval_finite_selfsim(const SojournProblem& p, const SelfSimilar& m,
                                     const BermanValues* supplied) {
  const double H = m.hurst;
  const double T = p.horizon;
  const double m_u = (p.u + p.c * T) / std::pow(T, H);
  const double tail = normal_tail(m_u);
  const double alpha = m.rho.index_at_zero();

  if (alpha < 1.0) {
    const Resolved r = resolve_pickands(alpha, p.x, supplied);
    const double constant = r.value * std::pow(T, 2.0 * H + 1.0 - 2.0 * H / alpha) / H;
    const double algebraic =
        1.0 / (p.u * p.u * inverse_auto(m.rho, 1.0 / (p.u * p.u)));
    return assemble(constant, algebraic, tail, "thm3.7.i", {r.input});
  }
  if (alpha == 1.0) {
    const auto theta = m.rho.theta_at_zero();
    if (!theta)
      throw regime_error(
          "self-similar finite horizon balanced case: rho must declare theta = lim rho(t)/t");
    const double gamma_drift = H / (T * *theta);
    const Resolved r = resolve_constant(drifted_b1_key(gamma_drift, p.x), std::nullopt, supplied);
    return assemble(r.value, 1.0, tail, "thm3.7.ii", {r.input});
  }
  return assemble(std::exp(-H / T * p.x), 1.0, tail, "thm3.7.iii", {});
}

}  // namespace

AsymptoticResult evaluate_asymptotic(const SojournProblem& p, const BermanValues* supplied) {
  validate(p);
  if (std::holds_alternative<LineProcess>(p.model) || std::holds_alternative<ZeroProcess>(p.model))
    throw regime_error("no sojourn asymptotics implemented for degenerate models");

  if (const auto* ss = std::get_if<SelfSimilar>(&p.model)) {
    if (!ss->rho.valid())
      throw std::invalid_argument("self-similar model: rho descriptor is required");
    return std::isinf(p.horizon) ? eval_infinite_selfsim(p, *ss, supplied)
                                 : eval_finite_selfsim(p, *ss, supplied);
  }
  return std::isinf(p.horizon) ? eval_infinite_si(p, supplied) : eval_finite_si(p, supplied);
}

double resolve_scaling(const SojournProblem& p) {
  if (p.scaling.kind == ScalingRule::Kind::explicit_value) return p.scaling.v;
  validate(p);

  if (const auto* ss = std::get_if<SelfSimilar>(&p.model)) {
    if (!ss->rho.valid())
      throw missing_scaling_error("resolve_scaling: self-similar model needs a rho descriptor");
    if (std::isinf(p.horizon)) {
      const SelfSimilarGeometry g = self_similar_geometry(ss->hurst, p.c, &ss->rho);
      if (std::isnan(g.gamma))
        throw missing_scaling_error("resolve_scaling: rho must declare gamma");
      if (std::isinf(g.gamma)) return std::pow(p.u, -ss->hurst);
      const double n_u = g.a_hat * std::pow(p.u, 1.0 - ss->hurst);
      return 1.0 / (p.u * inverse_auto(ss->rho, 1.0 / (n_u * n_u)));
    }
    const double alpha = ss->rho.index_at_zero();
    const double T = p.horizon;
    const double m_u = (p.u + p.c * T) / std::pow(T, ss->hurst);
    if (alpha > 1.0) return m_u * m_u;
    return 1.0 / inverse_auto(ss->rho, std::pow(T, 2.0 * ss->hurst) / ((p.u + p.c * T) *
                                                                       (p.u + p.c * T)));
  }

  const RvFunction sigma2 = variance_descriptor(p.model);
  if (std::isinf(p.horizon)) return infinite_horizon_geometry(sigma2, p.c, p.u).v_u;
  return finite_horizon_geometry(sigma2, p.c, p.horizon, p.u).v_u;
}

}  // namespace sojourn
