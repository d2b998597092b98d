#pragma once

#include <limits>
#include <optional>
#include <span>
#include <variant>

#include "sojourn/process.hpp"

namespace sojourn {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// First time the running scaled sojourn strictly exceeds its threshold.
/// tau == kInfinity when it never does; censored flags horizon truncation
/// (the simulated window ended before the requested horizon).
struct PassageSample {
  double tau = kInfinity;
  bool censored = false;
};

/// Discrete sojourn time of X(t) - c t above level u over the window [a, b):
/// left-endpoint Riemann rule with strict exceedance, step * #{i : t_i in
/// [a,b), X_i - c t_i > u}. Window endpoints must align to the grid (the
/// caller rounds).
double sojourn_time(const SamplePath& path, double c, double u, double window_a, double window_b);

/// tau_u(x) = inf{ t : v * (sojourn of X - c s above u over [0,t]) > x }, on
/// the grid: the first grid time t_k with v * step * #{i < k : exceed} > x,
/// so tau is reported at the right endpoint of the crossing step.
PassageSample first_passage(const SamplePath& path, double c, double u, double x, double v,
                            double horizon);

/// Centering/scaling for the infinite-horizon passage statistic
/// (tau - u * t_u) / a_u.
struct InfiniteHorizonRegime {
  double u = 0.0;
  double t_u = 0.0;
  double a_u = 1.0;
};

/// Finite-horizon statistic sigma_dot(T)/sigma(T)^3 * u^2 * (T - tau).
struct FiniteHorizonRegime {
  double u = 0.0;
  double horizon = 1.0;
  double sigma_T = 1.0;
  double sigma_dot_T = 1.0;
};

using PassageRegime = std::variant<InfiniteHorizonRegime, FiniteHorizonRegime>;

/// The regime's normalized statistic; empty when tau is infinite (the caller
/// tracks the atom separately).
std::optional<double> normalize_passage(const PassageSample& tau, const PassageRegime& regime);

/// Low-level kernel shared with the Monte Carlo engine: number of grid
/// indices i in [i_begin, i_end) with values[i] - c * t_i > u.
std::size_t exceedance_count(std::span<const double> values, double step, double c, double u,
                             std::size_t i_begin, std::size_t i_end);

}  // namespace sojourn
