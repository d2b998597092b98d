#include "sojourn/sojourn.hpp"

#include <cmath>
#include <stdexcept>

namespace sojourn {
namespace {

std::size_t grid_index(double t, double step, std::size_t max_index, const char* what) {
  const double real = t / step;
  const auto idx = static_cast<long long>(std::llround(real));
  if (idx < 0 || static_cast<std::size_t>(idx) > max_index)
    throw std::invalid_argument(std::string(what) + ": window outside grid");
  return static_cast<std::size_t>(idx);
}

}  // namespace

std::size_t exceedance_count(std::span<const double> values, double step, double c, double u,
                             std::size_t i_begin, std::size_t i_end) {
  std::size_t count = 0;
  for (std::size_t i = i_begin; i < i_end; ++i) {
    const double t = static_cast<double>(i) * step;
    count += (values[i] - c * t > u) ? 1u : 0u;
  }
  return count;
}

double sojourn_time(const SamplePath& path, double c, double u, double window_a, double window_b) {
  if (window_b < window_a) throw std::invalid_argument("sojourn_time: window endpoints reversed");
  const double h = path.grid.step();
  const std::size_t ia = grid_index(window_a, h, path.grid.steps, "sojourn_time");
  const std::size_t ib = grid_index(window_b, h, path.grid.steps, "sojourn_time");
  return h * static_cast<double>(exceedance_count(path.values, h, c, u, ia, ib));
}

PassageSample first_passage(const SamplePath& path, double c, double u, double x, double v,
                            double horizon) {
  if (!(v > 0.0)) throw std::invalid_argument("first_passage: v must be positive");
  const double h = path.grid.step();
  const double covered = std::min(horizon, path.grid.horizon);
  const auto last = static_cast<std::size_t>(std::llround(covered / h));

  std::size_t count = 0;
  for (std::size_t k = 1; k <= last; ++k) {
    const double t_prev = static_cast<double>(k - 1) * h;
    count += (path.values[k - 1] - c * t_prev > u) ? 1u : 0u;
    if (v * h * static_cast<double>(count) > x)
      return PassageSample{static_cast<double>(k) * h, false};
  }
  return PassageSample{kInfinity, horizon > path.grid.horizon};
}

std::optional<double> normalize_passage(const PassageSample& tau, const PassageRegime& regime) {
  if (!std::isfinite(tau.tau)) return std::nullopt;
  if (const auto* inf = std::get_if<InfiniteHorizonRegime>(&regime))
    return (tau.tau - inf->u * inf->t_u) / inf->a_u;
  const auto& fin = std::get<FiniteHorizonRegime>(regime);
  return fin.sigma_dot_T / std::pow(fin.sigma_T, 3) * fin.u * fin.u * (fin.horizon - tau.tau);
}

}  // namespace sojourn
