#pragma once

#include <cstddef>
#include <stdexcept>

namespace sojourn {

/// Uniform time grid on [0, horizon]: t_i = i * step, i = 0..steps.
struct GridSpec {
  double horizon = 1.0;
  std::size_t steps = 2;

  double step() const { return horizon / static_cast<double>(steps); }
  double time(std::size_t i) const { return static_cast<double>(i) * step(); }
  std::size_t points() const { return steps + 1; }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

inline GridSpec build_grid(double horizon, std::size_t steps) {
  if (!(horizon > 0.0)) throw std::invalid_argument("build_grid: horizon must be positive");
  if (steps < 2) throw std::invalid_argument("build_grid: steps must be >= 2");
  return GridSpec{horizon, steps};
}

}  // namespace sojourn
