#pragma once

#include <functional>

namespace sojourn {

/// Adaptive Gauss-Kronrod (7,15) integration of f over the finite interval
/// [a, b] to absolute accuracy abs_tol. Throws numeric_error when the
/// subdivision budget is exhausted before the tolerance is met.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol = 1e-11, int max_depth = 48);

}  // namespace sojourn
