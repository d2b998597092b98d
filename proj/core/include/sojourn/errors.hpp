#pragma once

#include <stdexcept>
#include <string>

namespace sojourn {

// Precondition violations throw std::invalid_argument throughout.

/// A draw could not be produced (covariance not positive semidefinite even
/// after jitter escalation, embedding failure without fallback, ...).
struct simulation_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A numerical routine failed to converge (quadrature, bracket expansion, ...).
struct numeric_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Root bracket does not straddle the target value.
struct bracket_error : numeric_error {
  using numeric_error::numeric_error;
};

/// No solution exists under the stated conditions (e.g. the drift condition
/// psi'(0+) < c is violated).
struct no_solution_error : numeric_error {
  using numeric_error::numeric_error;
};

/// The requested parameter regime is not covered by any implemented formula.
struct regime_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A constant value is required but is neither closed-form nor supplied.
/// `key` names the constant so the caller knows what to estimate.
struct missing_constant_error : std::runtime_error {
  explicit missing_constant_error(std::string constant_key)
      : std::runtime_error("missing constant: " + constant_key +
                           " (estimate it with the berman module and pass it in)"),
        key(std::move(constant_key)) {}
  std::string key;
};

/// The scaling v(u) could not be resolved from the problem description.
struct missing_scaling_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Degenerate conditioning: no replicate satisfied the conditioning event.
struct degenerate_conditioning_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace sojourn
