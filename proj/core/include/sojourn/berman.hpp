#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sojourn/descriptors.hpp"
#include "sojourn/process.hpp"

namespace sojourn {

/// Monte Carlo problem for a constant B^h_W(x, [a,b]): the expectation over
/// paths of the per-path collapsed z-integral of
/// 1{ mes{t in [a,b]: sqrt(2) W(t) - Var W(t) - h(t) + z > 0} > x } e^{-z}.
struct BermanSpec {
  ProcessModel process;
  DriftField h = DriftField::zero();
  double x = 0.0;
  double interval_a = 0.0;
  double interval_b = 1.0;
  double grid_step = 0.0;  // 0 picks the default
  std::size_t replicates = 1000;
  std::uint64_t seed = 0;
};

/// 2^-10 (b-a) capped at 2^-7 absolute.
double default_grid_step(double a, double b);

/// Collapses the z-integral for one path: with M the field values on the
/// grid and m = floor(x/step), mes{t: M(t) + z > 0} > x iff z > -M_(m+1)
/// (the (m+1)-th largest value), so the integral equals e^{M_(m+1)}.
/// Returns 0 when x >= step * length (the sojourn can never exceed x).
double zstar_weight(std::span<const double> field_values, double step, double x);

struct BermanLadderPoint {
  double s = 0.0;
  double estimate = 0.0;
  double se = 0.0;
};

enum class BermanNormalization { none, divide_by_s };

struct BermanEstimate {
  double point = 0.0;
  double se = 0.0;
  std::size_t replicates = 0;
  std::vector<BermanLadderPoint> ladder;  // per-S values when laddered
  BermanNormalization normalization = BermanNormalization::none;
  double trimmed_mean = 0.0;  // 10%-trimmed diagnostic, never the point estimate
  bool warning = false;       // non-stabilization or insufficient interval
  std::string constant_key;   // estimand label, independent of MC parameters
  std::string record_id;      // canonical hash of the run spec, for persistence
};

/// Plain interval estimate of B^h_W(x, [a,b]).
BermanEstimate berman_interval(const BermanSpec& spec);

/// S-normalized limit constant for h = 0: per-S estimates of B(x,[0,S])/S on
/// a nested ladder plus a last-two-point extrapolation on 1/S. Flags
/// non-stabilization when the last two normalized values differ by more than
/// 5 combined standard errors.
BermanEstimate berman_limit(const ProcessModel& process, double x,
                            std::span<const double> s_ladder, double grid_step,
                            std::size_t replicates, std::uint64_t seed);

/// Two-sided constant over [-S, S] (no S-normalization); the stabilization
/// flag compares against the centered half window [-S/2, S/2].
BermanEstimate berman_hat(const ProcessModel& process, const DriftField& h, double x, double s,
                          double grid_step, std::size_t replicates, std::uint64_t seed);

/// One-sided limit for h != 0 (normalization S^0 = 1): interval estimates on
/// a [0,S] ladder, point taken at the largest S, stabilization flagged from
/// the last two rungs.
BermanEstimate berman_halfline_limit(const ProcessModel& process, const DriftField& h, double x,
                                     std::span<const double> s_ladder, double grid_step,
                                     std::size_t replicates, std::uint64_t seed);

/// Canonical label of the estimand (process, drift field, x, mode); matches
/// the keys evaluate_asymptotic looks up.
enum class BermanMode { interval, limit, hat, halfline_limit };
std::string berman_constant_key(const ProcessModel& process, const DriftField& h, double x,
                                BermanMode mode, double a = 0.0, double b = 0.0);

/// Short model tag used in keys and report records.
std::string process_label(const ProcessModel& model);

/// Canonical FNV-1a hash of the full spec (including grid/replicates/seed);
/// the persistence record id.
std::string berman_spec_hash(const BermanSpec& spec);

}  // namespace sojourn
