#pragma once

#include <cmath>
#include <cstdint>

namespace sojourn {

/// Counter-style pseudo-random generator with cheap substreams.
///
/// Substream r of a run is CounterRng(seed, r); streams derived from the same
/// seed are independent for practical purposes and do not share state, so
/// replicates can be generated in any order, serially or across workers, with
/// identical output. The core is the splitmix64 output function over a
/// Weyl-sequence counter.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : state_(mix(seed ^ mix(stream + kGolden))) {}

  std::uint64_t next_u64() {
    state_ += kGolden;
    return mix(state_);
  }

  /// Uniform on the open interval (0,1); never returns 0 or 1.
  double uniform() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

  /// Standard normal via the polar Box-Muller transform.
  double normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    for (;;) {
      const double a = 2.0 * uniform() - 1.0;
      const double b = 2.0 * uniform() - 1.0;
      const double q = a * a + b * b;
      if (q > 0.0 && q < 1.0) {
        const double f = std::sqrt(-2.0 * std::log(q) / q);
        cached_ = b * f;
        have_cached_ = true;
        return a * f;
      }
    }
  }

 private:
  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
  bool have_cached_ = false;
  double cached_ = 0.0;
};

}  // namespace sojourn
