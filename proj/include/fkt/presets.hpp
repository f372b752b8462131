#ifndef FKT_PRESETS_HPP
#define FKT_PRESETS_HPP

#include <cstdint>
#include <random>
#include <string>

#include "fkt/lattice.hpp"

namespace fkt {

inline LatticeState preset_zero(int blocks) { return LatticeState::zero(blocks); }

/// b_n = n, a_n = 1/2, c = d = 0: every right-hand side vanishes.
inline LatticeState preset_stationary(int blocks) {
  LatticeState s = LatticeState::zero(blocks);
  for (int n = 1; n <= s.length(Coef::b); ++n) s.set(Coef::b, n, static_cast<double>(n));
  for (int n = 1; n <= s.length(Coef::a); ++n) s.set(Coef::a, n, 0.5);
  return s;
}

/// d_5 = 0.5, b_6 = 0.2, everything else zero. Needs N >= 4.
inline LatticeState preset_interior_bump(int blocks) {
  if (blocks < 4) throw StructureViolation("interior-bump preset needs at least 4 block rows");
  LatticeState s = LatticeState::zero(blocks);
  s.set(Coef::d, 5, 0.5);
  s.set(Coef::b, 6, 0.2);
  return s;
}

/// Uniform double in [0, 1) from the top 53 bits, so the expansion is the
/// same on every platform.
inline double unit_uniform(std::mt19937_64& gen) { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }

/// a, b, c uniform in [-1, 1], d uniform in [0.1, 1], real valued, drawn in
/// the order a, b, c, d by increasing index. The coefficients living in the
/// last `margin` block rows are then set to zero.
inline LatticeState preset_random(int blocks, std::uint64_t seed, int margin = 0) {
  if (margin < 0 || margin >= blocks) throw StructureViolation("random preset margin must lie in [0, N)");
  LatticeState s = LatticeState::zero(blocks);
  std::mt19937_64 gen(seed);
  for (Coef k : kAllCoefs) {
    for (int n = 1; n <= s.length(k); ++n) {
      const double u = unit_uniform(gen);
      s.set(k, n, k == Coef::d ? 0.1 + 0.9 * u : 2.0 * u - 1.0);
    }
  }
  if (margin > 0) {
    // First scalar index of each sequence that appears in block row `first`.
    const int first = blocks - margin;
    const int start[4] = {2 * first + 2, 2 * first + 1, 2 * first, 2 * first - 1};
    for (Coef k : kAllCoefs)
      for (int n = std::max(1, start[static_cast<int>(k)]); n <= s.length(k); ++n) s.set(k, n, 0.0);
  }
  return s;
}

}  // namespace fkt

#endif  // FKT_PRESETS_HPP
