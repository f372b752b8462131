#include <gtest/gtest.h>

#include "fkt/operator.hpp"
#include "oracles.hpp"

using namespace fkt;

namespace {

/// Copy of s padded to `blocks` rows with fresh random coefficients beyond the
/// original truncation.
LatticeState extend(const LatticeState& s, int blocks, std::uint64_t seed) {
  LatticeState big = preset_random(blocks, seed);
  for (Coef k : kAllCoefs)
    for (int n = 1; n <= s.length(k); ++n) big.set(k, n, s.get(k, n));
  return big;
}

}  // namespace

TEST(Lattice, LengthsAndIndexing) {
  const LatticeState s = LatticeState::zero(5);
  EXPECT_EQ(s.blocks(), 5);
  // Reads outside the truncation (c_0, d_{-1}, ...) are zero; writes throw.
  EXPECT_EQ(s.get(Coef::c, 0), cplx(0.0));
  EXPECT_EQ(s.get(Coef::b, s.length(Coef::b) + 1), cplx(0.0));
  LatticeState w = s;
  EXPECT_THROW(w.set(Coef::a, 0, 1.0), std::out_of_range);
  EXPECT_THROW(w.set(Coef::d, s.length(Coef::d) + 1, 1.0), std::out_of_range);
  EXPECT_EQ(s.dimension(), s.to_vector().size());
}

TEST(Lattice, VectorRoundTrip) {
  const LatticeState s = preset_random(6, 3);
  const LatticeState r = LatticeState::from_vector(6, s.to_vector(), 0.25);
  EXPECT_EQ(r.t, 0.25);
  EXPECT_EQ((r.to_vector() - s.to_vector()).norm(), 0.0);
}

TEST(Lattice, BlockRoundTrip) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const LatticeState s = preset_random(7, seed);
    const BlockJacobi j = lattice_to_blocks(s);
    EXPECT_NO_THROW(check_structure(j));
    EXPECT_EQ((blocks_to_lattice(j).to_vector() - s.to_vector()).norm(), 0.0);
  }
}

TEST(Lattice, BlockShapes) {
  const BlockJacobi j = lattice_to_blocks(preset_random(6, 9));
  for (int m = 0; m < j.blocks; ++m) {
    EXPECT_TRUE(is_unit_lower_triangular(j.A[m]));
    EXPECT_TRUE(is_upper_triangular(j.C[m]));
  }
  EXPECT_EQ(max_abs(j.C[0]), 0.0);
}

TEST(Lattice, StructureViolationDetected) {
  BlockJacobi j = lattice_to_blocks(preset_random(4, 1));
  j.C[2](1, 0) = 0.3;
  EXPECT_THROW(check_structure(j), StructureViolation);
  j = lattice_to_blocks(preset_random(4, 1));
  j.A[1](0, 1) = 1e-3;
  EXPECT_THROW(check_structure(j), StructureViolation);
}

TEST(Operator, DenseMatchesFiveTermAssembly) {
  for (std::uint64_t seed : {4u, 5u}) {
    const LatticeState s = preset_random(6, seed);
    EXPECT_LT(max_abs(dense_operator(lattice_to_blocks(s)) - oracle::scalar_operator(s)), 1e-15);
  }
}

TEST(Operator, ApplyMatchesDenseProduct) {
  const LatticeState s = preset_random(5, 8);
  const BlockJacobi j = lattice_to_blocks(s);
  const CMatrix x = CMatrix::Random(10, 3);
  EXPECT_LT(max_abs(apply_operator(j, x) - oracle::scalar_operator(s) * x), 1e-14);
}

TEST(Operator, PowerBlockAgreesWithLargerOperatorInsideHorizon) {
  const LatticeState s = preset_random(5, 11);
  const BlockJacobi j = lattice_to_blocks(s);
  const CMatrix big = oracle::scalar_operator(extend(s, 12, 99));
  for (int n = 0; n <= 9; ++n)
    for (int row = 0; row < 5; ++row)
      for (int col = 0; col < 5; ++col) {
        if ((row + col + n) / 2 > 4) {
          EXPECT_THROW(power_block(j, n, row, col), TruncationTooSmall);
          continue;
        }
        const Block2 want = oracle::matrix_power(big, n).block(2 * row, 2 * col, 2, 2);
        const Block2 got = power_block(j, n, row, col);
        EXPECT_LT(max_abs(got - want), 1e-12 * std::max(1.0, max_abs(want))) << n << " " << row << " " << col;
      }
}

TEST(Operator, CornerPowersAreFiniteSectionPowers) {
  const LatticeState s = preset_random(4, 2);
  const std::vector<Block2> p = corner_powers(lattice_to_blocks(s), 12);
  const CMatrix dense = oracle::scalar_operator(s);
  for (int n = 0; n < 12; ++n) {
    const Block2 want = oracle::matrix_power(dense, n).topLeftCorner(2, 2);
    EXPECT_LT(max_abs(p[n] - want), 1e-12 * std::max(1.0, max_abs(want)));
  }
}

TEST(Operator, NormBoundDominatesSpectrum) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const BlockJacobi j = lattice_to_blocks(preset_random(8, seed));
    const double bound = operator_norm_bound(j);
    for (cplx e : spectrum(j)) EXPECT_LE(std::abs(e), bound + 1e-12);
  }
}

TEST(Operator, SpectrumMatchesDenseEigensolver) {
  for (std::uint64_t seed : {1u, 6u, 13u}) {
    const LatticeState s = preset_random(6, seed);
    Eigen::ComplexEigenSolver<CMatrix> es(oracle::scalar_operator(s));
    std::vector<cplx> want(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
    const std::vector<cplx> got = spectrum(lattice_to_blocks(s));
    ASSERT_EQ(got.size(), want.size());
    // Hungarian matching is checked against brute force in the dynamics suite.
    double worst = 0.0;
    for (cplx g : got) {
      double nearest = 1e300;
      for (cplx w : want) nearest = std::min(nearest, std::abs(g - w));
      worst = std::max(worst, nearest);
    }
    EXPECT_LT(worst, 1e-8);
  }
}

TEST(Operator, SpectrumOfTriangularPatternIsItsDiagonal) {
  // Only b nonzero: the operator is upper triangular, so every strong
  // component is a single index.
  LatticeState s = LatticeState::zero(4);
  for (int n = 1; n <= s.length(Coef::b); ++n) s.set(Coef::b, n, 0.5 * n);
  const std::vector<cplx> eig = spectrum(lattice_to_blocks(s));
  ASSERT_EQ(eig.size(), 8u);
  for (int n = 1; n <= 8; ++n) {
    EXPECT_EQ(std::count(eig.begin(), eig.end(), cplx(0.5 * n, 0.0)), 1);
  }
}

TEST(Operator, CommutatorMatchesLaxRhsOnInteriorRows) {
  for (std::uint64_t seed : {3u, 17u}) {
    EXPECT_LT(commutator_residual(preset_random(7, seed)), 1e-13);
  }
}

TEST(Operator, TruncatedRhsIsTheFiniteSectionLaxFlow) {
  EXPECT_LT(commutator_residual(preset_random(7, 3), false), 1e-13);
}

TEST(Presets, StationaryHasZeroRhs) {
  EXPECT_EQ(lax_rhs(preset_stationary(6)).to_vector().norm(), 0.0);
  EXPECT_EQ(lax_rhs(preset_zero(6)).to_vector().norm(), 0.0);
}

TEST(Presets, RandomIsDeterministicAndBounded) {
  const LatticeState a = preset_random(8, 42), b = preset_random(8, 42), c = preset_random(8, 43);
  EXPECT_EQ((a.to_vector() - b.to_vector()).norm(), 0.0);
  EXPECT_GT((a.to_vector() - c.to_vector()).norm(), 0.0);
  EXPECT_LE(a.max_abs_coefficient(), 1.0);
  for (int n = 1; n <= a.length(Coef::d); ++n) EXPECT_GE(a.d(n).real(), 0.1);
}

TEST(Presets, MarginClearsTrailingBlockRows) {
  const int n = 8, margin = 2;
  const BlockJacobi j = lattice_to_blocks(preset_random(n, 5, margin));
  for (int m = n - margin; m < n; ++m) {
    EXPECT_EQ(max_abs(j.B[m]), 0.0) << m;
    EXPECT_EQ(max_abs(j.C[m]), 0.0) << m;
    EXPECT_EQ(max_abs(j.A[m] - identity2()), 0.0) << m;
  }
  EXPECT_GT(max_abs(j.B[n - margin - 1]), 0.0);
}
