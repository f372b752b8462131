#include <gtest/gtest.h>

#include "fkt/inverse.hpp"
#include "oracles.hpp"

using namespace fkt;

namespace {

double relative_block_error(const BlockJacobi& got, const BlockJacobi& want, int m_max) {
  double err = 0.0;
  auto e = [](const Block2& a, const Block2& b) { return max_abs(a - b) / std::max(1.0, max_abs(b)); };
  for (int m = 0; m <= m_max; ++m) {
    err = std::max({err, e(got.A[m], want.A[m]), e(got.B[m], want.B[m]), e(got.C[m], want.C[m])});
  }
  return err;
}

}  // namespace

TEST(Reconstruct, RoundTripRecoversInteriorBlocks) {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const BlockJacobi j = lattice_to_blocks(preset_random(8, seed));
    const ReconstructionReport rep = reconstruct(moments_from_operator(j, 15), 6, j.a1);
    EXPECT_LT(relative_block_error(rep.jacobi, j, 6), 1e-8) << seed;
    EXPECT_LT(rep.residual, 1e-10) << seed;
    EXPECT_LT(rep.structure_defect, 1e-8) << seed;
    for (bool f : rep.condition_flags) EXPECT_TRUE(f);
  }
}

TEST(Reconstruct, ComplexCoefficients) {
  LatticeState s = preset_random(6, 21);
  for (Coef k : kAllCoefs)
    for (int n = 1; n <= s.length(k); ++n) s.set(k, n, s.get(k, n) * std::exp(cplx(0.0, 0.3 * n)));
  const BlockJacobi j = lattice_to_blocks(s);
  const ReconstructionReport rep = reconstruct(moments_from_operator(j, 11), 4, j.a1);
  EXPECT_LT(relative_block_error(rep.jacobi, j, 4), 1e-8);
}

TEST(Reconstruct, PolynomialsMatchForwardRecurrence) {
  const BlockJacobi j = lattice_to_blocks(preset_random(8, 3));
  const ReconstructionReport rep = reconstruct(moments_from_operator(j, 15), 5, j.a1);
  const std::vector<VectorPoly> bs = vector_sequence(j, 6);
  ASSERT_EQ(rep.bs.size(), 7u);
  for (int m = 0; m <= 6; ++m) {
    for (int k = 0; k <= 2 * m + 1; ++k) {
      EXPECT_LT(std::abs(coeff(rep.bs[m].top, k) - coeff(bs[m].top, k)), 1e-8);
      EXPECT_LT(std::abs(coeff(rep.bs[m].bot, k) - coeff(bs[m].bot, k)), 1e-8);
    }
  }
}

TEST(Reconstruct, NeedsEnoughMoments) {
  const BlockJacobi j = lattice_to_blocks(preset_random(8, 1));
  const VectorFunctional u = moments_from_operator(j, 12);  // K_max = 25
  EXPECT_NO_THROW(reconstruct(u, 5, j.a1));
  EXPECT_THROW(reconstruct(u, 6, j.a1), DegreeOverflow);
}

TEST(Reconstruct, RejectsUnnormalizedFunctional) {
  const BlockJacobi j = lattice_to_blocks(preset_random(8, 1));
  VectorFunctional u = moments_from_operator(j, 15);
  for (cplx& x : u.mu1) x *= 2.0;
  EXPECT_THROW(reconstruct(u, 3, j.a1), SingularNormalization);
}

TEST(Reconstruct, FreeFunctionalFailsAtOrderOne) {
  std::vector<Block2> m(8, zero2());
  m[0] = identity2();
  const VectorFunctional u = VectorFunctional::from_block_moments(m);
  try {
    reconstruct(u, 2);
    FAIL() << "expected QuasiDefiniteViolation";
  } catch (const QuasiDefiniteViolation& e) {
    EXPECT_EQ(e.order(), 1);
    EXPECT_EQ(e.partial().bs.size(), 1u);
    EXPECT_EQ(e.kind(), "QuasiDefiniteViolation");
  }
}

TEST(Reconstruct, PartialResultKeepsEarlierOrders) {
  // Moments of a lattice with d_5 = 0: C_3 is singular, so the functional
  // stops being quasi-definite past order 3.
  LatticeState s = preset_random(8, 4);
  s.set(Coef::d, 5, 0.0);
  s.set(Coef::d, 6, 0.0);
  const BlockJacobi j = lattice_to_blocks(s);
  try {
    reconstruct(moments_from_operator(j, 15), 6, j.a1);
    FAIL() << "expected QuasiDefiniteViolation";
  } catch (const QuasiDefiniteViolation& e) {
    EXPECT_GE(e.order(), 3);
    const BlockJacobi& p = e.partial().jacobi;
    ASSERT_GE(p.blocks, 1);
    EXPECT_LT(relative_block_error(p, j, p.blocks - 1), 1e-8);
  }
}

TEST(Delta, ProductLaw) {
  for (std::uint64_t seed : {2u, 5u, 9u}) {
    const BlockJacobi j = lattice_to_blocks(preset_random(8, seed));
    const VectorFunctional u = moments_from_operator(j, 15);
    const std::vector<Block2> d = delta_sequence(u, vector_sequence(j, 6));
    EXPECT_LT(max_abs(d[0] - j.gauge()), 1e-14);
    Block2 prod = d[0];
    for (int m = 1; m <= 6; ++m) {
      prod = (j.C[m] * prod).eval();
      EXPECT_LT(max_abs(d[m] - prod), 1e-9 * std::max(1.0, max_abs(prod))) << seed << " " << m;
    }
  }
}

TEST(Delta, GaugedDeltaIsUpperTriangular) {
  const BlockJacobi j = lattice_to_blocks(preset_random(8, 6));
  const ReconstructionReport rep = reconstruct(moments_from_operator(j, 15), 5, j.a1);
  for (const Block2& d : rep.delta) {
    const Block2 g = d * j.gauge().inverse();
    EXPECT_LT(std::abs(g(1, 0)), 1e-10 * std::max(1.0, max_abs(g)));
  }
}

TEST(Orthogonality, DefectSeparatesOrthogonalFromPerturbed) {
  const BlockJacobi j = lattice_to_blocks(preset_random(8, 7));
  const VectorFunctional u = moments_from_operator(j, 15);
  std::vector<VectorPoly> bs = vector_sequence(j, 6);
  EXPECT_LT(orthogonality_defect(u, bs), 1e-9);
  bs[4].top[3] += 1e-3;
  EXPECT_GT(orthogonality_defect(u, bs), 1e-6);
}

TEST(Delta, SingularDeltaDetected) {
  const std::vector<Block2> m{identity2(), zero2(), zero2()};
  const VectorFunctional u = VectorFunctional::from_block_moments(m);
  EXPECT_THROW(delta_sequence(u, {VectorPoly{{1.0}, {0.0, 1.0}}, basis_vector(1)}), SingularDelta);
}
