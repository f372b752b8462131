#include <gtest/gtest.h>

#include "fkt/functional.hpp"
#include "oracles.hpp"

using namespace fkt;

namespace {

/// P = sum_j K_j x^{2j} P_0 with P_0 = [1, x]^T.
VectorPoly from_block_coeffs(const std::vector<Block2>& ks) {
  VectorPoly p{ScalarPoly(2 * ks.size(), 0.0), ScalarPoly(2 * ks.size(), 0.0)};
  for (std::size_t j = 0; j < ks.size(); ++j) {
    p.top[2 * j] = ks[j](0, 0);
    p.top[2 * j + 1] = ks[j](0, 1);
    p.bot[2 * j] = ks[j](1, 0);
    p.bot[2 * j + 1] = ks[j](1, 1);
  }
  return p;
}

VectorFunctional random_functional(int k_max, unsigned seed) {
  std::srand(seed);
  VectorFunctional u;
  for (int k = 0; k <= k_max; ++k) {
    u.mu1.push_back(cplx(std::rand() / double(RAND_MAX) - 0.5, std::rand() / double(RAND_MAX) - 0.5));
    u.mu2.push_back(cplx(std::rand() / double(RAND_MAX) - 0.5, std::rand() / double(RAND_MAX) - 0.5));
  }
  return u;
}

/// e^{tA} by a long Taylor series; fine for |t| ||A|| of order one.
CMatrix expm_taylor(const CMatrix& a, double t) {
  CMatrix term = CMatrix::Identity(a.rows(), a.cols()), sum = term;
  for (int k = 1; k < 80; ++k) {
    term = (term * a * (t / k)).eval();
    sum += term;
  }
  return sum;
}

}  // namespace

TEST(Functional, ActIsBlockLinearInMoments) {
  const VectorFunctional u = random_functional(11, 1);
  std::vector<Block2> ks;
  for (int j = 0; j < 6; ++j) ks.push_back(Block2::Random());
  Block2 want = zero2();
  for (int j = 0; j < 6; ++j) want += ks[j] * u.block_moment(j);
  EXPECT_LT(max_abs(act(u, from_block_coeffs(ks)) - want), 1e-14);
}

TEST(Functional, ActRejectsDegreeOverflow) {
  const VectorFunctional u = random_functional(5, 2);
  EXPECT_THROW(act(u, basis_vector(3)), DegreeOverflow);
  EXPECT_NO_THROW(act(u, basis_vector(2)));
}

TEST(Functional, ShiftedActionMovesBlockIndex) {
  const VectorFunctional u = random_functional(15, 3);
  for (int k = 0; k < 4; ++k) EXPECT_LT(max_abs(act_shifted(u, k, basis_vector(1)) - u.block_moment(k + 1)), 1e-15);
}

TEST(Functional, LeftMultiplyDefinition) {
  const VectorFunctional u = random_functional(13, 4);
  const MatrixPoly a{{Block2::Random(), Block2::Random(), Block2::Random()}};
  const VectorFunctional v = left_multiply(a, u);
  EXPECT_EQ(v.k_max(), 11);
  const VectorPoly p = from_block_coeffs({Block2::Random(), Block2::Random(), Block2::Random()});
  Block2 want = zero2();
  for (int k = 0; k <= 2; ++k) want += act(u, shift(p, k)) * a.coeff(k).transpose();
  EXPECT_LT(max_abs(act(v, p) - want), 1e-14);
}

TEST(Functional, NormalizeGivesIdentityFirstMoment) {
  const VectorFunctional u = normalize(random_functional(9, 5));
  EXPECT_TRUE(u.is_normalized());
  VectorFunctional singular = random_functional(9, 5);
  singular.mu2[0] = 0.0;
  singular.mu2[1] = 0.0;
  EXPECT_THROW(normalize(singular), SingularNormalization);
}

TEST(Functional, BlockMomentRoundTrip) {
  std::vector<Block2> m{Block2::Random(), Block2::Random(), Block2::Random()};
  const VectorFunctional u = VectorFunctional::from_block_moments(m);
  EXPECT_EQ(u.k_max(), 5);
  for (int j = 0; j < 3; ++j) EXPECT_EQ(max_abs(u.block_moment(j) - m[j]), 0.0);
  EXPECT_THROW(u.block_moment(3), DegreeOverflow);
}

TEST(Functional, MomentsAreConjugatedCornerPowers) {
  const LatticeState s = preset_random(6, 7);
  const BlockJacobi j = lattice_to_blocks(s);
  const VectorFunctional u = moments_from_operator(j, 11);
  const CMatrix dense = oracle::scalar_operator(s);
  const Block2 m = gauge_matrix(s.a(1));
  for (int n = 0; n <= 11; ++n) {
    const Block2 want = m.inverse() * oracle::matrix_power(dense, n).topLeftCorner(2, 2) * m;
    EXPECT_LT(max_abs(u.block_moment(n) - want), 1e-12 * std::max(1.0, max_abs(want)));
  }
  EXPECT_THROW(moments_from_operator(j, 12), TruncationTooSmall);
  EXPECT_NO_THROW(moments_from_operator(j, 40, MomentWindow::finite_section));
}

TEST(Functional, HankelLayout) {
  const VectorFunctional u = random_functional(17, 8);
  const HankelBlock h = hankel(u, 2);
  const CMatrix s = h.scalar();
  for (int i = 0; i <= 2; ++i)
    for (int k = 0; k <= 2; ++k) EXPECT_EQ(max_abs(s.block(2 * i, 2 * k, 2, 2) - u.block_moment(i + k)), 0.0);
  EXPECT_THROW(hankel(u, 5), DegreeOverflow);
}

TEST(Functional, LatticeMomentsAreQuasiDefinite) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const VectorFunctional u = moments_from_operator(lattice_to_blocks(preset_random(8, seed)), 15);
    for (bool f : quasidefinite_check(u, 3)) EXPECT_TRUE(f) << seed;
  }
}

TEST(Functional, FreeFunctionalFailsAtOrderOne) {
  const VectorFunctional u = VectorFunctional::from_block_moments({identity2(), zero2(), zero2(), zero2()});
  const std::vector<bool> flags = quasidefinite_check(u, 1);
  EXPECT_TRUE(flags[0]);
  EXPECT_FALSE(flags[1]);
}

TEST(Functional, GrowthEnvelopeBoundsEveryMoment) {
  const VectorFunctional u = moments_from_operator(lattice_to_blocks(preset_random(8, 3)), 60, MomentWindow::finite_section);
  const std::vector<Block2> m = u.block_moments();
  const GrowthEnvelope env = growth_envelope(m);
  for (std::size_t n = 0; n < m.size(); ++n) {
    EXPECT_LE(m[n].cwiseAbs().rowwise().sum().maxCoeff(), env.bound(static_cast<int>(n)) * (1 + 1e-12));
  }
}

TEST(Functional, ExpEvolveMatchesMatrixExponential) {
  const LatticeState s = preset_random(6, 12);
  const BlockJacobi j = lattice_to_blocks(s);
  const VectorFunctional u0 = moments_from_operator(j, 90, MomentWindow::finite_section);
  const CMatrix dense = oracle::scalar_operator(s);
  const Block2 m = j.gauge(), mi = m.inverse();
  for (double t : {0.1, 0.3, -0.2}) {
    const VectorFunctional ut = exp_evolve(u0, t, 8);
    const CMatrix e = expm_taylor(dense, t);
    const Block2 e0 = mi * e.topLeftCorner(2, 2) * m;
    for (int n = 0; n < 8; ++n) {
      const Block2 want = mi * (oracle::matrix_power(dense, n) * e).topLeftCorner(2, 2) * m * e0.inverse();
      EXPECT_LT(max_abs(ut.block_moment(n) - want), 1e-10 * std::max(1.0, max_abs(want))) << t << " " << n;
    }
  }
}

TEST(Functional, ExpEvolveAtZeroIsNormalization) {
  const VectorFunctional u = random_functional(9, 10);
  const VectorFunctional v = exp_evolve(u, 0.0);
  EXPECT_LT(max_abs(v.block_moment(0) - identity2()), 1e-14);
  EXPECT_THROW(exp_evolve(u, 0.0, 6), SeriesNotConverged);
}

TEST(Functional, ExpEvolveReportsShortSeries) {
  const VectorFunctional u = moments_from_operator(lattice_to_blocks(preset_random(8, 2)), 15);
  EXPECT_THROW(exp_evolve(u, 2.0, 4), SeriesNotConverged);
}
