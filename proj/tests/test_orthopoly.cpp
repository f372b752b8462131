#include <gtest/gtest.h>

#include "fkt/orthopoly.hpp"
#include "oracles.hpp"

using namespace fkt;

namespace {

double poly_distance(const ScalarPoly& l, const ScalarPoly& r) {
  double worst = 0.0;
  for (int k = 0; k < static_cast<int>(std::max(l.size(), r.size())); ++k) {
    worst = std::max(worst, std::abs(coeff(l, k) - coeff(r, k)));
  }
  return worst;
}

struct Fixture {
  LatticeState s;
  BlockJacobi j;
  VectorFunctional u;
  explicit Fixture(std::uint64_t seed, int n = 8) : s(preset_random(n, seed)), j(lattice_to_blocks(s)) {
    u = moments_from_operator(j, 2 * n - 1);
  }
};

}  // namespace

TEST(Polynomials, PackUnpackRoundTrip) {
  const VectorPoly b{{1.0, 2.0, 3.0, 4.0, 5.0}, {0.5, -1.0, cplx(0, 2)}};
  const VectorPoly back = pack(unpack(b));
  EXPECT_EQ(poly_distance(back.top, b.top), 0.0);
  EXPECT_EQ(poly_distance(back.bot, b.bot), 0.0);
}

TEST(Polynomials, FiveTermMatchesVectorSequence) {
  const Fixture f(3);
  const std::vector<ScalarPoly> p = five_term_sequence(f.s, 13);
  const std::vector<VectorPoly> bs = vector_sequence(f.j, 6);
  for (int m = 0; m <= 6; ++m) {
    EXPECT_LT(poly_distance(bs[m].top, p[2 * m]), 1e-12) << m;
    EXPECT_LT(poly_distance(bs[m].bot, p[2 * m + 1]), 1e-12) << m;
  }
}

TEST(Polynomials, MonicDegrees) {
  const Fixture f(4);
  const std::vector<ScalarPoly> p = five_term_sequence(f.s, 11);
  for (int n = 0; n <= 11; ++n) {
    EXPECT_EQ(degree(p[n]), n);
    EXPECT_EQ(p[n].back(), cplx(1.0));
  }
}

TEST(Polynomials, MatrixSequenceIsUnpackedVectorSequence) {
  const Fixture f(5);
  const std::vector<VectorPoly> bs = vector_sequence(f.j, 5);
  const std::vector<MatrixPoly> vs = matrix_sequence(f.j, 5);
  for (int m = 0; m <= 5; ++m) {
    const MatrixPoly w = unpack(bs[m]);
    for (int k = 0; k <= m; ++k) EXPECT_LT(max_abs(w.coeff(k) - vs[m].coeff(k)), 1e-12);
  }
}

TEST(Polynomials, VectorSequenceIsEigenvectorOfOperator) {
  // [B_0; B_1; ...] (x) is annihilated by x^2 - J on all but the last block row.
  const Fixture f(6, 6);
  const std::vector<VectorPoly> bs = vector_sequence(f.j, 6);
  const CMatrix dense = dense_operator(f.j);
  for (cplx x : {cplx(0.7, 0.1), cplx(-1.3, 0.4)}) {
    CVector p(12);
    for (int m = 0; m < 6; ++m) {
      p(2 * m) = evaluate(bs[m].top, x);
      p(2 * m + 1) = evaluate(bs[m].bot, x);
    }
    const CVector r = dense * p - x * x * p;
    EXPECT_LT(r.head(10).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Orthogonality, PairingFunctionalIsBiorthogonal) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const Fixture f(seed);
    const std::vector<VectorPoly> bs = vector_sequence(f.j, 6);
    const std::vector<MatrixPoly> gs = g_sequence(f.j, f.u, 6);
    for (int n = 0; n <= 6; ++n)
      for (int m = 0; m <= 6; ++m) {
        const Block2 want = n == m ? identity2() : zero2();
        EXPECT_LT(max_abs(pairing_functional(gs[n], bs[m], f.u) - want), 1e-8) << n << " " << m;
      }
  }
}

TEST(Orthogonality, GSequenceNeedsInvertibleC) {
  Fixture f(2);
  f.j.C[3] = zero2();
  EXPECT_THROW(g_sequence(f.j, f.u, 5), SingularC);
}

TEST(Weyl, SeriesAgreesWithFiniteSection) {
  const Fixture f(7);
  const double r = 2.0 * operator_norm_bound(f.j);
  for (cplx z : {cplx(r, 0.0), cplx(0.0, -r), r * std::exp(cplx(0.0, 2.0))}) {
    const Block2 a = weyl_function(f.j, z), b = weyl_function(f.j, z, WeylMethod::series);
    EXPECT_LT(max_abs(a - b), 1e-13);
  }
  EXPECT_THROW(weyl_function(f.j, cplx(0.1), WeylMethod::series), SeriesNotConverged);
}

TEST(Weyl, FiniteSectionIsResolventCorner) {
  const Fixture f(8, 5);
  const cplx z(0.3, 0.7);
  CMatrix a = -oracle::scalar_operator(f.s);
  a.diagonal().array() += z;
  const Block2 want = a.inverse().topLeftCorner(2, 2);
  EXPECT_LT(max_abs(weyl_function(f.j, z) - want), 1e-12);
}

TEST(Weyl, SingularResolventDetected) {
  // Only b nonzero: upper triangular with eigenvalues b_n.
  LatticeState s = LatticeState::zero(4);
  for (int n = 1; n <= s.length(Coef::b); ++n) s.set(Coef::b, n, 0.5 * n);
  EXPECT_THROW(weyl_function(lattice_to_blocks(s), cplx(1.5)), SingularResolvent);
}

TEST(Weyl, MarkovFunctionIsConjugatedWeylFunction) {
  const Fixture f(9, 10);
  const VectorFunctional uf = moments_from_operator(f.j, 150, MomentWindow::finite_section);
  MarkovOptions opts;
  opts.radius = operator_norm_bound(f.j);
  const Block2 m = f.j.gauge();
  for (int k = 0; k < 6; ++k) {
    const cplx z = 2.0 * opts.radius * std::exp(cplx(0.0, 1.0 + k));
    EXPECT_LT(max_abs(weyl_function(f.j, z) - m * markov_function(uf, z, opts) * m.inverse()), 1e-11);
  }
  EXPECT_THROW(markov_function(uf, cplx(opts.radius), opts), SeriesNotConverged);
}

TEST(Contour, IntegratesPolynomialsExactly) {
  const ContourSpec c{cplx(0.2, -0.1), 1.5, 64};
  // (1/2 pi i) \oint z^k dz = [k == -1]
  for (int k = -3; k <= 5; ++k) {
    const Block2 r = contour_integral(c, [&](cplx z) -> Block2 { return std::pow(z - c.center, k) * identity2(); });
    EXPECT_LT(max_abs(r - (k == -1 ? identity2() : zero2())), 1e-14) << k;
  }
  EXPECT_THROW(contour_integral(ContourSpec{0.0, 1.0, 63}, [](cplx) -> Block2 { return zero2(); }), std::invalid_argument);
  EXPECT_THROW(contour_integral(ContourSpec{0.0, 0.0, 64}, [](cplx) -> Block2 { return zero2(); }), std::invalid_argument);
}

TEST(Contour, SecondKindFunctionsSatisfyRightRecurrence) {
  const Fixture f(10);
  const cplx z(3.0, 1.0);
  const std::vector<Block2> q = right_second_kind(f.j, z, 6);
  for (int n = 1; n <= 5; ++n) {
    const Block2 rhs = q[n + 1] * f.j.C[n + 1] + q[n] * f.j.B[n] + q[n - 1] * f.j.A[n - 1];
    EXPECT_LT(max_abs(z * q[n] - rhs), 1e-12) << n;
  }
  EXPECT_THROW(right_second_kind(f.j, z, 8), TruncationTooSmall);
}

TEST(Contour, StableAndLiteralPairingsAgreeAtLowOrder) {
  const Fixture f(11);
  const VectorFunctional uf = moments_from_operator(f.j, 150, MomentWindow::finite_section);
  const std::vector<MatrixPoly> vs = matrix_sequence(f.j, 2);
  const std::vector<MatrixPoly> gs = g_sequence(f.j, f.u, 2);
  const ContourSpec c = ContourSpec::around(f.j);
  MarkovOptions opts;
  opts.radius = operator_norm_bound(f.j);
  for (int n = 0; n <= 2; ++n)
    for (int m = 0; m <= 2; ++m) {
      const Block2 literal = pairing_contour(vs[m], gs[n], uf, c, opts);
      const Block2 stable = pairing_contour(vs[m], f.j, n, c);
      EXPECT_LT(max_abs(literal - stable), 1e-6) << n << " " << m;
      EXPECT_LT(max_abs(stable - (n == m ? identity2() : zero2())), 1e-9) << n << " " << m;
    }
}

TEST(Contour, NodeRefinementIsConverged) {
  const Fixture f(12);
  const std::vector<MatrixPoly> vs = matrix_sequence(f.j, 6);
  ContourSpec c = ContourSpec::around(f.j, 256);
  ContourSpec fine = ContourSpec::around(f.j, 512);
  for (int n : {0, 3, 6}) {
    EXPECT_LT(max_abs(pairing_contour(vs[6 - n], f.j, n, c) - pairing_contour(vs[6 - n], f.j, n, fine)), 1e-10);
  }
}

TEST(Contour, RecoversRecurrenceBlocks) {
  const Fixture f(13);
  const ContourSpec c = ContourSpec::around(f.j);
  for (int m = 0; m <= 5; ++m) {
    const RecurrenceBlocks r = coeffs_from_F(f.j, m, c);
    EXPECT_LT(max_abs(r.A - f.j.A[m]), 1e-9) << m;
    EXPECT_LT(max_abs(r.B - f.j.B[m]), 1e-9) << m;
    if (m >= 1) {
      EXPECT_LT(max_abs(r.C - f.j.C[m]), 1e-9) << m;
    }
  }
  // Literal form at low order.
  const VectorFunctional uf = moments_from_operator(f.j, 150, MomentWindow::finite_section);
  MarkovOptions opts;
  opts.radius = operator_norm_bound(f.j);
  const RecurrenceBlocks r = coeffs_from_F(matrix_sequence(f.j, 1), g_sequence(f.j, f.u, 2), uf, 1, c, opts);
  EXPECT_LT(max_abs(r.A - f.j.A[1]), 1e-6);
  EXPECT_LT(max_abs(r.B - f.j.B[1]), 1e-6);
  EXPECT_LT(max_abs(r.C - f.j.C[1]), 1e-6);
}
