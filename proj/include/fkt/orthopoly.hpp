#ifndef FKT_ORTHOPOLY_HPP
#define FKT_ORTHOPOLY_HPP

#include <numbers>
#include <tuple>
#include <vector>

#include "fkt/functional.hpp"

namespace fkt {

// ---------------------------------------------------------------------------
// Polynomial sequences
// ---------------------------------------------------------------------------

/// Monic p_0..p_{n_max} from the five-term recurrence
///   p_{n+2} = x^2 p_n - a_{n+2} p_{n+1} - b_{n+1} p_n - c_n p_{n-1} - d_{n-1} p_{n-2},
/// with p_{-2} = p_{-1} = 0, p_0 = 1, p_1 = x - a_1.
inline std::vector<ScalarPoly> five_term_sequence(const LatticeState& s, int n_max) {
  std::vector<ScalarPoly> p;
  if (n_max < 0) return p;
  p.push_back({1.0});
  if (n_max >= 1) p.push_back({-s.a(1), 1.0});
  auto prev = [&](int k) -> ScalarPoly { return k >= 0 ? p[static_cast<std::size_t>(k)] : ScalarPoly{}; };
  for (int n = 0; n + 2 <= n_max; ++n) {
    ScalarPoly next = shift(prev(n), 2) - s.a(n + 2) * prev(n + 1) - s.b(n + 1) * prev(n) -
                      s.c(n) * prev(n - 1) - s.d(n - 1) * prev(n - 2);
    next.resize(static_cast<std::size_t>(n + 3), cplx(0.0));
    p.push_back(std::move(next));
  }
  return p;
}

/// B_0..B_{m_max} from x^2 B_m = A_m B_{m+1} + B_m B_m + C_m B_{m-1},
/// B_{-1} = 0, B_0 = [1, x - a_1]^T. Needs m_max <= N.
inline std::vector<VectorPoly> vector_sequence(const BlockJacobi& j, int m_max) {
  if (m_max > j.blocks) throw TruncationTooSmall("B_" + std::to_string(m_max) + " needs A_" + std::to_string(m_max - 1));
  std::vector<VectorPoly> out;
  if (m_max < 0) return out;
  out.push_back({{1.0}, {-j.a1, 1.0}});
  VectorPoly before{{}, {}};
  for (int m = 0; m < m_max; ++m) {
    const auto mi = static_cast<std::size_t>(m);
    const VectorPoly& cur = out.back();
    VectorPoly rhs = shift(cur, 2) - j.B[mi] * cur - j.C[mi] * before;
    before = cur;
    out.push_back(j.A[mi].inverse() * rhs);
  }
  return out;
}

/// V_0..V_{m_max} from y V_m = A_m V_{m+1} + B_m V_m + C_m V_{m-1},
/// V_{-1} = 0, V_0 = M.
inline std::vector<MatrixPoly> matrix_sequence(const BlockJacobi& j, int m_max) {
  if (m_max > j.blocks) throw TruncationTooSmall("V_" + std::to_string(m_max) + " needs A_" + std::to_string(m_max - 1));
  std::vector<MatrixPoly> out;
  if (m_max < 0) return out;
  out.push_back(MatrixPoly::constant(j.gauge()));
  MatrixPoly before;
  for (int m = 0; m < m_max; ++m) {
    const auto mi = static_cast<std::size_t>(m);
    const MatrixPoly& cur = out.back();
    MatrixPoly rhs = shift(cur) - j.B[mi] * cur - j.C[mi] * before;
    before = cur;
    out.push_back(j.A[mi].inverse() * rhs);
  }
  return out;
}

inline constexpr double kSingularTol = 1e-12;

/// G_0..G_{n_max} from y G_n = G_{n+1} C_{n+1} + G_n B_n + G_{n-1} A_{n-1},
/// G_{-1} = 0, G_0 = (U(B_0))^{-1}. Needs n_max <= N - 1.
inline std::vector<MatrixPoly> g_sequence(const BlockJacobi& j, const VectorFunctional& u, int n_max) {
  if (n_max > j.blocks - 1) throw TruncationTooSmall("G_" + std::to_string(n_max) + " needs C_" + std::to_string(n_max));
  std::vector<MatrixPoly> out;
  if (n_max < 0) return out;
  const VectorPoly b0{{1.0}, {-j.a1, 1.0}};
  out.push_back(MatrixPoly::constant(inverse_or_throw<SingularC>(act(u, b0), kSingularTol, "U(B_0)")));
  MatrixPoly before;
  for (int n = 0; n < n_max; ++n) {
    const auto ni = static_cast<std::size_t>(n);
    const Block2 c_inv = inverse_or_throw<SingularC>(j.C[ni + 1], kSingularTol, "C_" + std::to_string(n + 1));
    const MatrixPoly& cur = out.back();
    MatrixPoly rhs = shift(cur) - cur * j.B[ni];
    if (n >= 1) rhs = rhs - before * j.A[ni - 1];
    before = cur;
    out.push_back(rhs * c_inv);
  }
  return out;
}

/// ((G(x^2))^T U)(b) = sum_k U(x^{2k} b) G_k.
inline Block2 pairing_functional(const MatrixPoly& g, const VectorPoly& b, const VectorFunctional& u) {
  Block2 out = zero2();
  for (int k = 0; k < static_cast<int>(g.coeffs.size()); ++k) {
    out += act_shifted(u, k, b) * g.coeffs[static_cast<std::size_t>(k)];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Generating functions
// ---------------------------------------------------------------------------

inline double inf_norm(const Block2& b) { return b.cwiseAbs().rowwise().sum().maxCoeff(); }

struct MarkovOptions {
  /// Growth radius rho with |U_n| <~ kappa rho^n; <= 0 estimates it from the
  /// stored moments by the root test.
  double radius = 0.0;
  double tol = 1e-14;
};

/// F(z) = sum_n U_n / z^{n+1}, summed until the geometric tail
/// kappa (rho/|z|)^K / (|z| - rho) drops below tol. Requires |z| > 1.5 rho.
inline Block2 markov_function(const VectorFunctional& u, cplx z, const MarkovOptions& opts = {}) {
  const std::vector<Block2> moments = u.block_moments();
  if (moments.empty()) throw SeriesNotConverged("functional has no block moments");
  const GrowthEnvelope env = growth_envelope(moments, opts.radius);
  const double rho = env.rho;
  const double kappa = env.kappa;
  const double az = std::abs(z);
  if (!(az > 1.5 * rho)) {
    throw SeriesNotConverged("|z| = " + std::to_string(az) + " is inside 1.5 x growth radius " + std::to_string(rho));
  }
  Block2 sum = zero2();
  cplx zpow = 1.0 / z;
  for (std::size_t n = 0; n < moments.size(); ++n) {
    sum += moments[n] * zpow;
    zpow /= z;
    const double tail = rho > 0.0 ? kappa * std::pow(rho / az, static_cast<double>(n + 1)) / (az - rho) : 0.0;
    if (tail < opts.tol) return sum;
  }
  throw SeriesNotConverged("Markov series exhausted " + std::to_string(moments.size()) +
                           " block moments before reaching tolerance");
}

/// LU of zI - J (or its transpose), rejecting numerically singular shifts.
/// The rcond estimate alone can miss an exactly zero pivot, so the pivot
/// ratio is checked as well.
inline Eigen::PartialPivLU<CMatrix> resolvent_lu(CMatrix a) {
  Eigen::PartialPivLU<CMatrix> lu(a);
  const Eigen::VectorXd piv = lu.matrixLU().diagonal().cwiseAbs();
  const double rcond = lu.rcond();
  if (!(piv.minCoeff() > 1e-14 * piv.maxCoeff()) || !(rcond > 1e-14) || !std::isfinite(rcond)) {
    throw SingularResolvent("zI - J is numerically singular");
  }
  return lu;
}

enum class WeylMethod { series, finite_section };

/// Top-left block of the resolvent of the finite section.
inline Block2 weyl_function(const BlockJacobi& j, cplx z, WeylMethod method = WeylMethod::finite_section,
                            double tol = 1e-15) {
  const Eigen::Index n = 2 * j.blocks;
  if (method == WeylMethod::finite_section) {
    CMatrix a = -dense_operator(j);
    a.diagonal().array() += z;
    const Eigen::PartialPivLU<CMatrix> lu = resolvent_lu(std::move(a));
    CMatrix e0 = CMatrix::Zero(n, 2);
    e0.topRows(2) = identity2();
    return lu.solve(e0).topRows(2);
  }
  const double rho = operator_norm_bound(j);
  const double az = std::abs(z);
  if (!(az > 1.5 * rho)) {
    throw SeriesNotConverged("|z| = " + std::to_string(az) + " is inside 1.5 x norm bound " + std::to_string(rho));
  }
  CMatrix v = CMatrix::Zero(n, 2);
  v.topRows(2) = identity2();
  Block2 sum = zero2();
  cplx zpow = 1.0 / z;
  for (int k = 0; k < 100000; ++k) {
    sum += Block2(v.topRows(2)) * zpow;
    zpow /= z;
    if (std::pow(rho / az, k + 1) / (az - rho) < tol * std::max(1.0, inf_norm(sum))) return sum;
    v = apply_operator(j, v);
  }
  throw SeriesNotConverged("Weyl series did not converge");
}

// ---------------------------------------------------------------------------
// Contour integrals
// ---------------------------------------------------------------------------

struct ContourSpec {
  cplx center{0.0};
  double radius = 0.0;
  int nodes = 256;

  void validate() const {
    if (!(radius > 0.0)) throw std::invalid_argument("contour radius must be positive");
    if (nodes < 64 || nodes % 2 != 0) throw std::invalid_argument("contour needs an even node count >= 64");
  }

  /// Circle of radius 2 x the operator norm bound.
  static ContourSpec around(const BlockJacobi& j, int nodes = 256) {
    return ContourSpec{0.0, 2.0 * std::max(operator_norm_bound(j), 1e-3), nodes};
  }
};

/// Trapezoidal rule for (1/2 pi i) \oint f(z) dz on the circle.
template <class F>
Block2 contour_integral(const ContourSpec& c, F&& integrand) {
  c.validate();
  Block2 sum = zero2();
  for (int k = 0; k < c.nodes; ++k) {
    const double theta = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(c.nodes);
    const cplx w = c.radius * std::exp(cplx(0.0, theta));
    sum += integrand(c.center + w) * w;
  }
  return sum / static_cast<double>(c.nodes);
}

/// (1/2 pi i) \oint V(z) F(z) G(z) dz with F summed from the moments of u.
/// The integrand is evaluated as written, so roundoff grows like
/// |V(z)| |F(z)| |G(z)| on the contour.
inline Block2 pairing_contour(const MatrixPoly& v, const MatrixPoly& g, const VectorFunctional& u, const ContourSpec& c,
                              const MarkovOptions& opts = {}) {
  return contour_integral(c, [&](cplx z) -> Block2 { return v(z) * markov_function(u, z, opts) * g(z); });
}

/// Decaying parts of F(z) G_n(z), n = 0..n_max:
///   Q_n(z) = M^{-1} [(zI - J)^{-1}]_{0,n}.
/// The row [G_0, G_1, ...] solves G J = z G, and Q is the solution of the same
/// recurrence that decays like z^{-n-1}; F G_n - Q_n is a polynomial in z.
inline std::vector<Block2> right_second_kind(const BlockJacobi& j, cplx z, int n_max) {
  if (n_max > j.blocks - 1) throw TruncationTooSmall("Q_" + std::to_string(n_max) + " outside the truncation");
  const Eigen::Index n = 2 * j.blocks;
  CMatrix a = -dense_operator(j).transpose();
  a.diagonal().array() += z;
  const Eigen::PartialPivLU<CMatrix> lu = resolvent_lu(std::move(a));
  CMatrix e0 = CMatrix::Zero(n, 2);
  e0.topRows(2) = identity2();
  const CMatrix row = lu.solve(e0).transpose();  // E_0^T (zI - J)^{-1}
  const Block2 m_inv = j.gauge().inverse();
  std::vector<Block2> out;
  for (int k = 0; k <= n_max; ++k) out.push_back(m_inv * row.block(0, 2 * k, 2, 2));
  return out;
}

/// (1/2 pi i) \oint V(z) F(z) G_n(z) dz with F G_n replaced by its decaying
/// part Q_n. The dropped polynomial integrates to zero, and the integrand stays
/// of size |z|^{deg V - n - 1} instead of |V| |F| |G_n|.
inline Block2 pairing_contour(const MatrixPoly& v, const BlockJacobi& j, int n, const ContourSpec& c) {
  return contour_integral(c, [&](cplx z) -> Block2 { return v(z) * right_second_kind(j, z, n).back(); });
}

struct RecurrenceBlocks {
  Block2 A;
  Block2 B;
  Block2 C;
};

/// A_m, B_m, C_m as (1/2 pi i) \oint z V_m F G_{m+1}, G_m, G_{m-1} dz.
/// vs must reach index m, gs index m+1.
inline RecurrenceBlocks coeffs_from_F(const std::vector<MatrixPoly>& vs, const std::vector<MatrixPoly>& gs,
                                      const VectorFunctional& u, int m, const ContourSpec& c,
                                      const MarkovOptions& opts = {}) {
  if (m < 0 || m >= static_cast<int>(vs.size()) || m + 1 >= static_cast<int>(gs.size())) {
    throw std::out_of_range("coeffs_from_F: sequences too short for order " + std::to_string(m));
  }
  const auto mi = static_cast<std::size_t>(m);
  c.validate();
  // One Markov evaluation per node serves all three integrals.
  RecurrenceBlocks out{zero2(), zero2(), zero2()};
  for (int k = 0; k < c.nodes; ++k) {
    const double theta = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(c.nodes);
    const cplx w = c.radius * std::exp(cplx(0.0, theta));
    const cplx z = c.center + w;
    const Block2 left = z * vs[mi](z) * markov_function(u, z, opts);
    out.A += left * gs[mi + 1](z) * w;
    out.B += left * gs[mi](z) * w;
    if (m >= 1) out.C += left * gs[mi - 1](z) * w;
  }
  const double q = static_cast<double>(c.nodes);
  out.A /= q;
  out.B /= q;
  out.C /= q;
  return out;
}

/// Same three integrals with F G_k replaced by the decaying parts Q_k.
inline RecurrenceBlocks coeffs_from_F(const BlockJacobi& j, int m, const ContourSpec& c) {
  if (m < 0 || m + 1 > j.blocks - 1) throw TruncationTooSmall("coeffs_from_F: order " + std::to_string(m) + " needs Q_" + std::to_string(m + 1));
  c.validate();
  const MatrixPoly v = matrix_sequence(j, m).back();
  RecurrenceBlocks out{zero2(), zero2(), zero2()};
  for (int k = 0; k < c.nodes; ++k) {
    const double theta = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(c.nodes);
    const cplx w = c.radius * std::exp(cplx(0.0, theta));
    const cplx z = c.center + w;
    const std::vector<Block2> q = right_second_kind(j, z, m + 1);
    const Block2 left = z * v(z);
    const auto mi = static_cast<std::size_t>(m);
    out.A += left * q[mi + 1] * w;
    out.B += left * q[mi] * w;
    if (m >= 1) out.C += left * q[mi - 1] * w;
  }
  const double q = static_cast<double>(c.nodes);
  out.A /= q;
  out.B /= q;
  out.C /= q;
  return out;
}

}  // namespace fkt

#endif  // FKT_ORTHOPOLY_HPP
