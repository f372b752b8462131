#ifndef FKT_FUNCTIONAL_HPP
#define FKT_FUNCTIONAL_HPP

#include <optional>
#include <vector>

#include "fkt/operator.hpp"
#include "fkt/polynomial.hpp"

namespace fkt {

/// Vector of linear functionals U = [u^1, u^2]^T, stored as scalar moments
/// mu1[k] = <u^1, x^k>, mu2[k] = <u^2, x^k> for k = 0..K_max.
struct VectorFunctional {
  std::vector<cplx> mu1;
  std::vector<cplx> mu2;

  int k_max() const { return static_cast<int>(std::min(mu1.size(), mu2.size())) - 1; }

  /// Number of complete block moments U_0..U_{count-1}.
  int block_count() const { return (k_max() + 1) / 2; }

  /// U_j = U(x^{2j} P_0).
  Block2 block_moment(int j) const {
    if (j < 0 || 2 * j + 1 > k_max()) {
      throw DegreeOverflow("block moment U_" + std::to_string(j) + " needs degree " + std::to_string(2 * j + 1) +
                           " but K_max = " + std::to_string(k_max()));
    }
    const auto e = static_cast<std::size_t>(2 * j);
    return block(mu1[e], mu2[e], mu1[e + 1], mu2[e + 1]);
  }

  std::vector<Block2> block_moments() const {
    std::vector<Block2> out;
    for (int j = 0; j < block_count(); ++j) out.push_back(block_moment(j));
    return out;
  }

  static VectorFunctional from_block_moments(const std::vector<Block2>& moments) {
    VectorFunctional u;
    for (const Block2& m : moments) {
      u.mu1.push_back(m(0, 0));
      u.mu1.push_back(m(1, 0));
      u.mu2.push_back(m(0, 1));
      u.mu2.push_back(m(1, 1));
    }
    return u;
  }

  bool is_normalized(double tol = 1e-12) const {
    return k_max() >= 1 && max_abs(block_moment(0) - identity2()) <= tol;
  }
};

/// U(P) = [[<u1,p1>, <u2,p1>], [<u1,p2>, <u2,p2>]].
inline Block2 act(const VectorFunctional& u, const VectorPoly& p) {
  const int deg = p.max_degree();
  if (deg > u.k_max()) {
    throw DegreeOverflow("polynomial of degree " + std::to_string(deg) + " exceeds K_max = " +
                         std::to_string(u.k_max()));
  }
  Block2 out = zero2();
  for (int k = 0; k <= deg; ++k) {
    const auto ks = static_cast<std::size_t>(k);
    const cplx t = coeff(p.top, k);
    const cplx b = coeff(p.bot, k);
    out(0, 0) += t * u.mu1[ks];
    out(0, 1) += t * u.mu2[ks];
    out(1, 0) += b * u.mu1[ks];
    out(1, 1) += b * u.mu2[ks];
  }
  return out;
}

/// (x^{2k} U)(p) = U(x^{2k} p).
inline Block2 act_shifted(const VectorFunctional& u, int k, const VectorPoly& p) { return act(u, shift(p, 2 * k)); }

/// Left multiplication by a matrix polynomial in x:
///   (A U)(P) = sum_k (x^k U)(P) A_k^T.
/// The new moments are <v^j, x^n> = sum_k sum_l (A_k)_{jl} <u^l, x^{n+k}>.
inline VectorFunctional left_multiply(const MatrixPoly& a_poly, const VectorFunctional& u) {
  const int deg = std::max(a_poly.degree(), 0);
  const int k_new = u.k_max() - deg;
  if (k_new < 1) {
    throw DegreeOverflow("left multiplier of degree " + std::to_string(deg) + " leaves no moments (K_max = " +
                         std::to_string(u.k_max()) + ")");
  }
  VectorFunctional out;
  out.mu1.assign(static_cast<std::size_t>(k_new + 1), cplx(0.0));
  out.mu2.assign(static_cast<std::size_t>(k_new + 1), cplx(0.0));
  for (int n = 0; n <= k_new; ++n) {
    const auto ns = static_cast<std::size_t>(n);
    for (int k = 0; k <= deg; ++k) {
      const Block2 ak = a_poly.coeff(k);
      const auto nk = static_cast<std::size_t>(n + k);
      out.mu1[ns] += ak(0, 0) * u.mu1[nk] + ak(0, 1) * u.mu2[nk];
      out.mu2[ns] += ak(1, 0) * u.mu1[nk] + ak(1, 1) * u.mu2[nk];
    }
  }
  return out;
}

/// Normalized functional: U(P) (U(P_0))^{-1}, realized as left multiplication
/// by the constant ((U(P_0))^{-1})^T.
inline VectorFunctional normalize(const VectorFunctional& u) {
  const Block2 u0 = u.block_moment(0);
  if (is_numerically_singular(u0, 1e-12)) throw SingularNormalization("U(P_0) is numerically singular");
  return left_multiply(MatrixPoly::constant(u0.inverse().transpose()), u);
}

// ---------------------------------------------------------------------------

struct HankelBlock {
  int order = 0;
  std::vector<std::vector<Block2>> entries;  // entries[i][j] = U_{i+j}

  CMatrix scalar() const {
    const Eigen::Index n = 2 * (order + 1);
    CMatrix h(n, n);
    for (int i = 0; i <= order; ++i)
      for (int j = 0; j <= order; ++j)
        h.block<2, 2>(2 * i, 2 * j) = entries[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    return h;
  }
};

inline HankelBlock hankel(const VectorFunctional& u, int m) {
  if (m < 0 || 2 * (2 * m) + 1 > u.k_max()) {
    throw DegreeOverflow("Hankel matrix of order " + std::to_string(m) + " needs K_max >= " +
                         std::to_string(4 * m + 1));
  }
  HankelBlock h;
  h.order = m;
  h.entries.assign(static_cast<std::size_t>(m + 1), std::vector<Block2>(static_cast<std::size_t>(m + 1)));
  for (int i = 0; i <= m; ++i)
    for (int j = 0; j <= m; ++j)
      h.entries[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = u.block_moment(i + j);
  return h;
}

inline constexpr double kQuasiDefiniteTol = 1e-10;

/// For each order m <= m_max: do all leading principal submatrices of the
/// scalar 2(m+1) Hankel matrix have reciprocal condition number (smallest over
/// largest singular value) above kQuasiDefiniteTol?
inline std::vector<bool> quasidefinite_check(const VectorFunctional& u, int m_max) {
  const CMatrix h = hankel(u, m_max).scalar();
  std::vector<bool> minor_ok(static_cast<std::size_t>(h.rows()));
  for (Eigen::Index k = 1; k <= h.rows(); ++k) {
    const Eigen::JacobiSVD<CMatrix> svd(h.topLeftCorner(k, k));
    const auto& sv = svd.singularValues();
    minor_ok[static_cast<std::size_t>(k - 1)] = sv(0) > 0.0 && sv(k - 1) > kQuasiDefiniteTol * sv(0);
  }
  std::vector<bool> flags;
  bool ok = true;
  for (int m = 0; m <= m_max; ++m) {
    for (int k = 2 * m; k < 2 * m + 2; ++k) ok = ok && minor_ok[static_cast<std::size_t>(k)];
    flags.push_back(ok);
  }
  return flags;
}

// ---------------------------------------------------------------------------

enum class MomentWindow {
  /// Only powers whose band stays inside the truncation (n <= 2N - 1); these
  /// agree with the untruncated operator.
  strict,
  /// Any power of the finite section itself.
  finite_section,
};

/// Normalized functional with U_n = M^{-1} (J^n)_{00} M, n = 0..n_max.
inline VectorFunctional moments_from_operator(const BlockJacobi& j, int n_max,
                                              MomentWindow window = MomentWindow::strict) {
  if (n_max < 0) throw std::invalid_argument("moments_from_operator: negative order");
  if (window == MomentWindow::strict && n_max > 2 * j.blocks - 1) {
    throw TruncationTooSmall("moment U_" + std::to_string(n_max) + " needs more than " + std::to_string(j.blocks) +
                             " block rows");
  }
  const Block2 m = j.gauge();
  const Block2 m_inv = m.inverse();
  std::vector<Block2> moments = corner_powers(j, n_max + 1);
  for (Block2& x : moments) x = (m_inv * x * m).eval();
  return VectorFunctional::from_block_moments(moments);
}

// ---------------------------------------------------------------------------

/// Geometric envelope |U_n| <= kappa rho^n over the stored block moments
/// (infinity norms). rho is the root-test maximum of (|U_n| / |U_0|)^{1/n}.
struct GrowthEnvelope {
  double kappa = 0.0;
  double rho = 0.0;

  double bound(int n) const { return kappa * std::pow(rho, n); }
};

inline GrowthEnvelope growth_envelope(const std::vector<Block2>& moments, double rho_hint = 0.0) {
  auto norm = [](const Block2& b) { return b.cwiseAbs().rowwise().sum().maxCoeff(); };
  GrowthEnvelope env;
  if (moments.empty()) return env;
  const double u0 = std::max(norm(moments[0]), 1e-300);
  env.rho = rho_hint;
  if (env.rho <= 0.0) {
    for (std::size_t n = 1; n < moments.size(); ++n) {
      env.rho = std::max(env.rho, std::pow(norm(moments[n]) / u0, 1.0 / static_cast<double>(n)));
    }
  }
  env.kappa = u0;
  if (env.rho > 0.0) {
    for (std::size_t n = 1; n < moments.size(); ++n) {
      env.kappa = std::max(env.kappa, norm(moments[n]) / std::pow(env.rho, static_cast<double>(n)));
    }
  }
  return env;
}

inline constexpr double kExpSeriesTol = 1e-13;

/// normalize(e^{x^2 t} U0), with
///   (e^{x^2 t} U0)(P_j) = sum_k t^k / k! U0_{j+k}.
///
/// With the envelope |U0_i| <= kappa rho^i of the stored moments, the tail of
/// block j after K terms is at most
///   kappa rho^j (|t| rho)^K / K! e^{|t| rho},
/// and the sum is cut once that falls below tol * kappa rho^j. The cut must
/// happen before the stored moments run out. If `blocks_out` is given, block
/// moments 0..blocks_out-1 must all converge; otherwise the longest converging
/// prefix is returned.
inline VectorFunctional exp_evolve(const VectorFunctional& u0, double t, std::optional<int> blocks_out = std::nullopt,
                                   double tol = kExpSeriesTol) {
  const std::vector<Block2> m0 = u0.block_moments();
  const int avail = static_cast<int>(m0.size());
  if (t == 0.0) {
    if (blocks_out && *blocks_out > avail) {
      throw SeriesNotConverged("need " + std::to_string(*blocks_out) + " block moments, K_max = " +
                               std::to_string(u0.k_max()));
    }
    return normalize(u0);
  }
  const GrowthEnvelope env = growth_envelope(m0);
  const double x = std::abs(t) * env.rho;
  const double growth = std::exp(x);

  std::vector<Block2> out;
  const int wanted = blocks_out.value_or(avail);
  for (int j = 0; j < wanted; ++j) {
    Block2 sum = zero2();
    double coef = 1.0;   // t^k / k!
    double ratio = 1.0;  // (|t| rho)^K / K!
    bool converged = false;
    for (int k = 0; j + k < avail; ++k) {
      sum += coef * m0[static_cast<std::size_t>(j + k)];
      coef *= t / static_cast<double>(k + 1);
      ratio *= x / static_cast<double>(k + 1);
      if (ratio * growth < tol) {
        converged = true;
        break;
      }
    }
    if (!converged) {
      if (blocks_out || j == 0) {
        throw SeriesNotConverged("exponential moment series for U_" + std::to_string(j) + " at t = " +
                                 std::to_string(t) + " does not reach tolerance with K_max = " +
                                 std::to_string(u0.k_max()));
      }
      break;
    }
    out.push_back(sum);
  }
  return normalize(VectorFunctional::from_block_moments(out));
}

}  // namespace fkt

#endif  // FKT_FUNCTIONAL_HPP
