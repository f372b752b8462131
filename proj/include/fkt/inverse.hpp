#ifndef FKT_INVERSE_HPP
#define FKT_INVERSE_HPP

#include <vector>

#include "fkt/orthopoly.hpp"

namespace fkt {

struct ReconstructionReport {
  BlockJacobi jacobi;           // orders 0..m_max
  std::vector<VectorPoly> bs;   // B_0..B_{m_max+1}
  std::vector<Block2> delta;    // Delta_0..Delta_{m_max+1}
  std::vector<bool> condition_flags;
  double residual = 0.0;          // max relative orthogonality defect
  double structure_defect = 0.0;  // max |(C_m)_{21}| relative to C_m
};

class QuasiDefiniteViolation : public NumericalError {
 public:
  QuasiDefiniteViolation(int order, ReconstructionReport partial)
      : NumericalError("QuasiDefiniteViolation", "orthogonality system of order " + std::to_string(order) +
                                                     " is singular"),
        order_(order),
        partial_(std::move(partial)) {}

  int order() const noexcept { return order_; }
  /// Blocks and polynomials up to the last order that succeeded.
  const ReconstructionReport& partial() const noexcept { return partial_; }

 private:
  int order_;
  ReconstructionReport partial_;
};

/// |(x^{2k} U)(b)| relative to the size of the terms summed to produce it.
inline double orthogonality_defect(const VectorFunctional& u, int k, const VectorPoly& b) {
  const Block2 value = act_shifted(u, k, b);
  double scale = 0.0;
  for (int l = 0; l < static_cast<int>(std::max(b.top.size(), b.bot.size())); ++l) {
    const auto idx = static_cast<std::size_t>(2 * k + l);
    if (static_cast<int>(idx) > u.k_max()) break;
    const double mu = std::max(std::abs(u.mu1[idx]), std::abs(u.mu2[idx]));
    scale = std::max(scale, std::max(std::abs(coeff(b.top, l)), std::abs(coeff(b.bot, l))) * mu);
  }
  return max_abs(value) / std::max(scale, 1.0);
}

/// Max orthogonality defect of B_m against x^{2k} U, k < m, over the sequence.
inline double orthogonality_defect(const VectorFunctional& u, const std::vector<VectorPoly>& bs) {
  double worst = 0.0;
  for (int m = 0; m < static_cast<int>(bs.size()); ++m)
    for (int k = 0; k < m; ++k) worst = std::max(worst, orthogonality_defect(u, k, bs[static_cast<std::size_t>(m)]));
  return worst;
}

/// Delta_m = (x^{2m} U)(B_m).
inline std::vector<Block2> delta_sequence(const VectorFunctional& u, const std::vector<VectorPoly>& bs) {
  std::vector<Block2> out;
  for (int m = 0; m < static_cast<int>(bs.size()); ++m) {
    const Block2 d = act_shifted(u, m, bs[static_cast<std::size_t>(m)]);
    if (is_numerically_singular(d, kSingularTol)) throw SingularDelta("Delta_" + std::to_string(m) + " is singular");
    out.push_back(d);
  }
  return out;
}

namespace detail {

/// Solves for the lower coefficients of one component of B_m with the leading
/// coefficient fixed to 1 at degree `lead`:
///   sum_l c_l <u^r, x^{2k+l}> = -<u^r, x^{2k+lead}>,  k < m, r = 1, 2,
/// plus, when `lead` is odd, the gauge row
///   sum_l c_l <w, x^{2m+l}> = -<w, x^{2m+lead}>,  w = u^1 + a_1 u^2,
/// which makes Delta_m M^{-1} upper triangular.
inline bool solve_component(const VectorFunctional& u, int m, int lead, cplx a1, ScalarPoly& out) {
  const Eigen::Index n = lead;
  CMatrix sys(n, n);
  CVector rhs(n);
  auto mu = [&](int r, int k) -> cplx {
    const auto ks = static_cast<std::size_t>(k);
    return r == 0 ? u.mu1[ks] : u.mu2[ks];
  };
  Eigen::Index row = 0;
  for (int k = 0; k < m; ++k) {
    for (int r = 0; r < 2; ++r, ++row) {
      for (int l = 0; l < lead; ++l) sys(row, l) = mu(r, 2 * k + l);
      rhs(row) = -mu(r, 2 * k + lead);
    }
  }
  if (lead % 2 == 1) {
    auto w = [&](int k) { return mu(0, k) + a1 * mu(1, k); };
    for (int l = 0; l < lead; ++l) sys(row, l) = w(2 * m + l);
    rhs(row) = -w(2 * m + lead);
    ++row;
  }
  CVector x;
  if (n > 0 && !solve_partial_pivot(sys, rhs, x)) return false;
  out.assign(static_cast<std::size_t>(lead + 1), cplx(0.0));
  for (Eigen::Index l = 0; l < n; ++l) out[static_cast<std::size_t>(l)] = x(l);
  out.back() = 1.0;
  return true;
}

inline void extract_blocks(ReconstructionReport& rep, int m_max) {
  std::vector<MatrixPoly> vs;
  for (const VectorPoly& b : rep.bs) vs.push_back(unpack(b));
  BlockJacobi& j = rep.jacobi;
  j.blocks = m_max + 1;
  j.A.assign(static_cast<std::size_t>(m_max + 1), zero2());
  j.B.assign(static_cast<std::size_t>(m_max + 1), zero2());
  j.C.assign(static_cast<std::size_t>(m_max + 1), zero2());
  for (int m = 0; m <= m_max; ++m) {
    const auto mi = static_cast<std::size_t>(m);
    const MatrixPoly& v = vs[mi];
    const MatrixPoly& up = vs[mi + 1];
    const Block2 lead_inv = v.coeff(m).inverse();
    // leading, y^m and y^{m-1} coefficients of y V_m = A V_{m+1} + B V_m + C V_{m-1}
    j.A[mi] = v.coeff(m) * up.coeff(m + 1).inverse();
    j.B[mi] = (v.coeff(m - 1) - j.A[mi] * up.coeff(m)) * lead_inv;
    if (m >= 1) {
      const MatrixPoly& down = vs[mi - 1];
      j.C[mi] = (v.coeff(m - 2) - j.A[mi] * up.coeff(m - 1) - j.B[mi] * v.coeff(m - 1)) *
                down.coeff(m - 1).inverse();
      rep.structure_defect =
          std::max(rep.structure_defect, std::abs(j.C[mi](1, 0)) / std::max(max_abs(j.C[mi]), 1e-300));
    }
  }
}

}  // namespace detail

/// Recovers the block recurrence coefficients of orders 0..m_max from a
/// normalized functional by solving the orthogonality conditions order by
/// order. Needs K_max >= 4 m_max + 5 (B_{m_max+1} fixes A_{m_max}).
inline ReconstructionReport reconstruct(const VectorFunctional& u, int m_max, cplx a1 = 0.0) {
  if (m_max < 0) throw std::invalid_argument("reconstruct: negative order");
  if (u.k_max() < 4 * m_max + 5) {
    throw DegreeOverflow("reconstruction to order " + std::to_string(m_max) + " needs K_max >= " +
                         std::to_string(4 * m_max + 5) + ", have " + std::to_string(u.k_max()));
  }
  if (!u.is_normalized(1e-10)) throw SingularNormalization("reconstruct expects a normalized functional");

  ReconstructionReport rep;
  rep.jacobi.a1 = a1;
  rep.condition_flags = quasidefinite_check(u, m_max);

  for (int m = 0; m <= m_max + 1; ++m) {
    VectorPoly b;
    if (m == 0) {
      b = {{1.0}, {-a1, 1.0}};
    } else {
      const bool ok = detail::solve_component(u, m, 2 * m, a1, b.top) &&
                      detail::solve_component(u, m, 2 * m + 1, a1, b.bot);
      if (!ok) {
        if (m >= 2) detail::extract_blocks(rep, m - 2);
        throw QuasiDefiniteViolation(m, std::move(rep));
      }
    }
    const Block2 d = act_shifted(u, m, b);
    if (is_numerically_singular(d, kSingularTol)) {
      if (m >= 2) detail::extract_blocks(rep, m - 2);
      throw QuasiDefiniteViolation(m, std::move(rep));
    }
    rep.bs.push_back(std::move(b));
    rep.delta.push_back(d);
  }
  detail::extract_blocks(rep, m_max);
  rep.residual = orthogonality_defect(u, rep.bs);
  return rep;
}

}  // namespace fkt

#endif  // FKT_INVERSE_HPP
