#ifndef FKT_OPERATOR_HPP
#define FKT_OPERATOR_HPP

#include <algorithm>
#include <functional>
#include <vector>

#include <Eigen/Eigenvalues>

#include "fkt/lattice.hpp"

namespace fkt {

/// Dense 2N x 2N truncation of J (free end: A_{N-1} is dropped).
inline CMatrix dense_operator(const BlockJacobi& j) {
  const Eigen::Index n = j.blocks;
  CMatrix out = CMatrix::Zero(2 * n, 2 * n);
  for (Eigen::Index m = 0; m < n; ++m) {
    const auto mi = static_cast<std::size_t>(m);
    out.block<2, 2>(2 * m, 2 * m) = j.B[mi];
    if (m + 1 < n) out.block<2, 2>(2 * m, 2 * m + 2) = j.A[mi];
    if (m >= 1) out.block<2, 2>(2 * m, 2 * m - 2) = j.C[mi];
  }
  return out;
}

/// J_: the strictly lower part of J.
inline CMatrix dense_lower_operator(const BlockJacobi& j) {
  return dense_operator(j).triangularView<Eigen::StrictlyLower>();
}

/// Largest block row whose n-step band still fits inside the truncation,
/// i.e. rows m with m + horizon <= N - 1.
inline int last_interior_row(int blocks, int horizon) { return blocks - 1 - horizon; }

/// Block-tridiagonal product y = J x with x a 2N x k block column.
inline CMatrix apply_operator(const BlockJacobi& j, const CMatrix& x) {
  const Eigen::Index n = j.blocks;
  CMatrix y = CMatrix::Zero(x.rows(), x.cols());
  for (Eigen::Index m = 0; m < n; ++m) {
    const auto mi = static_cast<std::size_t>(m);
    y.middleRows(2 * m, 2).noalias() += j.B[mi] * x.middleRows(2 * m, 2);
    if (m + 1 < n) y.middleRows(2 * m, 2).noalias() += j.A[mi] * x.middleRows(2 * m + 2, 2);
    if (m >= 1) y.middleRows(2 * m, 2).noalias() += j.C[mi] * x.middleRows(2 * m - 2, 2);
  }
  return y;
}

/// (J^n)_{row,col} (0-based block indices) on the truncated operator.
///
/// A product of n block-tridiagonal factors from block `col` to block `row`
/// visits at most block floor((row + col + n) / 2). When that stays below the
/// truncation, the result coincides with the infinite operator's block;
/// otherwise TruncationTooSmall is raised.
inline Block2 power_block(const BlockJacobi& j, int n, int row, int col) {
  if (n < 0) throw std::invalid_argument("power_block: negative exponent");
  if (row < 0 || col < 0 || row >= j.blocks || col >= j.blocks) {
    throw std::out_of_range("power_block: block index outside truncation");
  }
  if ((row + col + n) / 2 > j.blocks - 1) {
    throw TruncationTooSmall("power " + std::to_string(n) + " of block (" + std::to_string(row) + "," +
                             std::to_string(col) + ") reaches past " + std::to_string(j.blocks) +
                             " block rows");
  }
  CMatrix v = CMatrix::Zero(2 * j.blocks, 2);
  v.block<2, 2>(2 * col, 0) = identity2();
  for (int k = 0; k < n; ++k) v = apply_operator(j, v);
  return v.block<2, 2>(2 * row, 0);
}

/// Top-left blocks (J_T^k)_{00}, k = 0..count-1, of the finite section J_T.
inline std::vector<Block2> corner_powers(const BlockJacobi& j, int count) {
  std::vector<Block2> out;
  out.reserve(static_cast<std::size_t>(std::max(count, 0)));
  CMatrix v = CMatrix::Zero(2 * j.blocks, 2);
  v.topRows(2) = identity2();
  for (int k = 0; k < count; ++k) {
    out.push_back(v.topRows(2));
    if (k + 1 < count) v = apply_operator(j, v);
  }
  return out;
}

/// Places a lattice-shaped derivative into the matrix pattern of J (the
/// constant unit entries become zero).
inline CMatrix dense_derivative(const LatticeState& rate) {
  BlockJacobi j = lattice_to_blocks(rate);
  for (auto& a : j.A) {
    a(0, 0) = 0.0;
    a(1, 1) = 0.0;
  }
  return dense_operator(j);
}

/// max |(J J_ - J_ J) - J'| over block rows 0..N-2, where J' is the lattice
/// right-hand side laid out in matrix form. Pass interior_only = false to
/// include the last block row.
inline double commutator_residual(const LatticeState& s, bool interior_only = true) {
  const BlockJacobi j = lattice_to_blocks(s);
  const CMatrix J = dense_operator(j);
  const CMatrix L = dense_lower_operator(j);
  const CMatrix diff = (J * L - L * J) - dense_derivative(lax_rhs(s));
  const Eigen::Index rows = interior_only ? 2 * (last_interior_row(j.blocks, 1) + 1) : diff.rows();
  if (rows <= 0) return 0.0;
  return diff.topRows(rows).cwiseAbs().maxCoeff();
}

/// Row-sum (infinity) norm of the scalar operator rows, including the unit
/// entries of A_{N-1} that the square truncation drops.
inline double operator_norm_bound(const BlockJacobi& j) {
  const CMatrix dense = dense_operator(j);
  double best = 0.0;
  for (Eigen::Index r = 0; r < dense.rows(); ++r) {
    double sum = dense.row(r).cwiseAbs().sum();
    if (r >= dense.rows() - 2) sum += j.A.back().row(r - (dense.rows() - 2)).cwiseAbs().sum();
    best = std::max(best, sum);
  }
  return best;
}

namespace detail {

/// Strongly connected components of the nonzero pattern (Tarjan).
inline std::vector<std::vector<Eigen::Index>> strong_components(const CMatrix& m) {
  const Eigen::Index n = m.rows();
  std::vector<int> index(static_cast<std::size_t>(n), -1), low(static_cast<std::size_t>(n), 0);
  std::vector<char> on_stack(static_cast<std::size_t>(n), 0);
  std::vector<Eigen::Index> stack;
  std::vector<std::vector<Eigen::Index>> comps;
  int counter = 0;

  std::function<void(Eigen::Index)> visit = [&](Eigen::Index v) {
    const auto vi = static_cast<std::size_t>(v);
    index[vi] = low[vi] = counter++;
    stack.push_back(v);
    on_stack[vi] = 1;
    for (Eigen::Index w = 0; w < n; ++w) {
      if (w == v || m(v, w) == cplx(0.0)) continue;
      const auto wi = static_cast<std::size_t>(w);
      if (index[wi] < 0) {
        visit(w);
        low[vi] = std::min(low[vi], low[wi]);
      } else if (on_stack[wi]) {
        low[vi] = std::min(low[vi], index[wi]);
      }
    }
    if (low[vi] == index[vi]) {
      std::vector<Eigen::Index> comp;
      Eigen::Index w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[static_cast<std::size_t>(w)] = 0;
        comp.push_back(w);
      } while (w != v);
      std::sort(comp.begin(), comp.end());
      comps.push_back(std::move(comp));
    }
  };
  for (Eigen::Index v = 0; v < n; ++v)
    if (index[static_cast<std::size_t>(v)] < 0) visit(v);
  return comps;
}

inline bool lex_less(const cplx& l, const cplx& r) {
  if (l.real() != r.real()) return l.real() < r.real();
  return l.imag() < r.imag();
}

}  // namespace detail

/// Eigenvalues of an arbitrary dense matrix, sorted lexicographically by
/// (real, imag).
///
/// The matrix is first permuted to block triangular form along the strongly
/// connected components of its exact nonzero pattern; each diagonal block is
/// then diagonalized on its own. The truncated operator is a nilpotent shift
/// plus a banded perturbation, so most components are single entries whose
/// eigenvalue is read off exactly instead of being smeared by a defective
/// Jordan structure.
inline std::vector<cplx> matrix_spectrum(const CMatrix& m) {
  std::vector<cplx> eig;
  eig.reserve(static_cast<std::size_t>(m.rows()));
  for (const auto& comp : detail::strong_components(m)) {
    const auto k = static_cast<Eigen::Index>(comp.size());
    if (k == 1) {
      eig.push_back(m(comp[0], comp[0]));
      continue;
    }
    CMatrix sub(k, k);
    for (Eigen::Index r = 0; r < k; ++r)
      for (Eigen::Index c = 0; c < k; ++c) sub(r, c) = m(comp[static_cast<std::size_t>(r)], comp[static_cast<std::size_t>(c)]);
    Eigen::ComplexEigenSolver<CMatrix> solver(sub, false);
    if (solver.info() != Eigen::Success) throw EigensolverFailure("QR iteration did not converge");
    for (Eigen::Index r = 0; r < k; ++r) eig.push_back(solver.eigenvalues()(r));
  }
  std::sort(eig.begin(), eig.end(), detail::lex_less);
  return eig;
}

inline std::vector<cplx> spectrum(const BlockJacobi& j) {
  if (j.blocks < 1) throw StructureViolation("spectrum of an empty truncation");
  return matrix_spectrum(dense_operator(j));
}

}  // namespace fkt

#endif  // FKT_OPERATOR_HPP
