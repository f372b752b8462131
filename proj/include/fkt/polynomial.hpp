#ifndef FKT_POLYNOMIAL_HPP
#define FKT_POLYNOMIAL_HPP

#include <vector>

#include "fkt/core.hpp"

namespace fkt {

/// Dense scalar polynomial, ascending coefficients.
using ScalarPoly = std::vector<cplx>;

inline int degree(const ScalarPoly& p) {
  for (int k = static_cast<int>(p.size()) - 1; k >= 0; --k)
    if (p[static_cast<std::size_t>(k)] != cplx(0.0)) return k;
  return -1;
}

inline cplx coeff(const ScalarPoly& p, int k) {
  return (k >= 0 && k < static_cast<int>(p.size())) ? p[static_cast<std::size_t>(k)] : cplx(0.0);
}

inline cplx evaluate(const ScalarPoly& p, cplx x) {
  cplx acc = 0.0;
  for (auto it = p.rbegin(); it != p.rend(); ++it) acc = acc * x + *it;
  return acc;
}

inline ScalarPoly operator+(const ScalarPoly& l, const ScalarPoly& r) {
  ScalarPoly out(std::max(l.size(), r.size()), cplx(0.0));
  for (std::size_t k = 0; k < l.size(); ++k) out[k] += l[k];
  for (std::size_t k = 0; k < r.size(); ++k) out[k] += r[k];
  return out;
}

inline ScalarPoly operator*(cplx s, const ScalarPoly& p) {
  ScalarPoly out(p);
  for (cplx& c : out) c *= s;
  return out;
}

inline ScalarPoly operator-(const ScalarPoly& l, const ScalarPoly& r) { return l + cplx(-1.0) * r; }

/// x^k p
inline ScalarPoly shift(const ScalarPoly& p, int k) {
  ScalarPoly out(static_cast<std::size_t>(k), cplx(0.0));
  out.insert(out.end(), p.begin(), p.end());
  return out;
}

inline ScalarPoly monomial(int k, cplx c = 1.0) {
  ScalarPoly out(static_cast<std::size_t>(k + 1), cplx(0.0));
  out.back() = c;
  return out;
}

// ---------------------------------------------------------------------------

/// Column [p_top, p_bot]^T of scalar polynomials.
struct VectorPoly {
  ScalarPoly top;
  ScalarPoly bot;

  int max_degree() const { return std::max(degree(top), degree(bot)); }

  Eigen::Vector2cd operator()(cplx x) const { return {evaluate(top, x), evaluate(bot, x)}; }
};

inline VectorPoly operator+(const VectorPoly& l, const VectorPoly& r) { return {l.top + r.top, l.bot + r.bot}; }
inline VectorPoly operator-(const VectorPoly& l, const VectorPoly& r) { return {l.top - r.top, l.bot - r.bot}; }
inline VectorPoly operator*(cplx s, const VectorPoly& p) { return {s * p.top, s * p.bot}; }

/// Constant block times a vector polynomial.
inline VectorPoly operator*(const Block2& m, const VectorPoly& p) {
  return {m(0, 0) * p.top + m(0, 1) * p.bot, m(1, 0) * p.top + m(1, 1) * p.bot};
}

inline VectorPoly shift(const VectorPoly& p, int k) { return {shift(p.top, k), shift(p.bot, k)}; }

/// P_j = x^{2j} [1, x]^T
inline VectorPoly basis_vector(int j) { return {monomial(2 * j), monomial(2 * j + 1)}; }

// ---------------------------------------------------------------------------

/// Matrix polynomial sum_k coeffs[k] y^k with 2x2 block coefficients.
struct MatrixPoly {
  std::vector<Block2> coeffs;

  int degree() const {
    for (int k = static_cast<int>(coeffs.size()) - 1; k >= 0; --k)
      if (max_abs(coeffs[static_cast<std::size_t>(k)]) != 0.0) return k;
    return -1;
  }

  Block2 coeff(int k) const {
    return (k >= 0 && k < static_cast<int>(coeffs.size())) ? coeffs[static_cast<std::size_t>(k)] : zero2();
  }

  Block2 operator()(cplx y) const {
    Block2 acc = zero2();
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = (acc * y + *it).eval();
    return acc;
  }

  static MatrixPoly constant(const Block2& b) { return MatrixPoly{{b}}; }
};

inline MatrixPoly operator+(const MatrixPoly& l, const MatrixPoly& r) {
  MatrixPoly out;
  const std::size_t n = std::max(l.coeffs.size(), r.coeffs.size());
  out.coeffs.assign(n, zero2());
  for (std::size_t k = 0; k < l.coeffs.size(); ++k) out.coeffs[k] += l.coeffs[k];
  for (std::size_t k = 0; k < r.coeffs.size(); ++k) out.coeffs[k] += r.coeffs[k];
  return out;
}

inline MatrixPoly operator-(const MatrixPoly& l, const MatrixPoly& r) {
  MatrixPoly neg = r;
  for (Block2& b : neg.coeffs) b = -b;
  return l + neg;
}

/// Left multiplication by a constant block.
inline MatrixPoly operator*(const Block2& m, const MatrixPoly& p) {
  MatrixPoly out = p;
  for (Block2& b : out.coeffs) b = (m * b).eval();
  return out;
}

/// Right multiplication by a constant block.
inline MatrixPoly operator*(const MatrixPoly& p, const Block2& m) {
  MatrixPoly out = p;
  for (Block2& b : out.coeffs) b = (b * m).eval();
  return out;
}

/// y * P(y)
inline MatrixPoly shift(const MatrixPoly& p) {
  MatrixPoly out;
  out.coeffs.reserve(p.coeffs.size() + 1);
  out.coeffs.push_back(zero2());
  out.coeffs.insert(out.coeffs.end(), p.coeffs.begin(), p.coeffs.end());
  return out;
}

/// Even/odd split: b(x) = V(x^2) [1, x]^T.
inline MatrixPoly unpack(const VectorPoly& b) {
  const int top = static_cast<int>(b.top.size());
  const int bot = static_cast<int>(b.bot.size());
  const int len = (std::max(top, bot) + 1) / 2;
  MatrixPoly v;
  v.coeffs.assign(static_cast<std::size_t>(std::max(len, 1)), zero2());
  for (int k = 0; k < len; ++k) {
    Block2& c = v.coeffs[static_cast<std::size_t>(k)];
    c(0, 0) = coeff(b.top, 2 * k);
    c(0, 1) = coeff(b.top, 2 * k + 1);
    c(1, 0) = coeff(b.bot, 2 * k);
    c(1, 1) = coeff(b.bot, 2 * k + 1);
  }
  return v;
}

/// Inverse of unpack: V(x^2) [1, x]^T.
inline VectorPoly pack(const MatrixPoly& v) {
  VectorPoly b;
  b.top.assign(2 * v.coeffs.size(), cplx(0.0));
  b.bot.assign(2 * v.coeffs.size(), cplx(0.0));
  for (std::size_t k = 0; k < v.coeffs.size(); ++k) {
    b.top[2 * k] = v.coeffs[k](0, 0);
    b.top[2 * k + 1] = v.coeffs[k](0, 1);
    b.bot[2 * k] = v.coeffs[k](1, 0);
    b.bot[2 * k + 1] = v.coeffs[k](1, 1);
  }
  return b;
}

}  // namespace fkt

#endif  // FKT_POLYNOMIAL_HPP
