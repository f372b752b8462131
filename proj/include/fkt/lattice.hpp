#ifndef FKT_LATTICE_HPP
#define FKT_LATTICE_HPP

#include <array>
#include <string>
#include <vector>

#include "fkt/core.hpp"

namespace fkt {

enum class Coef { a = 0, b = 1, c = 2, d = 3 };

inline const char* coef_name(Coef k) {
  static constexpr const char* names[] = {"a", "b", "c", "d"};
  return names[static_cast<int>(k)];
}

inline constexpr std::array<Coef, 4> kAllCoefs = {Coef::a, Coef::b, Coef::c, Coef::d};

/// Truncated coefficient sequences {a_n, b_n, c_n, d_n} of the lattice at
/// time t, filling `blocks` 2x2 block rows of the Jacobi operator.
///
/// Indices are 1-based as in the lattice equations. Reads below 1 or above
/// the stored length return zero, which is both the a_0 = b_0 = c_0 = d_0 = 0
/// boundary convention and the free-end truncation at the bottom.
class LatticeState {
 public:
  LatticeState() = default;

  static LatticeState zero(int blocks, double t = 0.0) {
    if (blocks < 1) throw StructureViolation("lattice needs at least one block row");
    LatticeState s;
    s.blocks_ = blocks;
    s.t = t;
    for (Coef k : kAllCoefs) s.seq_[idx(k)].assign(static_cast<std::size_t>(length(k, blocks)), cplx(0.0));
    return s;
  }

  /// Number of stored entries of sequence k for a given block truncation:
  /// a up to 2N+1, b up to 2N, c up to 2N-1, d up to 2N-2.
  static int length(Coef k, int blocks) {
    switch (k) {
      case Coef::a: return 2 * blocks + 1;
      case Coef::b: return 2 * blocks;
      case Coef::c: return 2 * blocks - 1;
      case Coef::d: return std::max(0, 2 * blocks - 2);
    }
    return 0;
  }

  int blocks() const { return blocks_; }
  int length(Coef k) const { return length(k, blocks_); }

  cplx get(Coef k, int n) const {
    const auto& v = seq_[idx(k)];
    if (n < 1 || n > static_cast<int>(v.size())) return cplx(0.0);
    return v[static_cast<std::size_t>(n - 1)];
  }

  cplx a(int n) const { return get(Coef::a, n); }
  cplx b(int n) const { return get(Coef::b, n); }
  cplx c(int n) const { return get(Coef::c, n); }
  cplx d(int n) const { return get(Coef::d, n); }

  void set(Coef k, int n, cplx value) {
    auto& v = seq_[idx(k)];
    if (n < 1 || n > static_cast<int>(v.size())) {
      throw std::out_of_range(std::string("coefficient ") + coef_name(k) + "_" + std::to_string(n) +
                              " outside truncation");
    }
    v[static_cast<std::size_t>(n - 1)] = value;
  }

  const std::vector<cplx>& sequence(Coef k) const { return seq_[idx(k)]; }
  std::vector<cplx>& sequence(Coef k) { return seq_[idx(k)]; }

  double max_abs_coefficient() const {
    double m = 0.0;
    for (const auto& v : seq_)
      for (const cplx& x : v) m = std::max(m, std::abs(x));
    return m;
  }

  /// Flat view used by the integrators: a, b, c, d concatenated.
  CVector to_vector() const {
    CVector out(dimension());
    Eigen::Index p = 0;
    for (const auto& v : seq_)
      for (const cplx& x : v) out(p++) = x;
    return out;
  }

  static LatticeState from_vector(int blocks, const CVector& flat, double t) {
    LatticeState s = zero(blocks, t);
    if (flat.size() != s.dimension()) throw StructureViolation("flat lattice vector has wrong length");
    Eigen::Index p = 0;
    for (auto& v : s.seq_)
      for (cplx& x : v) x = flat(p++);
    return s;
  }

  Eigen::Index dimension() const {
    Eigen::Index n = 0;
    for (const auto& v : seq_) n += static_cast<Eigen::Index>(v.size());
    return n;
  }

  friend bool operator==(const LatticeState& l, const LatticeState& r) {
    return l.blocks_ == r.blocks_ && l.t == r.t && l.seq_ == r.seq_;
  }

  double t = 0.0;

 private:
  static std::size_t idx(Coef k) { return static_cast<std::size_t>(k); }

  int blocks_ = 0;
  std::array<std::vector<cplx>, 4> seq_;
};

/// Block view of the same operator: J has B_m on the diagonal, A_m above and
/// C_m below. a_1 does not appear in J but fixes the gauge matrix M, so it is
/// carried alongside the blocks.
struct BlockJacobi {
  int blocks = 0;
  cplx a1{0.0};
  std::vector<Block2> A;  // unit lower triangular
  std::vector<Block2> B;
  std::vector<Block2> C;  // upper triangular, C[0] = 0

  double t = 0.0;

  /// D_m = [[0,0],[c_{2m+1},0]], the diagonal block of the strictly lower part.
  Block2 D(int m) const {
    if (m < 0 || m >= blocks) return zero2();
    return block(0.0, 0.0, B[static_cast<std::size_t>(m)](1, 0), 0.0);
  }

  Block2 gauge() const { return gauge_matrix(a1); }
};

inline BlockJacobi lattice_to_blocks(const LatticeState& s) {
  const int n = s.blocks();
  BlockJacobi j;
  j.blocks = n;
  j.a1 = s.a(1);
  j.t = s.t;
  j.A.reserve(static_cast<std::size_t>(n));
  j.B.reserve(static_cast<std::size_t>(n));
  j.C.reserve(static_cast<std::size_t>(n));
  for (int m = 0; m < n; ++m) {
    j.A.push_back(block(1.0, 0.0, s.a(2 * m + 3), 1.0));
    j.B.push_back(block(s.b(2 * m + 1), s.a(2 * m + 2), s.c(2 * m + 1), s.b(2 * m + 2)));
    j.C.push_back(block(s.d(2 * m - 1), s.c(2 * m), 0.0, s.d(2 * m)));
  }
  return j;
}

inline void check_structure(const BlockJacobi& j, double tol = kStructureTol) {
  const auto n = static_cast<std::size_t>(j.blocks);
  if (j.blocks < 1 || j.A.size() != n || j.B.size() != n || j.C.size() != n) {
    throw StructureViolation("block lists do not match the truncation size");
  }
  for (std::size_t m = 0; m < n; ++m) {
    if (!is_unit_lower_triangular(j.A[m], tol)) {
      throw StructureViolation("A_" + std::to_string(m) + " is not unit lower triangular");
    }
    if (!is_upper_triangular(j.C[m], tol)) {
      throw StructureViolation("C_" + std::to_string(m) + " has a nonzero (2,1) entry");
    }
  }
  if (max_abs(j.C[0]) > tol) throw StructureViolation("C_0 must vanish");
}

inline LatticeState blocks_to_lattice(const BlockJacobi& j) {
  check_structure(j);
  LatticeState s = LatticeState::zero(j.blocks, j.t);
  s.set(Coef::a, 1, j.a1);
  for (int m = 0; m < j.blocks; ++m) {
    const auto mi = static_cast<std::size_t>(m);
    const Block2& A = j.A[mi];
    const Block2& B = j.B[mi];
    const Block2& C = j.C[mi];
    s.set(Coef::a, 2 * m + 3, A(1, 0));
    s.set(Coef::b, 2 * m + 1, B(0, 0));
    s.set(Coef::a, 2 * m + 2, B(0, 1));
    s.set(Coef::c, 2 * m + 1, B(1, 0));
    s.set(Coef::b, 2 * m + 2, B(1, 1));
    if (m >= 1) {
      s.set(Coef::d, 2 * m - 1, C(0, 0));
      s.set(Coef::c, 2 * m, C(0, 1));
      s.set(Coef::d, 2 * m, C(1, 1));
    }
  }
  return s;
}

/// Right-hand side of the lattice equations:
///   a'_n = c_n - c_{n-2}
///   b'_n = c_n a_{n+1} - c_{n-1} a_n + d_n - d_{n-2}
///   c'_n = c_n (b_{n+1} - b_n) + d_n a_{n+2} - d_{n-1} a_n
///   d'_n = d_n (b_{n+2} - b_n)
inline LatticeState lax_rhs(const LatticeState& s) {
  LatticeState r = LatticeState::zero(s.blocks(), s.t);
  for (int n = 1; n <= s.length(Coef::a); ++n) r.set(Coef::a, n, s.c(n) - s.c(n - 2));
  for (int n = 1; n <= s.length(Coef::b); ++n) {
    r.set(Coef::b, n, s.c(n) * s.a(n + 1) - s.c(n - 1) * s.a(n) + s.d(n) - s.d(n - 2));
  }
  for (int n = 1; n <= s.length(Coef::c); ++n) {
    r.set(Coef::c, n, s.c(n) * (s.b(n + 1) - s.b(n)) + s.d(n) * s.a(n + 2) - s.d(n - 1) * s.a(n));
  }
  for (int n = 1; n <= s.length(Coef::d); ++n) r.set(Coef::d, n, s.d(n) * (s.b(n + 2) - s.b(n)));
  return r;
}

}  // namespace fkt

#endif  // FKT_LATTICE_HPP
