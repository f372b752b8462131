#ifndef FKT_CORE_HPP
#define FKT_CORE_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace fkt {

using cplx = std::complex<double>;

/// 2x2 complex block, the unit of every block-level computation.
using Block2 = Eigen::Matrix2cd;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

// ---------------------------------------------------------------------------
// Errors
//
// Three families, matching the CLI exit-code classes: numerical failures,
// configuration problems and I/O problems.
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericalError : public Error {
 public:
  NumericalError(const std::string& kind, const std::string& what)
      : Error(kind + ": " + what), kind_(kind) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define FKT_NUMERICAL_ERROR(Name)                                   \
  class Name : public NumericalError {                              \
   public:                                                          \
    explicit Name(const std::string& what) : NumericalError(#Name, what) {} \
  };

FKT_NUMERICAL_ERROR(StructureViolation)
FKT_NUMERICAL_ERROR(TruncationTooSmall)
FKT_NUMERICAL_ERROR(EigensolverFailure)
FKT_NUMERICAL_ERROR(DegreeOverflow)
FKT_NUMERICAL_ERROR(SingularNormalization)
FKT_NUMERICAL_ERROR(SeriesNotConverged)
FKT_NUMERICAL_ERROR(SingularC)
FKT_NUMERICAL_ERROR(SingularResolvent)
FKT_NUMERICAL_ERROR(SingularDelta)
FKT_NUMERICAL_ERROR(StepRejected)
FKT_NUMERICAL_ERROR(SingularN)

#undef FKT_NUMERICAL_ERROR

class ConfigError : public Error {
 public:
  ConfigError(const std::string& key_path, const std::string& reason)
      : Error("config error at '" + key_path + "': " + reason), key_path_(key_path) {}
  const std::string& key_path() const noexcept { return key_path_; }

 private:
  std::string key_path_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Block helpers
// ---------------------------------------------------------------------------

inline constexpr double kStructureTol = 1e-12;

template <class Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline Block2 block(cplx e11, cplx e12, cplx e21, cplx e22) {
  Block2 b;
  b << e11, e12, e21, e22;
  return b;
}

inline Block2 identity2() { return Block2::Identity(); }
inline Block2 zero2() { return Block2::Zero(); }

/// (2,1) entry vanishes relative to the block's scale.
inline bool is_upper_triangular(const Block2& b, double tol = kStructureTol) {
  return std::abs(b(1, 0)) <= tol * std::max(1.0, max_abs(b));
}

/// Form [[1,0],[x,1]].
inline bool is_unit_lower_triangular(const Block2& b, double tol = kStructureTol) {
  const double scale = tol * std::max(1.0, max_abs(b));
  return std::abs(b(0, 1)) <= scale && std::abs(b(0, 0) - 1.0) <= scale &&
         std::abs(b(1, 1) - 1.0) <= scale;
}

/// M = [[1,0],[-a1,1]], the conjugation between Weyl and Markov functions.
inline Block2 gauge_matrix(cplx a1) { return block(1.0, 0.0, -a1, 1.0); }

/// |det b| against the product of its row norms (scale-free singularity test).
inline bool is_numerically_singular(const Block2& b, double rel_tol) {
  const double r0 = b.row(0).cwiseAbs().sum();
  const double r1 = b.row(1).cwiseAbs().sum();
  return !(std::abs(b.determinant()) > rel_tol * r0 * r1);
}

template <class Err>
Block2 inverse_or_throw(const Block2& b, double rel_tol, const std::string& what) {
  if (is_numerically_singular(b, rel_tol)) throw Err(what + " is numerically singular");
  return b.inverse();
}

// ---------------------------------------------------------------------------
// Dense solve with partial pivoting. Returns false when a pivot falls below
// pivot_tol times the scale of its row, instead of producing garbage.
// ---------------------------------------------------------------------------

inline bool solve_partial_pivot(CMatrix a, CVector rhs, CVector& x, double pivot_tol = 1e-12) {
  const Eigen::Index n = a.rows();
  std::vector<double> row_scale(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    row_scale[static_cast<std::size_t>(i)] = a.row(i).cwiseAbs().maxCoeff();
  }
  for (Eigen::Index k = 0; k < n; ++k) {
    Eigen::Index p = k;
    double best = -1.0;
    for (Eigen::Index i = k; i < n; ++i) {
      const double s = row_scale[static_cast<std::size_t>(i)];
      const double v = s > 0.0 ? std::abs(a(i, k)) / s : 0.0;
      if (v > best) {
        best = v;
        p = i;
      }
    }
    if (!(best > pivot_tol)) return false;
    if (p != k) {
      a.row(p).swap(a.row(k));
      std::swap(rhs(p), rhs(k));
      std::swap(row_scale[static_cast<std::size_t>(p)], row_scale[static_cast<std::size_t>(k)]);
    }
    for (Eigen::Index i = k + 1; i < n; ++i) {
      const cplx f = a(i, k) / a(k, k);
      if (f == cplx(0.0)) continue;
      a.row(i).tail(n - k) -= f * a.row(k).tail(n - k);
      rhs(i) -= f * rhs(k);
    }
  }
  x.resize(n);
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    cplx s = rhs(i);
    for (Eigen::Index j = i + 1; j < n; ++j) s -= a(i, j) * x(j);
    x(i) = s / a(i, i);
  }
  return true;
}

}  // namespace fkt

#endif  // FKT_CORE_HPP
