#ifndef FKT_DYNAMICS_HPP
#define FKT_DYNAMICS_HPP

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "fkt/inverse.hpp"

namespace fkt {

struct FlowConfig {
  double h = 1e-3;
  double t_end = 0.5;
  int record_every = 1;
  int interior_margin = 1;
  /// Uniform coefficient bound; a step that exceeds it is rejected.
  double blowup_guard = 1e6;

  void validate() const {
    if (!(h > 0.0)) throw std::invalid_argument("flow step h must be positive");
    if (!(t_end >= 0.0)) throw std::invalid_argument("flow t_end must be nonnegative");
    if (record_every < 1) throw std::invalid_argument("record_every must be >= 1");
    if (interior_margin < 1) throw std::invalid_argument("interior_margin must be >= 1");
    if (!(blowup_guard > 0.0)) throw std::invalid_argument("blowup_guard must be positive");
  }

  /// Number of RK4 steps; t_end must be a whole multiple of h.
  long steps() const {
    const double q = t_end / h;
    const long n = std::lround(q);
    if (std::abs(q - static_cast<double>(n)) > 1e-9 * std::max(1.0, q)) {
      throw std::invalid_argument("t_end is not a whole multiple of h");
    }
    return n;
  }
};

using Trajectory = std::vector<LatticeState>;

/// One classical RK4 step of y' = f(t, y).
template <class F>
CVector rk4_step(F&& f, const CVector& y, double t, double h) {
  const CVector k1 = f(t, y);
  const CVector k2 = f(t + 0.5 * h, (y + 0.5 * h * k1).eval());
  const CVector k3 = f(t + 0.5 * h, (y + 0.5 * h * k2).eval());
  const CVector k4 = f(t + h, (y + h * k3).eval());
  return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

namespace detail {

inline void guard(const CVector& y, double bound, double t) {
  const double m = y.size() == 0 ? 0.0 : y.cwiseAbs().maxCoeff();
  if (!(m <= bound)) {
    throw StepRejected("coefficient magnitude " + std::to_string(m) + " exceeds the bound " + std::to_string(bound) +
                       " at t = " + std::to_string(t));
  }
}

/// Runs fixed-step RK4 and hands every recorded sample to `emit`. Time stamps
/// are k h exactly; the final step is always recorded.
template <class F, class Emit>
void integrate(F&& rhs, CVector y, const FlowConfig& cfg, Emit&& emit) {
  cfg.validate();
  const long n = cfg.steps();
  emit(0.0, y);
  for (long k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) * cfg.h;
    y = rk4_step(rhs, y, t, cfg.h);
    guard(y, cfg.blowup_guard, t + cfg.h);
    if ((k + 1) % cfg.record_every == 0 || k + 1 == n) emit(static_cast<double>(k + 1) * cfg.h, y);
  }
}

}  // namespace detail

inline Trajectory evolve_lattice(const LatticeState& s0, const FlowConfig& cfg) {
  const int blocks = s0.blocks();
  detail::guard(s0.to_vector(), cfg.blowup_guard, 0.0);
  Trajectory out;
  auto rhs = [blocks](double t, const CVector& y) {
    return lax_rhs(LatticeState::from_vector(blocks, y, t)).to_vector();
  };
  detail::integrate(rhs, s0.to_vector(), cfg,
                    [&](double t, const CVector& y) { out.push_back(LatticeState::from_vector(blocks, y, s0.t + t)); });
  return out;
}

/// Copies of s0 at the sample times of evolve_lattice: a state whose time
/// derivatives are forced to zero.
inline Trajectory frozen_trajectory(const LatticeState& s0, const FlowConfig& cfg) {
  cfg.validate();
  const long n = cfg.steps();
  Trajectory out;
  for (long k = 0; k <= n; ++k) {
    if (k % cfg.record_every == 0 || k == n) {
      LatticeState s = s0;
      s.t = s0.t + static_cast<double>(k) * cfg.h;
      out.push_back(std::move(s));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Block system
// ---------------------------------------------------------------------------

/// Right-hand side of the block flow
///   A'_m = A_m D_{m+1} - D_m A_m
///   B'_m = A_m C_{m+1} - C_m A_{m-1} + B_m D_m - D_m B_m
///   C'_m = B_m C_m - C_m B_{m-1} + C_m D_{m-1} - D_m C_m
/// on the truncation (blocks past N - 1 are zero), with a_1' = c_1.
inline BlockJacobi block_rhs(const BlockJacobi& j) {
  const int n = j.blocks;
  auto at = [&](const std::vector<Block2>& v, int m) -> Block2 {
    return (m >= 0 && m < n) ? v[static_cast<std::size_t>(m)] : zero2();
  };
  BlockJacobi r;
  r.blocks = n;
  r.t = j.t;
  r.a1 = j.B[0](1, 0);
  for (int m = 0; m < n; ++m) {
    const Block2 A = at(j.A, m), B = at(j.B, m), C = at(j.C, m);
    const Block2 D = j.D(m);
    r.A.push_back(A * j.D(m + 1) - D * A);
    r.B.push_back(A * at(j.C, m + 1) - C * at(j.A, m - 1) + B * D - D * B);
    r.C.push_back(B * C - C * at(j.B, m - 1) + C * j.D(m - 1) - D * C);
  }
  return r;
}

inline CVector pack_blocks(const BlockJacobi& j) {
  CVector v(1 + 12 * j.blocks);
  v(0) = j.a1;
  Eigen::Index p = 1;
  for (const auto* list : {&j.A, &j.B, &j.C})
    for (const Block2& b : *list)
      for (Eigen::Index e = 0; e < 4; ++e) v(p++) = b(e / 2, e % 2);
  return v;
}

inline BlockJacobi unpack_blocks(int blocks, const CVector& v, double t) {
  BlockJacobi j;
  j.blocks = blocks;
  j.t = t;
  j.a1 = v(0);
  Eigen::Index p = 1;
  for (auto* list : {&j.A, &j.B, &j.C}) {
    list->resize(static_cast<std::size_t>(blocks));
    for (Block2& b : *list)
      for (Eigen::Index e = 0; e < 4; ++e) b(e / 2, e % 2) = v(p++);
  }
  return j;
}

inline std::vector<BlockJacobi> evolve_blocks(const BlockJacobi& j0, const FlowConfig& cfg) {
  const int blocks = j0.blocks;
  std::vector<BlockJacobi> out;
  auto rhs = [blocks](double t, const CVector& y) { return pack_blocks(block_rhs(unpack_blocks(blocks, y, t))); };
  detail::integrate(rhs, pack_blocks(j0), cfg,
                    [&](double t, const CVector& y) { out.push_back(unpack_blocks(blocks, y, j0.t + t)); });
  return out;
}

// ---------------------------------------------------------------------------
// Residuals of the equivalent evolution laws
// ---------------------------------------------------------------------------

/// Max residual of one evolution law over a trajectory. `series` holds the
/// per-sample maxima (t, residual).
struct Residual {
  std::string name;
  double value = 0.0;
  std::string sampling;
  std::vector<std::pair<double, double>> series;
};

/// Quantity and its claimed time derivative at one state, both flattened.
struct Law {
  std::function<CVector(const LatticeState&)> value;
  std::function<CVector(const LatticeState&)> rate;
};

/// Finite-difference derivative of law.value against law.rate at every sample
/// except the two ends. On equally spaced samples a fourth-order five-point
/// stencil is used (off-centre next to the ends); with fewer than five samples
/// or uneven spacing, the three-point central difference.
inline Residual law_residual(const Trajectory& traj, const Law& law, std::string name, std::string sampling) {
  Residual r{std::move(name), 0.0, std::move(sampling), {}};
  const std::size_t n = traj.size();
  if (n < 3) return r;
  std::vector<CVector> values;
  values.reserve(n);
  for (const LatticeState& s : traj) values.push_back(law.value(s));
  const double h = traj[1].t - traj[0].t;
  bool uniform = n >= 5;
  for (std::size_t k = 1; uniform && k + 1 < n; ++k) uniform = std::abs((traj[k + 1].t - traj[k].t) - h) <= 1e-9 * h;
  for (std::size_t k = 1; k + 1 < n; ++k) {
    CVector derivative;
    const auto& v = values;
    if (!uniform) {
      derivative = (v[k + 1] - v[k - 1]) / (traj[k + 1].t - traj[k - 1].t);
    } else if (k == 1) {
      derivative = (-3.0 * v[0] - 10.0 * v[1] + 18.0 * v[2] - 6.0 * v[3] + v[4]) / (12.0 * h);
    } else if (k + 2 == n) {
      derivative = (3.0 * v[k + 1] + 10.0 * v[k] - 18.0 * v[k - 1] + 6.0 * v[k - 2] - v[k - 3]) / (12.0 * h);
    } else {
      derivative = (v[k - 2] - 8.0 * v[k - 1] + 8.0 * v[k + 1] - v[k + 2]) / (12.0 * h);
    }
    const CVector diff = derivative - law.rate(traj[k]);
    const double e = diff.size() == 0 ? 0.0 : diff.cwiseAbs().maxCoeff();
    r.series.emplace_back(traj[k].t, e);
    r.value = std::max(r.value, e);
  }
  return r;
}

namespace detail {

/// Appends the entries of m in row-major order.
template <class Derived>
void append(CVector& v, const Eigen::MatrixBase<Derived>& m) {
  const Eigen::Index p = v.size();
  v.conservativeResize(p + m.size());
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) v(p + r * m.cols() + c) = m(r, c);
}

/// F(z) = M^{-1} R_J(z) M with R_J from the finite-section resolvent.
inline Block2 markov_from_operator(const BlockJacobi& j, cplx z) {
  const Block2 m = j.gauge();
  return m.inverse() * weyl_function(j, z) * m;
}

}  // namespace detail

/// d/dt (J^n)_{00} = (J^{n+1})_{00} - (J^n)_{00} J_{00} + (J^n)_{00} (J_)_{00} - (J_)_{00} (J^n)_{00}
inline Law corner_power_law(int n_max) {
  Law law;
  law.value = [n_max](const LatticeState& s) {
    CVector v;
    for (const Block2& p : corner_powers(lattice_to_blocks(s), n_max + 1)) detail::append(v, p);
    return v;
  };
  law.rate = [n_max](const LatticeState& s) {
    const BlockJacobi j = lattice_to_blocks(s);
    const std::vector<Block2> p = corner_powers(j, n_max + 2);
    const Block2 d0 = j.D(0);
    CVector v;
    for (int n = 0; n <= n_max; ++n) {
      const auto ni = static_cast<std::size_t>(n);
      detail::append(v, p[ni + 1] - p[ni] * j.B[0] + p[ni] * d0 - d0 * p[ni]);
    }
    return v;
  };
  return law;
}

/// U_n' = U_{n+1} - U_n U_1
inline Law moment_law(int n_max) {
  Law law;
  law.value = [n_max](const LatticeState& s) {
    CVector v;
    for (const Block2& u : moments_from_operator(lattice_to_blocks(s), n_max).block_moments()) detail::append(v, u);
    return v;
  };
  law.rate = [n_max](const LatticeState& s) {
    const std::vector<Block2> u = moments_from_operator(lattice_to_blocks(s), n_max + 1).block_moments();
    CVector v;
    for (int n = 0; n <= n_max; ++n) {
      const auto ni = static_cast<std::size_t>(n);
      detail::append(v, u[ni + 1] - u[ni] * u[1]);
    }
    return v;
  };
  return law;
}

/// (dU/dt)(B) = U(x^2 B) - U(B) U_1 on B = [x^k, x^{k+1}]^T, k = 0..k_max.
inline Law functional_law(int k_max) {
  Law law;
  auto basis = [](int k) { return VectorPoly{monomial(k), monomial(k + 1)}; };
  const int n_need = (k_max + 3) / 2 + 1;
  law.value = [=](const LatticeState& s) {
    const VectorFunctional u = moments_from_operator(lattice_to_blocks(s), n_need);
    CVector v;
    for (int k = 0; k <= k_max; ++k) detail::append(v, act(u, basis(k)));
    return v;
  };
  law.rate = [=](const LatticeState& s) {
    const VectorFunctional u = moments_from_operator(lattice_to_blocks(s), n_need);
    const Block2 u1 = u.block_moment(1);
    CVector v;
    for (int k = 0; k <= k_max; ++k) detail::append(v, act(u, shift(basis(k), 2)) - act(u, basis(k)) * u1);
    return v;
  };
  return law;
}

/// F'(z) = F(z) (z I - U_1) - I
inline Law markov_law(std::vector<cplx> zs) {
  Law law;
  law.value = [zs](const LatticeState& s) {
    const BlockJacobi j = lattice_to_blocks(s);
    CVector v;
    for (cplx z : zs) detail::append(v, detail::markov_from_operator(j, z));
    return v;
  };
  law.rate = [zs](const LatticeState& s) {
    const BlockJacobi j = lattice_to_blocks(s);
    const Block2 u1 = moments_from_operator(j, 1).block_moment(1);
    CVector v;
    for (cplx z : zs) {
      const Block2 f = detail::markov_from_operator(j, z);
      detail::append(v, f * (z * identity2() - u1) - identity2());
    }
    return v;
  };
  return law;
}

/// B_m'(x) = -C_m B_{m-1}(x) - D_m B_m(x)
inline Law vector_poly_law(int m_max, std::vector<cplx> xs) {
  Law law;
  law.value = [=](const LatticeState& s) {
    const std::vector<VectorPoly> bs = vector_sequence(lattice_to_blocks(s), m_max);
    CVector v;
    for (const VectorPoly& b : bs)
      for (cplx x : xs) detail::append(v, b(x));
    return v;
  };
  law.rate = [=](const LatticeState& s) {
    const BlockJacobi j = lattice_to_blocks(s);
    const std::vector<VectorPoly> bs = vector_sequence(j, m_max);
    CVector v;
    for (int m = 0; m <= m_max; ++m) {
      const auto mi = static_cast<std::size_t>(m);
      for (cplx x : xs) {
        Eigen::Vector2cd r = -j.D(m) * bs[mi](x);
        if (m >= 1) r -= j.C[mi] * bs[mi - 1](x);
        detail::append(v, r);
      }
    }
    return v;
  };
  return law;
}

/// V_m'(y) = -C_m V_{m-1}(y) - D_m V_m(y)
inline Law matrix_poly_law(int m_max, std::vector<cplx> ys) {
  Law law;
  law.value = [=](const LatticeState& s) {
    const std::vector<MatrixPoly> vs = matrix_sequence(lattice_to_blocks(s), m_max);
    CVector v;
    for (const MatrixPoly& p : vs)
      for (cplx y : ys) detail::append(v, p(y));
    return v;
  };
  law.rate = [=](const LatticeState& s) {
    const BlockJacobi j = lattice_to_blocks(s);
    const std::vector<MatrixPoly> vs = matrix_sequence(j, m_max);
    CVector v;
    for (int m = 0; m <= m_max; ++m) {
      const auto mi = static_cast<std::size_t>(m);
      for (cplx y : ys) {
        Block2 r = -j.D(m) * vs[mi](y);
        if (m >= 1) r -= j.C[mi] * vs[mi - 1](y);
        detail::append(v, r);
      }
    }
    return v;
  };
  return law;
}

/// The block system, blocks read off the lattice state.
inline Law block_law() {
  Law law;
  law.value = [](const LatticeState& s) { return pack_blocks(lattice_to_blocks(s)); };
  law.rate = [](const LatticeState& s) { return pack_blocks(block_rhs(lattice_to_blocks(s))); };
  return law;
}

/// R_J'(z) = R_J(z) (z I - J_{00}) - I + [R_J(z), (J_)_{00}]
inline Law weyl_law(std::vector<cplx> zs) {
  Law law;
  law.value = [zs](const LatticeState& s) {
    const BlockJacobi j = lattice_to_blocks(s);
    CVector v;
    for (cplx z : zs) detail::append(v, weyl_function(j, z));
    return v;
  };
  law.rate = [zs](const LatticeState& s) {
    const BlockJacobi j = lattice_to_blocks(s);
    const Block2 d0 = j.D(0);
    CVector v;
    for (cplx z : zs) {
      const Block2 r = weyl_function(j, z);
      detail::append(v, r * (z * identity2() - j.B[0]) - identity2() + r * d0 - d0 * r);
    }
    return v;
  };
  return law;
}

/// Equally spaced points on a circle.
inline std::vector<cplx> circle_points(int count, double radius, cplx center = 0.0) {
  std::vector<cplx> out;
  for (int k = 0; k < count; ++k) {
    const double theta = 2.0 * std::numbers::pi * (static_cast<double>(k) + 0.5) / static_cast<double>(count);
    out.push_back(center + radius * std::exp(cplx(0.0, theta)));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Closed-form Weyl function
// ---------------------------------------------------------------------------

/// Cumulative integral F_k = \int_{t_0}^{t_k} f on an equally spaced grid,
/// fourth order: each panel integrates the cubic through its four nearest
/// samples.
inline std::vector<cplx> cumulative_integral(const std::vector<cplx>& f, double h) {
  const std::size_t n = f.size();
  std::vector<cplx> out(n, cplx(0.0));
  if (n < 2) return out;
  if (n < 4) {
    for (std::size_t k = 1; k < n; ++k) out[k] = out[k - 1] + 0.5 * h * (f[k - 1] + f[k]);
    return out;
  }
  for (std::size_t k = 0; k + 1 < n; ++k) {
    cplx panel;
    if (k == 0) {
      panel = h / 24.0 * (9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3]);
    } else if (k + 2 == n) {
      panel = h / 24.0 * (9.0 * f[k + 1] + 19.0 * f[k] - 5.0 * f[k - 1] + f[k - 2]);
    } else {
      panel = h / 24.0 * (-f[k - 1] + 13.0 * f[k] + 13.0 * f[k + 1] - f[k + 2]);
    }
    out[k + 1] = out[k] + panel;
  }
  return out;
}

/// Closed-form pieces of R_J(z; t) = e^{zt} M(t) T(t, z) N(t)^{-1} along a
/// densely recorded trajectory (equal spacing, starting at the initial state).
class ClosedFormWeyl {
 public:
  explicit ClosedFormWeyl(const Trajectory& traj) : traj_(traj) {
    if (traj.size() < 2) throw std::invalid_argument("closed-form Weyl function needs at least two samples");
    h_ = traj[1].t - traj[0].t;
    for (std::size_t k = 1; k < traj.size(); ++k) {
      if (std::abs((traj[k].t - traj[k - 1].t) - h_) > 1e-9 * h_) {
        throw std::invalid_argument("closed-form Weyl function needs equally spaced samples");
      }
    }
    std::vector<cplx> b1, b2, c1;
    for (const LatticeState& s : traj) {
      b1.push_back(s.b(1));
      b2.push_back(s.b(2));
      c1.push_back(s.c(1));
    }
    const std::vector<cplx> ib1 = cumulative_integral(b1, h_);
    const std::vector<cplx> ib2 = cumulative_integral(b2, h_);
    const std::vector<cplx> ic1 = cumulative_integral(c1, h_);
    std::vector<cplx> inner;  // a_2(s) exp(\int_0^s (b_2 - b_1))
    for (std::size_t k = 0; k < traj.size(); ++k) inner.push_back(traj[k].a(2) * std::exp(ib2[k] - ib1[k]));
    const std::vector<cplx> iinner = cumulative_integral(inner, h_);
    for (std::size_t k = 0; k < traj.size(); ++k) {
      const cplx e1 = std::exp(ib1[k]);
      n_.push_back(block(e1, e1 * iinner[k], 0.0, std::exp(ib2[k])));
      m_.push_back(gauge_matrix(traj[0].a(1) + ic1[k]));
    }
  }

  std::size_t index_of(double t) const {
    const double q = (t - traj_[0].t) / h_;
    const long k = std::lround(q);
    if (k < 0 || static_cast<std::size_t>(k) >= traj_.size() || std::abs(q - static_cast<double>(k)) > 1e-6) {
      throw std::out_of_range("time " + std::to_string(t) + " is not a sample of the trajectory");
    }
    return static_cast<std::size_t>(k);
  }

  Block2 N(std::size_t k) const { return n_[k]; }
  Block2 M(std::size_t k) const { return m_[k]; }

  /// R_J(z) at sample time t.
  Block2 operator()(cplx z, double t) const {
    const std::size_t k = index_of(t);
    const double t0 = traj_[0].t;
    std::vector<cplx> f[4];
    for (std::size_t i = 0; i <= std::max<std::size_t>(k, std::min<std::size_t>(3, traj_.size() - 1)); ++i) {
      const Block2 g = std::exp(-z * (traj_[i].t - t0)) * m_[i].inverse() * n_[i];
      for (int e = 0; e < 4; ++e) f[e].push_back(g(e / 2, e % 2));
    }
    Block2 integral;
    for (int e = 0; e < 4; ++e) integral(e / 2, e % 2) = cumulative_integral(f[e], h_)[k];
    const Block2 r0 = weyl_function(lattice_to_blocks(traj_[0]), z);
    const Block2 T = -integral + m_[0].inverse() * r0;
    const Block2& nk = n_[k];
    if (is_numerically_singular(nk, 1e-14)) throw SingularN("N(t) is numerically singular at t = " + std::to_string(t));
    return std::exp(z * (traj_[k].t - t0)) * m_[k] * T * nk.inverse();
  }

 private:
  Trajectory traj_;
  double h_ = 0.0;
  std::vector<Block2> n_;
  std::vector<Block2> m_;
};

inline Block2 closed_form_weyl(const Trajectory& traj, cplx z, double t) { return ClosedFormWeyl(traj)(z, t); }

// ---------------------------------------------------------------------------
// Isospectrality
// ---------------------------------------------------------------------------

/// Minimum-cost perfect matching on a square cost matrix (Hungarian method).
/// Returns assignment[row] = column.
inline std::vector<int> min_cost_assignment(const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(static_cast<std::size_t>(n + 1), 0.0), v(static_cast<std::size_t>(n + 1), 0.0);
  std::vector<int> p(static_cast<std::size_t>(n + 1), 0), way(static_cast<std::size_t>(n + 1), 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(n + 1), inf);
    std::vector<char> used(static_cast<std::size_t>(n + 1), 0);
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      const int i0 = p[static_cast<std::size_t>(j0)];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        const auto js = static_cast<std::size_t>(j);
        if (used[js]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] - v[js];
        if (cur < minv[js]) {
          minv[js] = cur;
          way[js] = j0;
        }
        if (minv[js] < delta) {
          delta = minv[js];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        const auto js = static_cast<std::size_t>(j);
        if (used[js]) {
          u[static_cast<std::size_t>(p[js])] += delta;
          v[js] -= delta;
        } else {
          minv[js] -= delta;
        }
      }
      j0 = j1;
    } while (p[static_cast<std::size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<std::size_t>(j0)];
      p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> assignment(static_cast<std::size_t>(n), -1);
  for (int j = 1; j <= n; ++j) assignment[static_cast<std::size_t>(p[static_cast<std::size_t>(j)] - 1)] = j - 1;
  return assignment;
}

/// Largest distance in the minimum-total-distance matching of two equally
/// sized eigenvalue lists.
inline double matched_distance(const std::vector<cplx>& l, const std::vector<cplx>& r) {
  if (l.size() != r.size()) throw std::invalid_argument("eigenvalue lists differ in size");
  const auto n = static_cast<Eigen::Index>(l.size());
  Eigen::MatrixXd cost(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < n; ++k) cost(i, k) = std::abs(l[static_cast<std::size_t>(i)] - r[static_cast<std::size_t>(k)]);
  const std::vector<int> a = min_cost_assignment(cost);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) worst = std::max(worst, cost(i, a[static_cast<std::size_t>(i)]));
  return worst;
}

struct DriftReport {
  double drift = 0.0;
  std::vector<cplx> initial;
  std::vector<std::pair<double, double>> series;  // (t, matched distance to t = 0)
};

inline DriftReport isospectrality_report(const Trajectory& traj) {
  if (traj.empty()) throw std::invalid_argument("isospectrality report of an empty trajectory");
  DriftReport rep;
  rep.initial = spectrum(lattice_to_blocks(traj.front()));
  for (const LatticeState& s : traj) {
    const double d = matched_distance(spectrum(lattice_to_blocks(s)), rep.initial);
    rep.series.emplace_back(s.t, d);
    rep.drift = std::max(rep.drift, d);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Spectral path (exponential modulation of the moments)
// ---------------------------------------------------------------------------

/// c_1 as a function of a_1 and the normalized first block moment
/// U_1 = [[p, q], [r, s]]: c_1 = (M U_1 M^{-1})_{21} = r - a p + a s - a^2 q.
inline cplx c1_from_moment(const Block2& u1, cplx a1) {
  return u1(1, 0) - a1 * u1(0, 0) + a1 * u1(1, 1) - a1 * a1 * u1(0, 1);
}

struct Theorem4Report {
  double t = 0.0;
  int m_max = 0;
  BlockJacobi spectral;
  BlockJacobi direct;
  double max_difference = 0.0;  // entrywise over A_m, B_m, C_m, m <= m_max, and a_1
  double reconstruction_residual = 0.0;
};

/// Moments of the initial finite section, evolved by exp(x^2 t) and turned
/// back into blocks; compared with the RK4 lattice at the same time. a_1(t)
/// follows from a_1' = c_1 with c_1 read off the evolved U_1 (RK4 with the
/// flow step). `moment_count` block moments of the initial operator feed the
/// exponential series.
inline Theorem4Report theorem4_cross_check(const LatticeState& s0, double t, const FlowConfig& flow, int m_max,
                                           int moment_count = 0) {
  const BlockJacobi j0 = lattice_to_blocks(s0);
  const int blocks_needed = 2 * m_max + 3;
  if (moment_count <= 0) moment_count = blocks_needed + 60;
  const VectorFunctional u0 = moments_from_operator(j0, moment_count - 1, MomentWindow::finite_section);

  FlowConfig cfg = flow;
  cfg.t_end = t;
  cfg.record_every = std::max(1L, cfg.steps());

  // a_1(t) from the Riccati equation driven by the evolved U_1.
  auto rhs = [&](double tau, const CVector& y) {
    CVector out(1);
    out(0) = c1_from_moment(exp_evolve(u0, tau, 2).block_moment(1), y(0));
    return out;
  };
  CVector a1_end(1);
  a1_end(0) = j0.a1;
  detail::integrate(rhs, a1_end, cfg, [&](double, const CVector& y) { a1_end = y; });

  Theorem4Report rep;
  rep.t = t;
  rep.m_max = m_max;
  const VectorFunctional ut = exp_evolve(u0, t, blocks_needed);
  const ReconstructionReport rec = reconstruct(ut, m_max, a1_end(0));
  rep.spectral = rec.jacobi;
  rep.spectral.t = s0.t + t;
  rep.reconstruction_residual = rec.residual;
  rep.direct = lattice_to_blocks(evolve_lattice(s0, cfg).back());

  rep.max_difference = std::abs(rep.spectral.a1 - rep.direct.a1);
  for (int m = 0; m <= m_max; ++m) {
    const auto mi = static_cast<std::size_t>(m);
    rep.max_difference = std::max({rep.max_difference, max_abs(rep.spectral.A[mi] - rep.direct.A[mi]),
                                   max_abs(rep.spectral.B[mi] - rep.direct.B[mi]),
                                   max_abs(rep.spectral.C[mi] - rep.direct.C[mi])});
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Full verification
// ---------------------------------------------------------------------------

struct VerifyOptions {
  int moment_order = 4;     // n <= 4 in the corner-power and moment laws
  int poly_order = 3;       // m <= 3 in the polynomial laws
  std::vector<cplx> z_samples;  // empty: 8 points on |z| = 2 x norm bound
  std::vector<cplx> x_samples;  // empty: 5 points on |x| = 1
  double theorem5_every = 0.1;  // closed-form comparison times
};

struct VerificationReport {
  std::vector<Residual> residuals;  // (14) .. (19), (26), (27)
  DriftReport isospectral;
  double theorem2 = 0.0;
  double theorem5 = 0.0;
  int interior_margin = 1;
  bool constant_trajectory = false;
  std::vector<cplx> z_samples;

  double max_residual() const {
    double m = 0.0;
    for (const Residual& r : residuals) m = std::max(m, r.value);
    return m;
  }
};

inline std::vector<Residual> law_residuals(const Trajectory& traj, const VerifyOptions& opts,
                                           const std::vector<cplx>& zs, const std::vector<cplx>& xs) {
  std::vector<cplx> ys;
  for (cplx x : xs) ys.push_back(x * x);
  const std::string n_desc = "n <= " + std::to_string(opts.moment_order) + ", interior samples";
  const std::string z_desc = std::to_string(zs.size()) + " z samples, interior samples";
  const std::string m_desc = "m <= " + std::to_string(opts.poly_order) + ", " + std::to_string(xs.size()) +
                             " x samples, interior samples";
  std::vector<Residual> out;
  out.push_back(law_residual(traj, corner_power_law(opts.moment_order), "eq14", n_desc));
  out.push_back(law_residual(traj, moment_law(opts.moment_order), "eq15", n_desc));
  out.push_back(law_residual(traj, markov_law(zs), "eq16", z_desc));
  out.push_back(law_residual(traj, functional_law(2 * opts.moment_order + 1), "eq17",
                             "B = [x^k, x^(k+1)], k <= " + std::to_string(2 * opts.moment_order + 1)));
  out.push_back(law_residual(traj, vector_poly_law(opts.poly_order, xs), "eq18", m_desc));
  out.push_back(law_residual(traj, matrix_poly_law(opts.poly_order, ys), "eq19", m_desc + " (y = x^2)"));
  out.push_back(law_residual(traj, block_law(), "eq26", "all blocks, interior samples"));
  out.push_back(law_residual(traj, weyl_law(zs), "eq27", z_desc));
  return out;
}

/// max over z and the given samples of |R_J(z) - M F(z) M^{-1}| with F summed
/// from the moments of each state.
inline double theorem2_residual(const BlockJacobi& j, const std::vector<cplx>& zs, int moment_count = 120) {
  const VectorFunctional u = moments_from_operator(j, moment_count - 1, MomentWindow::finite_section);
  const Block2 m = j.gauge();
  MarkovOptions opts;
  opts.radius = operator_norm_bound(j);
  double worst = 0.0;
  for (cplx z : zs) {
    const Block2 f = markov_function(u, z, opts);
    worst = std::max(worst, max_abs(weyl_function(j, z) - m * f * m.inverse()));
  }
  return worst;
}

inline VerificationReport verify_trajectory(const Trajectory& traj, const FlowConfig& cfg, VerifyOptions opts = {}) {
  if (traj.empty()) throw std::invalid_argument("verification of an empty trajectory");
  VerificationReport rep;
  rep.interior_margin = cfg.interior_margin;
  const BlockJacobi j0 = lattice_to_blocks(traj.front());
  if (opts.z_samples.empty()) opts.z_samples = circle_points(8, 2.0 * operator_norm_bound(j0));
  if (opts.x_samples.empty()) opts.x_samples = circle_points(5, 1.0);
  rep.z_samples = opts.z_samples;

  rep.constant_trajectory = true;
  for (const LatticeState& s : traj) {
    LatticeState a = s, b = traj.front();
    a.t = b.t = 0.0;
    rep.constant_trajectory = rep.constant_trajectory && a == b;
  }

  rep.residuals = law_residuals(traj, opts, opts.z_samples, opts.x_samples);
  rep.isospectral = isospectrality_report(traj);

  for (const LatticeState& s : {traj.front(), traj.back()}) {
    rep.theorem2 = std::max(rep.theorem2, theorem2_residual(lattice_to_blocks(s), opts.z_samples));
  }

  if (traj.size() >= 2 && cfg.record_every == 1) {
    const ClosedFormWeyl closed(traj);
    for (double t = 0.0; t <= traj.back().t - traj.front().t + 1e-12; t += opts.theorem5_every) {
      const double ts = traj.front().t + t;
      const BlockJacobi j = lattice_to_blocks(traj[closed.index_of(ts)]);
      for (cplx z : opts.z_samples) rep.theorem5 = std::max(rep.theorem5, max_abs(closed(z, ts) - weyl_function(j, z)));
    }
  }
  return rep;
}

}  // namespace fkt

#endif  // FKT_DYNAMICS_HPP
