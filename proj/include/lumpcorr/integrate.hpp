#pragma once

// Method-of-lines right-hand sides for the lumped, corrected and consistent
// schemes, the consistent-mass solve, classical RK4, and the time-step rule.
//
// The system is M u' = F(t, u), F = -(K + s(t) C) u. Dirichlet dofs carry the
// exact value at every stage time; their columns enter F, and the interior
// equations use the interior blocks of M.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <type_traits>
#include <vector>

#include "lumpcorr/assembly.hpp"
#include "lumpcorr/error.hpp"
#include "lumpcorr/scheme.hpp"
#include "lumpcorr/sparse.hpp"

namespace lumpcorr {

/// Assembled matrices of one problem on one mesh.
struct MolSystem {
  CsrMatrix mass;
  CsrMatrix stiffness;
  CsrMatrix convection;
  LumpedMass lumped;              ///< row sums of the interior block
  std::vector<int> boundary;      ///< Dirichlet dofs
  std::vector<char> is_boundary;  ///< per dof
  std::function<double(double)> convection_scale; ///< s(t); empty means 1

  int size() const noexcept { return mass.rows(); }
  double scale(double t) const { return convection_scale ? convection_scale(t) : 1.0; }
};

inline MolSystem make_system(CsrMatrix mass, CsrMatrix stiffness, CsrMatrix convection,
                             std::vector<int> boundary = {},
                             std::function<double(double)> convection_scale = {}) {
  const int n = mass.rows();
  if (stiffness.rows() != n || convection.rows() != n || mass.cols() != n)
    throw DomainError("system matrices must share one square shape");
  MolSystem s;
  s.mass = std::move(mass);
  s.stiffness = std::move(stiffness);
  s.convection = std::move(convection);
  s.is_boundary.assign(n, 0);
  for (int b : boundary) {
    if (b < 0 || b >= n)
      throw DomainError("boundary dof out of range");
    s.is_boundary[b] = 1;
  }
  std::sort(boundary.begin(), boundary.end());
  boundary.erase(std::unique(boundary.begin(), boundary.end()), boundary.end());
  s.boundary = std::move(boundary);
  s.lumped = lump(s.mass, s.is_boundary);
  s.convection_scale = std::move(convection_scale);
  return s;
}

/// Exact Dirichlet values and their time derivatives, per dof.
template <class T>
struct DirichletData {
  std::function<T(int, double)> value;
  std::function<T(int, double)> rate;
};

namespace detail {

template <class T>
double real_dot(const std::vector<T>& a, const std::vector<T>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if constexpr (std::is_same_v<T, double>)
      s += a[i] * b[i];
    else
      s += (std::conj(a[i]) * b[i]).real();
  }
  return s;
}

template <class T>
bool all_finite(const std::vector<T>& v) {
  for (const auto& x : v) {
    if constexpr (std::is_same_v<T, double>) {
      if (!std::isfinite(x))
        return false;
    } else if (!std::isfinite(x.real()) || !std::isfinite(x.imag())) {
      return false;
    }
  }
  return true;
}

} // namespace detail

/// Solves M x = b by Jacobi-preconditioned conjugate gradients to
/// ||M x - b||_2 <= tol ||b||_2. With a mask, rows and columns where
/// mask[i] != 0 are dropped (x[i] = 0 there), which solves the remaining block.
template <class T>
std::vector<T> solve_mass(const CsrMatrix& M, const std::vector<T>& b, double tol = 1e-13,
                          const std::vector<char>* mask = nullptr) {
  const int n = M.rows();
  if (static_cast<int>(b.size()) != n)
    throw DomainError("mass solve dimension mismatch");
  auto active = [&](int i) { return !mask || !(*mask)[i]; };
  std::vector<double> inv_diag(n, 0.0);
  for (int i = 0; i < n; ++i) {
    const double d = M.at(i, i);
    if (!(d > 0.0))
      throw SolveFailure("mass matrix has a non-positive diagonal entry");
    inv_diag[i] = active(i) ? 1.0 / d : 0.0;
  }
  std::vector<T> x(n, T{});
  std::vector<T> r(n, T{});
  for (int i = 0; i < n; ++i)
    if (active(i))
      r[i] = b[i];
  const double bnorm = std::sqrt(detail::real_dot(r, r));
  if (bnorm == 0.0)
    return x;
  std::vector<T> z(n), p(n), q(n);
  for (int i = 0; i < n; ++i)
    z[i] = inv_diag[i] * r[i];
  p = z;
  double rz = detail::real_dot(r, z);
  const int cap = std::max(10 * n, 10);
  for (int it = 0; it < cap; ++it) {
    M.multiply<T>(p, q);
    if (mask)
      for (int i = 0; i < n; ++i)
        if (!active(i))
          q[i] = T{};
    const double pq = detail::real_dot(p, q);
    if (!(pq > 0.0))
      throw SolveFailure("mass matrix is not positive definite on the solve block");
    const double alpha = rz / pq;
    for (int i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * q[i];
    }
    if (std::sqrt(detail::real_dot(r, r)) <= tol * bnorm)
      return x;
    for (int i = 0; i < n; ++i)
      z[i] = inv_diag[i] * r[i];
    const double rz_new = detail::real_dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (int i = 0; i < n; ++i)
      p[i] = z[i] + beta * p[i];
  }
  throw SolveFailure("conjugate gradients did not reach the tolerance");
}

/// du/dt of the selected scheme. Boundary entries of u are replaced by the
/// exact values at t; boundary entries of the result are the exact rates.
template <class T>
std::vector<T> rhs(const Scheme& scheme, const MolSystem& sys, double t, const std::vector<T>& u,
                   const DirichletData<T>* bc = nullptr) {
  const int n = sys.size();
  if (static_cast<int>(u.size()) != n)
    throw DomainError("state dimension mismatch");
  std::vector<T> v = u;
  std::vector<T> rate(n, T{});
  for (int b : sys.boundary) {
    v[b] = bc ? bc->value(b, t) : T{};
    rate[b] = bc ? bc->rate(b, t) : T{};
  }

  // g = F_I - M_IB u'_B: the interior block M_II u'_I = g is what every
  // scheme approximates, with Mbar the row sums of M_II.
  std::vector<T> g(n), tmp(n);
  sys.stiffness.multiply<T>(v, g);
  sys.convection.multiply<T>(v, tmp);
  const double s = sys.scale(t);
  for (int i = 0; i < n; ++i)
    g[i] = -(g[i] + s * tmp[i]);
  if (!sys.boundary.empty()) {
    sys.mass.multiply<T>(rate, tmp);
    for (int i = 0; i < n; ++i)
      g[i] = sys.is_boundary[i] ? T{} : g[i] - tmp[i];
  }

  std::vector<T> du;
  if (scheme.kind() == Scheme::Kind::Consistent) {
    du = solve_mass<T>(sys.mass, g, 1e-13, sys.boundary.empty() ? nullptr : &sys.is_boundary);
  } else {
    // (I + A + ... + A^n) Mbar^{-1} g with A = I - Mbar^{-1} M_II.
    const auto& dm = sys.lumped.diag;
    std::vector<T> w(n);
    for (int i = 0; i < n; ++i)
      w[i] = g[i] / dm[i];
    du = w;
    for (int k = 1; k <= scheme.corrections(); ++k) {
      sys.mass.multiply<T>(w, tmp);
      for (int i = 0; i < n; ++i)
        w[i] = sys.is_boundary[i] ? T{} : w[i] - tmp[i] / dm[i];
      for (int i = 0; i < n; ++i)
        du[i] += w[i];
    }
  }
  for (int b : sys.boundary)
    du[b] = rate[b];
  return du;
}

/// One classical fourth-order Runge-Kutta step of y' = f(t, y).
template <class T, class F>
std::vector<T> rk4_step(F&& f, double t, const std::vector<T>& y, double tau) {
  if (!(tau > 0.0))
    throw DomainError("time step must be positive");
  const std::size_t n = y.size();
  std::vector<T> stage(n);
  const std::vector<T> k1 = f(t, y);
  for (std::size_t i = 0; i < n; ++i)
    stage[i] = y[i] + (0.5 * tau) * k1[i];
  const std::vector<T> k2 = f(t + 0.5 * tau, stage);
  for (std::size_t i = 0; i < n; ++i)
    stage[i] = y[i] + (0.5 * tau) * k2[i];
  const std::vector<T> k3 = f(t + 0.5 * tau, stage);
  for (std::size_t i = 0; i < n; ++i)
    stage[i] = y[i] + tau * k3[i];
  const std::vector<T> k4 = f(t + tau, stage);
  std::vector<T> out(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = y[i] + (tau / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return out;
}

/// Integrates y' = f(t, y) from t0 to t_end with steps of tau, the last one
/// shortened. after_step(t, y) runs after every step.
template <class T, class F, class After>
std::vector<T> evolve_ode(F&& f, std::vector<T> y, double t0, double t_end, double tau,
                          After&& after_step) {
  if (!(tau > 0.0))
    throw DomainError("time step must be positive");
  if (t_end < t0)
    throw DomainError("t_end must not precede t0");
  const double span = t_end - t0;
  if (span == 0.0)
    return y;
  const auto steps = static_cast<std::int64_t>(std::ceil(span / tau * (1.0 - 1e-12)));
  for (std::int64_t k = 0; k < steps; ++k) {
    const double t = t0 + static_cast<double>(k) * tau;
    const double t_next = k + 1 == steps ? t_end : t0 + static_cast<double>(k + 1) * tau;
    y = rk4_step<T>(f, t, y, t_next - t);
    after_step(t_next, y);
    if (!detail::all_finite(y))
      throw NonFinite("state became non-finite at t = " + std::to_string(t_next));
  }
  return y;
}

template <class T, class F>
std::vector<T> evolve_ode(F&& f, std::vector<T> y, double t0, double t_end, double tau) {
  return evolve_ode<T>(std::forward<F>(f), std::move(y), t0, t_end, tau,
                       [](double, const std::vector<T>&) {});
}

/// RK4 integration of the selected scheme; boundary dofs are reset to the
/// exact values after every step.
template <class T>
std::vector<T> evolve(const Scheme& scheme, const MolSystem& sys, std::vector<T> initial,
                      double t0, double t_end, double tau, const DirichletData<T>* bc = nullptr) {
  auto f = [&](double t, const std::vector<T>& u) { return rhs<T>(scheme, sys, t, u, bc); };
  auto refresh = [&](double t, std::vector<T>& y) {
    for (int b : sys.boundary)
      y[b] = bc ? bc->value(b, t) : T{};
  };
  refresh(t0, initial);
  return evolve_ode<T>(f, std::move(initial), t0, t_end, tau, refresh);
}

/// sum_{m=0..n} (2/3)^m, or 3 for the consistent scheme: the largest factor
/// by which a scheme amplifies the lumped symbol.
inline double scheme_amplification(const Scheme& s) {
  if (s.kind() == Scheme::Kind::Consistent)
    return 3.0;
  double sum = 1.0, rm = 1.0;
  for (int m = 1; m <= std::min(s.corrections(), 64); ++m) {
    rm *= 2.0 / 3.0;
    sum += rm;
  }
  return sum;
}

/// Safety fraction and RK4 stability radius used by the step rule.
inline constexpr double rk4_stability_radius = 2.8;
inline constexpr double step_safety = 0.8;

/// 0.8 * 2.8 / rho with rho = (4 kappa / h^2 + |lambda| / h) times the scheme
/// amplification, the symbol maximum over the Nyquist band on a uniform mesh.
inline double stable_time_step_1d(const Scheme& s, double kappa, double lambda, double h) {
  if (!(h > 0.0))
    throw DomainError("mesh size must be positive");
  const double rho = (4.0 * kappa / (h * h) + std::abs(lambda) / h) * scheme_amplification(s);
  if (!(rho > 0.0))
    throw DomainError("kappa + |lambda| must be positive");
  return step_safety * rk4_stability_radius / rho;
}

/// Power-iteration estimate of the largest |eigenvalue| of the homogeneous
/// scheme operator at time t.
inline double estimate_spectral_radius(const Scheme& s, const MolSystem& sys, double t,
                                       int iterations = 60) {
  const int n = sys.size();
  std::mt19937_64 rng(0x5eed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i)
    v[i] = sys.is_boundary[i] ? 0.0 : unit(rng);
  double norm = std::sqrt(detail::real_dot(v, v));
  if (norm == 0.0)
    return 0.0;
  double best = 0.0;
  for (int it = 0; it < iterations; ++it) {
    for (auto& x : v)
      x /= norm;
    v = rhs<double>(s, sys, t, v);
    norm = std::sqrt(detail::real_dot(v, v));
    if (norm == 0.0)
      return best;
    if (it >= iterations - 10)
      best = std::max(best, norm);
  }
  return best;
}

/// 0.8 * 2.8 / rho with rho from power iteration, padded by 10%.
inline double stable_time_step(const Scheme& s, const MolSystem& sys, double t) {
  const double rho = 1.1 * estimate_spectral_radius(s, sys, t);
  if (!(rho > 0.0))
    throw DomainError("scheme operator is zero");
  return step_safety * rk4_stability_radius / rho;
}

} // namespace lumpcorr
