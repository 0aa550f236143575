#pragma once

// Fourier symbols of the 1D convection-diffusion equation
//
//     u_t + lambda u_x - kappa u_xx = 0
//
// and of its P1 semi-discretisations on a uniform mesh: lumped mass,
// consistent mass, and lumped mass with n Neumann-series corrections.
// A symbol omega is the complex growth rate of the harmonic
// a_k(t) = exp(omega t) exp(i k h p); Re(omega) is the dissipation rate and
// -Im(omega) the phase frequency.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

#include "lumpcorr/error.hpp"
#include "lumpcorr/scheme.hpp"

namespace lumpcorr {

using Symbol = std::complex<double>;

/// Physical and discretisation parameters of a single Fourier mode.
struct SchemeParams {
  double lambda = 0.0; ///< convection speed
  double kappa = 0.0;  ///< diffusion coefficient, >= 0
  double h = 1.0;      ///< mesh size, > 0
  double p = 0.0;      ///< wave number

  /// Dimensionless wave number ph.
  double z() const noexcept { return p * h; }

  /// lambda / (kappa p); requires kappa > 0 and p != 0.
  double mu() const {
    if (!(kappa > 0.0) || p == 0.0)
      throw DomainError("mu = lambda/(kappa p) needs kappa > 0 and p != 0");
    return lambda / (kappa * p);
  }

  /// Peclet number |lambda| / kappa; requires kappa > 0.
  double peclet() const {
    if (!(kappa > 0.0))
      throw DomainError("Peclet number needs kappa > 0");
    return std::abs(lambda) / kappa;
  }

  void validate() const {
    if (!std::isfinite(lambda) || !std::isfinite(kappa) || !std::isfinite(h) ||
        !std::isfinite(p))
      throw DomainError("scheme parameters must be finite");
    if (kappa < 0.0)
      throw DomainError("kappa must be non-negative");
    if (kappa + std::abs(lambda) <= 0.0)
      throw DomainError("kappa + |lambda| must be positive");
    if (!(h > 0.0))
      throw DomainError("mesh size h must be positive");
  }
};

/// Correction counts above this are clamped; for |ph| <= pi the geometric
/// ratio is at most 2/3 and later terms are below double resolution.
inline constexpr int max_corrections = 64;

/// The m-th real and imaginary decrements, omega_m = omega_{m-1} - A_m - i B_m.
struct CorrectionTerm {
  double a = 0.0;
  double b = 0.0;
};

namespace detail {

/// Quantities shared by every discrete symbol at a given (h, p).
struct ModeTrig {
  double sin_half_sq; ///< sin^2(ph/2)
  double ratio;       ///< (2/3) sin^2(ph/2), the Neumann series ratio
  double diffusive;   ///< (4 kappa / h^2) sin^2(ph/2)
  double convective;  ///< (lambda / h) sin(ph)
};

inline ModeTrig mode_trig(const SchemeParams& sp) noexcept {
  const double z = sp.p * sp.h;
  const double s = std::sin(0.5 * z);
  const double s2 = s * s;
  return {s2, (2.0 / 3.0) * s2, 4.0 * sp.kappa / (sp.h * sp.h) * s2,
          sp.lambda / sp.h * std::sin(z)};
}

/// sin(x)/x - 1, accurate for small |x|.
inline double sinc_minus_one(double x) noexcept {
  const double w = x * x;
  if (std::abs(x) < 0.1) {
    // Alternating tail; the first omitted term is below 1e-17 * |result|.
    return w * (-1.0 / 6.0 +
                w * (1.0 / 120.0 +
                     w * (-1.0 / 5040.0 + w * (1.0 / 362880.0 - w / 39916800.0))));
  }
  return std::sin(x) / x - 1.0;
}

/// Integer power by repeated multiplication.
inline double ipow(double x, int n) noexcept {
  double out = 1.0;
  for (int i = 0; i < n; ++i)
    out *= x;
  return out;
}

} // namespace detail

/// Symbol of the PDE itself: -kappa p^2 - i lambda p.
inline Symbol exact_symbol(const SchemeParams& sp) noexcept {
  return {-sp.kappa * sp.p * sp.p, -sp.lambda * sp.p};
}

/// Symbol of the n-th corrected scheme, the two finite sums with n+1 terms.
/// n = 0 is the lumped scheme; n is clamped to max_corrections.
inline Symbol corrected_symbol(int n, const SchemeParams& sp) {
  if (n < 0)
    throw DomainError("number of corrections must be non-negative");
  n = std::min(n, max_corrections);
  const auto t = detail::mode_trig(sp);
  double re = -t.diffusive;
  double im = -t.convective;
  double rm = 1.0;
  for (int m = 1; m <= n; ++m) {
    rm *= t.ratio;
    re -= t.diffusive * rm;
    im -= t.convective * rm;
  }
  return {re, im};
}

inline Symbol lumped_symbol(const SchemeParams& sp) {
  return corrected_symbol(0, sp);
}

/// Symbol of the consistent-mass Galerkin scheme.
inline Symbol consistent_symbol(const SchemeParams& sp) noexcept {
  const auto t = detail::mode_trig(sp);
  const double denom = 1.0 - t.ratio;
  return {-t.diffusive / denom, -t.convective / denom};
}

inline CorrectionTerm correction_term(int m, const SchemeParams& sp) {
  if (m < 1)
    throw DomainError("correction index must be >= 1");
  const auto t = detail::mode_trig(sp);
  const double rm = detail::ipow(t.ratio, m);
  return {t.diffusive * rm, t.convective * rm};
}

/// Symbol of any scheme.
inline Symbol scheme_symbol(const Scheme& s, const SchemeParams& sp) {
  if (s.kind() == Scheme::Kind::Consistent)
    return consistent_symbol(sp);
  return corrected_symbol(s.corrections(), sp);
}

namespace detail {

/// Geometric sum behind a scheme minus one: sum_{m=1..n} r^m, or r/(1-r)
/// for the consistent scheme.
inline double series_excess(const Scheme& s, double r) noexcept {
  if (s.kind() == Scheme::Kind::Consistent)
    return r / (1.0 - r);
  const int n = std::min(s.corrections(), max_corrections);
  double acc = 0.0;
  double rm = 1.0;
  for (int m = 1; m <= n; ++m) {
    rm *= r;
    acc += rm;
  }
  return acc;
}

/// sum_{m in (j, k]} r^m style difference S_k - S_j of two scheme sums.
inline double series_difference(const Scheme& k, const Scheme& j, double r) noexcept {
  using K = Scheme::Kind;
  if (k == j)
    return 0.0;
  if (k.kind() == K::Consistent) {
    const int n = std::min(j.corrections(), max_corrections);
    return ipow(r, n + 1) / (1.0 - r);
  }
  if (j.kind() == K::Consistent)
    return -series_difference(j, k, r);
  const int lo = std::min(k.corrections(), j.corrections());
  const int hi = std::min(std::max(k.corrections(), j.corrections()), max_corrections);
  double acc = 0.0;
  double rm = ipow(r, lo);
  for (int m = lo + 1; m <= hi; ++m) {
    rm *= r;
    acc += rm;
  }
  return k.corrections() > j.corrections() ? acc : -acc;
}

} // namespace detail

/// omega_scheme - omega_exact, evaluated without the O(h^2) cancellation of
/// a plain subtraction.
inline Symbol symbol_defect(const Scheme& s, const SchemeParams& sp) {
  if (sp.p == 0.0)
    return {0.0, 0.0};
  const double z = sp.z();
  const double half = 0.5 * z;
  const double sh = std::sin(half);
  const double r = (2.0 / 3.0) * sh * sh;
  const double sc_half_m1 = detail::sinc_minus_one(half);
  const double q = (1.0 + sc_half_m1) * (1.0 + sc_half_m1);
  const double q_m1 = sc_half_m1 * (2.0 + sc_half_m1);
  const double sz_m1 = detail::sinc_minus_one(z);
  const double sz = 1.0 + sz_m1;
  const double excess = detail::series_excess(s, r);
  const double kp2 = sp.kappa * sp.p * sp.p;
  const double lp = sp.lambda * sp.p;
  return {-kp2 * (q_m1 + q * excess), -lp * (sz_m1 + sz * excess)};
}

/// omega_k - omega_j for two schemes, from the geometric-series tails.
inline Symbol symbol_difference(const Scheme& k, const Scheme& j, const SchemeParams& sp) {
  const auto t = detail::mode_trig(sp);
  const double d = detail::series_difference(k, j, t.ratio);
  return {-t.diffusive * d, -t.convective * d};
}

/// exp(w) - 1 without cancellation for small |w|.
inline std::complex<double> expm1(std::complex<double> w) noexcept {
  const double x = w.real();
  const double y = w.imag();
  const double sh = std::sin(0.5 * y);
  const double re = std::expm1(x) * std::cos(y) - 2.0 * sh * sh;
  const double im = std::exp(x) * std::sin(y);
  return {re, im};
}

/// |exp((omega_num - omega_exact) t) - 1|: the relative max-norm error of a
/// single periodic harmonic advanced with symbol omega_num.
inline double harmonic_rel_error(Symbol omega_num, Symbol omega_exact, double t) {
  if (t < 0.0)
    throw DomainError("time must be non-negative");
  return std::abs(expm1((omega_num - omega_exact) * t));
}

} // namespace lumpcorr
