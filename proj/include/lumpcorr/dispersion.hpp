#pragma once

// Sign-deciding gap functions of the corrected, lumped and consistent
// schemes, their thresholds and roots, and the leading asymptotes of the
// squared symbol and harmonic error gaps.
//
// With z = ph, r = (2/3) sin^2(z/2), q = (sin(z/2)/(z/2))^2 and s = sin(z)/z:
//
//   |w_{n+1} - w|^2 - |w_n - w|^2 = r^{n+1} (k^2 p^4 F1 + l^2 p^2 F2)
//   |w_G - w|^2 - |w_n - w|^2     = r^{n+1}/(1-r) (k^2 p^4 G1 + l^2 p^2 G2)
//
// where F1 = q (2(q-1) + q U), F2 = s (2(s-1) + s U), U = 2 sum_{m=1..n} r^m
// + r^{n+1}, and G1, G2 are the same with V = (2r - r^{n+1})/(1-r) in place
// of U. f_n = F1 + mu^2 F2, g_n = G1 + mu^2 G2, f~_n = F2, g~_n = G2.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <optional>
#include <utility>
#include <vector>

#include "lumpcorr/error.hpp"
#include "lumpcorr/scheme.hpp"
#include "lumpcorr/series.hpp"
#include "lumpcorr/symbols.hpp"

namespace lumpcorr {

enum class GapKind { F, G, FTilde, GTilde };

enum class ThresholdKind { Z0, ZStar, Psi };

/// N1VsN: |w_{n+1} - w|^2 - |w_n - w|^2.
/// GVsN: |w_G - w|^2 - |w_n - w|^2.
/// GDistN: |w_G - w_{n+1}|^2 - |w_G - w_n|^2.
enum class GapPair { N1VsN, GVsN, GDistN };

struct RootReport {
  double root = 0.0;
  double lo = 0.0; ///< bracket end with a positive value
  double hi = 0.0; ///< bracket end with a non-positive value
  double residual = 0.0;
  bool sign_change = false;
};

namespace detail {

using Wide = long double;

inline constexpr std::size_t gap_series_terms = 14;
inline constexpr double gap_series_cutoff = 0.5;

using GapSeries = Series<Wide, gap_series_terms>;

/// Diffusive and convective parts (F1, F2) or (G1, G2).
struct GapParts {
  Wide diffusive = 0;
  Wide convective = 0;
};

struct GapPartSeries {
  GapSeries diffusive;
  GapSeries convective;
};

inline GapPartSeries build_gap_series(bool consistent, int n) {
  using S = GapSeries;
  constexpr auto K = gap_series_terms;
  const S one = S::constant(1);
  const S r = sin_half_squared_series<Wide, K>() * (Wide(2) / 3);
  const S sh = sinc_series<Wide, K>(Wide(0.5));
  const S q = sh * sh;
  const S s = sinc_series<Wide, K>();

  S tail;
  S rm = one;
  for (int m = 1; m <= n && m < static_cast<int>(K); ++m) {
    rm = rm * r;
    if (!consistent)
      tail += rm * Wide(2);
  }
  const S rn1 = n + 1 < static_cast<int>(K) ? rm * r : S{};
  if (consistent)
    tail = (r * Wide(2) - rn1) * geometric_inverse(r);
  else
    tail += rn1;

  return {q * ((q - one) * Wide(2) + q * tail), s * ((s - one) * Wide(2) + s * tail)};
}

inline const GapPartSeries& gap_series(bool consistent, int n) {
  thread_local std::vector<std::optional<GapPartSeries>> cache(2 * (max_corrections + 1));
  auto& slot = cache[(consistent ? max_corrections + 1 : 0) + n];
  if (!slot)
    slot = build_gap_series(consistent, n);
  return *slot;
}

/// (F1, F2) or, for consistent = true, (G1, G2) at z >= 0.
inline GapParts gap_parts(bool consistent, int n, double z_in) {
  n = std::min(n, max_corrections);
  const Wide z = std::abs(static_cast<Wide>(z_in));
  if (z < gap_series_cutoff) {
    const auto& gs = gap_series(consistent, n);
    const Wide w = z * z;
    return {gs.diffusive(w), gs.convective(w)};
  }
  const Wide sh = std::sin(z / 2);
  const Wide r = Wide(2) / 3 * sh * sh;
  const Wide q = (2 * sh / z) * (2 * sh / z);
  const Wide s = std::sin(z) / z;
  Wide rm = 1;
  Wide acc = 0;
  for (int m = 1; m <= n; ++m) {
    rm *= r;
    acc += rm;
  }
  const Wide rn1 = rm * r;
  const Wide tail = consistent ? (2 * r - rn1) / (1 - r) : 2 * acc + rn1;
  return {q * (2 * (q - 1) + q * tail), s * (2 * (s - 1) + s * tail)};
}

/// prod_{k=1..count} (b / k) = b^count / count!, without overflow.
inline double power_over_factorial(double b, int count) noexcept {
  double out = 1.0;
  for (int k = 1; k <= count; ++k)
    out *= b / k;
  return out;
}

inline void check_gap_n(int n) {
  if (n < 0)
    throw DomainError("gap index n must be non-negative");
}

} // namespace detail

/// f_n, g_n (need mu) or f~_n, g~_n (must not get mu). Even in z and 0 at
/// z = 0. n = 0 is accepted and compares the first correction with the
/// lumped scheme.
inline double gap_function(GapKind kind, int n, double z, std::optional<double> mu = {}) {
  detail::check_gap_n(n);
  const bool tilde = kind == GapKind::FTilde || kind == GapKind::GTilde;
  if (tilde && mu)
    throw DomainError("the pure-transport gap functions take no mu");
  if (!tilde && !mu)
    throw DomainError("f_n and g_n need mu = lambda/(kappa p)");
  if (!std::isfinite(z) || (mu && !std::isfinite(*mu)))
    throw DomainError("gap function arguments must be finite");
  if (z == 0.0)
    return 0.0;
  const bool consistent = kind == GapKind::G || kind == GapKind::GTilde;
  const auto parts = detail::gap_parts(consistent, n, z);
  if (tilde)
    return static_cast<double>(parts.convective);
  const detail::Wide m = *mu;
  return static_cast<double>(parts.diffusive + m * m * parts.convective);
}

inline double threshold(ThresholdKind kind, double mu) {
  if (!std::isfinite(mu))
    throw DomainError("mu must be finite");
  const double mu2 = mu * mu;
  switch (kind) {
  case ThresholdKind::Z0: {
    const double a = 156.0 * mu2 - 17.0;
    if (std::abs(a) <= 1e-12 * 17.0)
      return 6.0 * std::sqrt(130.0 / 1133.0);
    const double b = 98.0 * mu2 + 91.0;
    return std::sqrt(840.0 / (b + std::sqrt(b * b - 140.0 * a)));
  }
  case ThresholdKind::ZStar:
    return 6.0 * std::sqrt(33.0 * (80.0 + 79.0 * mu2) / (13399.0 + 30146.0 * mu2));
  case ThresholdKind::Psi: {
    const double b = 5880.0 * mu2 + 5460.0;
    const double c = 1797.0 * mu2 + 70.0;
    const double disc = b * b - 50400.0 * c;
    if (disc < 0.0)
      throw DomainError("psi has no real root for this mu");
    return std::sqrt(50400.0 / (b + std::sqrt(disc)));
  }
  }
  throw DomainError("unknown threshold kind");
}

/// Coefficient c_m of the alternating tail sum_{m>=4} (-1)^m c_m z^{2m} of f_1.
inline double taylor_coefficient(int m, double mu) {
  if (m < 4)
    throw DomainError("Taylor tail coefficients start at m = 4");
  using detail::power_over_factorial;
  const double mu2 = mu * mu;
  const int e4 = 2 * m + 4;
  const int e2 = 2 * m + 2;
  const double first = (172.0 * power_over_factorial(2.0, e4) -
                        20.0 * power_over_factorial(3.0, e4) + power_over_factorial(4.0, e4) -
                        524.0 * power_over_factorial(1.0, e4)) /
                       18.0;
  const double second = (4.0 * (power_over_factorial(1.0, e2) - power_over_factorial(3.0, e2)) +
                         25.0 * power_over_factorial(2.0, e2) +
                         0.25 * power_over_factorial(4.0, e2)) /
                        18.0;
  const double third = 4.0 * (1.0 + (m + 1) * mu2) * power_over_factorial(1.0, e2);
  return first + mu2 * second - third;
}

/// Scans (0, z_max] on 4096 uniform samples for the first plus-to-minus sign
/// change and bisects it down to a bracket of width tol (tol = 0 bisects to
/// machine resolution). Returns nullopt when there is no such change.
inline std::optional<RootReport> smallest_positive_root(GapKind kind, int n,
                                                        std::optional<double> mu, double z_max,
                                                        double tol = 1e-12) {
  constexpr int samples = 4096;
  if (!(z_max > 0.0) || z_max > std::numbers::pi * (1.0 + 1e-12))
    throw DomainError("z_max must lie in (0, pi]");
  if (!(tol >= 0.0))
    throw DomainError("tolerance must be non-negative");
  auto f = [&](double z) { return gap_function(kind, n, z, mu); };

  double prev_z = z_max / samples;
  double prev = f(prev_z);
  for (int i = 2; i <= samples; ++i) {
    const double z = z_max * i / samples;
    const double v = f(z);
    if (prev > 0.0 && v <= 0.0) {
      double lo = prev_z;
      double hi = z;
      double f_hi = v;
      while (hi - lo > tol && f_hi != 0.0) {
        const double mid = lo + 0.5 * (hi - lo);
        if (mid <= lo || mid >= hi)
          break;
        const double fm = f(mid);
        if (fm > 0.0) {
          lo = mid;
        } else {
          hi = mid;
          f_hi = fm;
        }
      }
      const double root = f_hi == 0.0 ? hi : lo + 0.5 * (hi - lo);
      return RootReport{root, lo, hi, f(root), true};
    }
    prev_z = z;
    prev = v;
  }
  return std::nullopt;
}

/// The pair's two schemes (k, j): the gap is |w_k - .|^2 - |w_j - .|^2.
inline std::pair<Scheme, Scheme> gap_schemes(GapPair pair, int n) {
  detail::check_gap_n(n);
  switch (pair) {
  case GapPair::N1VsN:
    return {Scheme::corrected(n + 1), Scheme::corrected(n)};
  case GapPair::GVsN:
  case GapPair::GDistN:
    return {Scheme::consistent(), Scheme::corrected(n)};
  }
  throw DomainError("unknown gap pair");
}

/// The squared-modulus gap from plain subtractions of the symbols.
inline double symbol_gap_direct(GapPair pair, int n, const SchemeParams& sp) {
  detail::check_gap_n(n);
  sp.validate();
  const Symbol wb = exact_symbol(sp);
  if (pair == GapPair::GDistN) {
    const Symbol wg = consistent_symbol(sp);
    return std::norm(wg - corrected_symbol(n + 1, sp)) - std::norm(wg - corrected_symbol(n, sp));
  }
  const auto [k, j] = gap_schemes(pair, n);
  return std::norm(scheme_symbol(k, sp) - wb) - std::norm(scheme_symbol(j, sp) - wb);
}

/// The squared-modulus gap from its factored form.
inline double symbol_gap_factored(GapPair pair, int n, const SchemeParams& sp) {
  detail::check_gap_n(n);
  sp.validate();
  if (sp.p == 0.0)
    return 0.0;
  const auto t = detail::mode_trig(sp);
  const double r = t.ratio;
  const double rn1 = detail::ipow(r, std::min(n, max_corrections) + 1);
  if (pair == GapPair::GDistN) {
    const double c2 = t.diffusive * t.diffusive + t.convective * t.convective;
    return -c2 * rn1 * rn1 * (1.0 + r) / (1.0 - r);
  }
  const bool consistent = pair == GapPair::GVsN;
  const auto parts = detail::gap_parts(consistent, n, sp.z());
  const detail::Wide kp2 = static_cast<detail::Wide>(sp.kappa) * sp.p * sp.p;
  const detail::Wide lp = static_cast<detail::Wide>(sp.lambda) * sp.p;
  const detail::Wide body = kp2 * kp2 * parts.diffusive + lp * lp * parts.convective;
  const double pre = consistent ? rn1 / (1.0 - r) : rn1;
  return pre * static_cast<double>(body);
}

/// Tolerance for comparing the direct and factored gaps: rounding in the
/// direct form scales with |w| times the defect moduli.
inline double symbol_gap_tolerance(GapPair pair, int n, const SchemeParams& sp) {
  const auto [k, j] = gap_schemes(pair, n);
  const Symbol ref = pair == GapPair::GDistN ? consistent_symbol(sp) : exact_symbol(sp);
  const Symbol a = pair == GapPair::GDistN ? corrected_symbol(n + 1, sp) : scheme_symbol(k, sp);
  const Symbol b = scheme_symbol(j, sp);
  const double size = std::abs(ref) + std::abs(a) + std::abs(b);
  const double scale = size * (std::abs(a - ref) + std::abs(b - ref));
  return std::max(1e-12, 1e-10 * scale);
}

/// Throws InternalMismatch if the direct and factored gaps disagree.
inline void check_symbol_gap(GapPair pair, int n, const SchemeParams& sp) {
  const double direct = symbol_gap_direct(pair, n, sp);
  const double factored = symbol_gap_factored(pair, n, sp);
  if (!(std::abs(direct - factored) <= symbol_gap_tolerance(pair, n, sp)))
    throw InternalMismatch("direct and factored symbol gaps disagree");
}

/// The factored squared-modulus gap; debug builds also cross-check it
/// against the direct form.
inline double symbol_gap(GapPair pair, int n, const SchemeParams& sp) {
#ifndef NDEBUG
  if (sp.p != 0.0)
    check_symbol_gap(pair, n, sp);
#endif
  return symbol_gap_factored(pair, n, sp);
}

/// Leading term of symbol_gap (t absent) or of harmonic_error_gap (t given)
/// as h -> 0, for N1VsN and GVsN with n >= 1.
inline double leading_asymptote(GapPair pair, int n, const SchemeParams& sp,
                                std::optional<double> t = {}) {
  if (pair == GapPair::GDistN)
    throw DomainError("no leading asymptote for the consistent-distance gap");
  if (n < 1)
    throw DomainError("leading asymptotes need n >= 1");
  sp.validate();
  if (t && *t < 0.0)
    throw DomainError("time must be non-negative");
  const double p2 = sp.p * sp.p;
  const double hp = sp.h * sp.p;
  double value = 0.0;
  if (sp.kappa > 0.0) {
    // kappa^2 p^{2n+8} h^{2n+4} / 6^{n+2}
    value = sp.kappa * sp.kappa * p2 * p2 * detail::ipow(hp * hp / 6.0, n + 2);
    if (t)
      value *= std::exp(-2.0 * sp.kappa * p2 * *t) * *t * *t;
  } else {
    // -lambda^2 p^{2n+8} a_n h^{2n+6}
    const double hp2 = hp * hp;
    const double a_scaled = n == 1 ? 7.0 / 6480.0 * 216.0 : 1.0 / 15.0;
    value = -sp.lambda * sp.lambda * p2 * a_scaled * detail::ipow(hp2 / 6.0, n + 2) * hp2;
    if (t)
      value *= *t * *t;
  }
  return value;
}

/// |e^{t w_k} - e^{t w}|^2 - |e^{t w_j} - e^{t w}|^2 for two schemes, free of
/// the cancellation that a direct evaluation suffers at small h.
inline double harmonic_gap(const Scheme& k, const Scheme& j, const SchemeParams& sp, double t) {
  sp.validate();
  if (t < 0.0)
    throw DomainError("time must be non-negative");
  if (sp.p == 0.0 || t == 0.0)
    return 0.0;
  const Symbol b = symbol_defect(j, sp) * t;
  const Symbol a = symbol_difference(k, j, sp) * t;
  const Symbol u = lumpcorr::expm1(b);
  const Symbol v = std::exp(b) * lumpcorr::expm1(a);
  const double decay = std::exp(-2.0 * sp.kappa * sp.p * sp.p * t);
  return decay * (std::norm(v) + 2.0 * (std::conj(u) * v).real());
}

inline double harmonic_error_gap(GapPair pair, int n, const SchemeParams& sp, double t) {
  if (pair == GapPair::GDistN)
    throw DomainError("harmonic gaps are defined against the exact solution");
  if (!(t > 0.0))
    throw DomainError("time must be positive");
  const auto [k, j] = gap_schemes(pair, n);
  return harmonic_gap(k, j, sp, t);
}

struct PeRow {
  double pe = 0.0;
  double z0 = 0.0;
  double z_tilde = 0.0;
  double psi = 0.0;
  double z0_scaled = 0.0;  ///< z0 Pe / |p|
  double gap_scaled = 0.0; ///< (z~ - z0) Pe^3 / |p|^3
  double psi_gap_scaled = 0.0; ///< (psi - z0) Pe^3 / |p|^3
};

/// Smallest Peclet number for which z0 < psi < 1 < z* is guaranteed.
inline double pe_asymptotics_min_mu2() noexcept { return 39550.0 / 9963.0; }

/// z0, the first root z~ of f_1, and psi across a Peclet sweep at wave
/// number p, with their scaled gaps.
inline std::vector<PeRow> pe_asymptotics(double p, const std::vector<double>& pe_values) {
  if (!(p != 0.0) || !std::isfinite(p))
    throw DomainError("wave number must be finite and non-zero");
  std::vector<PeRow> rows;
  rows.reserve(pe_values.size());
  const double ap = std::abs(p);
  for (std::size_t i = 0; i < pe_values.size(); ++i) {
    const double pe = pe_values[i];
    if (i > 0 && !(pe > pe_values[i - 1]))
      throw DomainError("Peclet values must be increasing");
    const double mu = pe / ap;
    if (!(mu * mu > pe_asymptotics_min_mu2()))
      throw DomainError("Peclet number too small: need mu^2 > 39550/9963");
    PeRow row;
    row.pe = pe;
    row.z0 = threshold(ThresholdKind::Z0, mu);
    row.psi = threshold(ThresholdKind::Psi, mu);
    const auto root = smallest_positive_root(GapKind::F, 1, mu,
                                             std::min(std::numbers::pi, 2.0 * row.psi), 0.0);
    if (!root)
      throw InternalMismatch("f_1 has no sign change below 2 psi");
    row.z_tilde = root->root;
    row.z0_scaled = row.z0 * mu;
    row.gap_scaled = (row.z_tilde - row.z0) * mu * mu * mu;
    row.psi_gap_scaled = (row.psi - row.z0) * mu * mu * mu;
    rows.push_back(row);
  }
  return rows;
}

} // namespace lumpcorr
