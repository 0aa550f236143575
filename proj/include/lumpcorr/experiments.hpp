#pragma once

// Exact solutions of the benchmark problems, error norms, empirical orders,
// 1D convergence tables (symbol-exact or time-stepped) and multi-D FEM runs.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "lumpcorr/assembly.hpp"
#include "lumpcorr/dispersion.hpp"
#include "lumpcorr/error.hpp"
#include "lumpcorr/integrate.hpp"
#include "lumpcorr/mesh.hpp"
#include "lumpcorr/scheme.hpp"
#include "lumpcorr/symbols.hpp"

namespace lumpcorr {

using Complex = std::complex<double>;

/// u = A e^{(-kappa p^2 - i lambda p) t} e^{i p x} on the periodic interval [a, b].
struct Harmonic1D {
  double amplitude = 1.0;
  double p = 3.0 * std::numbers::pi;
  double lambda = 1.0;
  double kappa = 1e-2;
  double a = 0.0;
  double b = 10.0;

  SchemeParams params(double h) const { return {lambda, kappa, h, p}; }
};

/// u = A exp(k.x + |k|^2 kappa t) exp(lambda.x / (2 kappa) - |lambda|^2 t / (4 kappa))
/// on the unit square (dim 2) or cube (dim 3).
struct ConvDiff {
  int dim = 2;
  double amplitude = 100.0;
  Point k{1.0, 2.0, 0.0};
  Point lambda{1.0, 1.5, 0.0};
  double kappa = 1.0;
};

/// u = cos(2 pi (x - l1 t)) cos(2 pi (y - l2 t)) on the unit square.
struct Transport2D {
  Point lambda{1.0, 1.5, 0.0};
};

/// u_t + lambda/(t+1) x.grad u = kappa lap u on the unit cube with
/// u = A (1 - 2 lambda) |x|^2 (t+1)^{-2 lambda} + 6 A kappa (t+1)^{1 - 2 lambda}.
struct Decay3D {
  double amplitude = 100.0;
  double kappa = 0.35;
  double lambda = 1.0;
};

/// u = prod_c sin(2 pi (x_c - l_c t)) on the unit cube.
struct Transport3D {
  Point lambda{1.0, -2.0, 3.0};
};

using ExactSolution = std::variant<Harmonic1D, ConvDiff, Transport2D, Decay3D, Transport3D>;

/// Benchmark k = 1..7 with its reference parameters. Example 1 has kappa =
/// 1e-2; set Harmonic1D::kappa = 0 for its pure-transport variant.
inline ExactSolution benchmark_example(int k) {
  switch (k) {
  case 1:
    return Harmonic1D{};
  case 2:
    return Harmonic1D{1.0, 20.0 * std::numbers::pi, 1.0, 0.0, 0.0, 1.0};
  case 3:
    return ConvDiff{};
  case 4:
    return Transport2D{};
  case 5:
    return ConvDiff{3, 10.0, {1.0, 1.5, 2.0}, {1.0, 1.5, 2.0}, 2.0};
  case 6:
    return Decay3D{};
  case 7:
    return Transport3D{};
  default:
    throw DomainError("examples are numbered 1 to 7");
  }
}

/// Final time used for each benchmark's tables.
inline double benchmark_time(int k) {
  switch (k) {
  case 1:
  case 7:
    return 0.1;
  case 2:
    return 1.0;
  case 3:
  case 4:
  case 5:
  case 6:
    return 0.5;
  default:
    throw DomainError("examples are numbered 1 to 7");
  }
}

inline int dimension(const ExactSolution& sol) {
  return std::visit(
      [](const auto& s) -> int {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, Harmonic1D>)
          return 1;
        else if constexpr (std::is_same_v<S, ConvDiff>)
          return s.dim;
        else if constexpr (std::is_same_v<S, Transport2D>)
          return 2;
        else
          return 3;
      },
      sol);
}

inline bool is_complex(const ExactSolution& sol) {
  return std::holds_alternative<Harmonic1D>(sol);
}

inline double diffusion_coefficient(const ExactSolution& sol) {
  return std::visit(
      [](const auto& s) -> double {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, Transport2D> || std::is_same_v<S, Transport3D>)
          return 0.0;
        else
          return s.kappa;
      },
      sol);
}

namespace detail {

inline double sq(const Point& v, int d) noexcept { return dot(v, v, d); }

} // namespace detail

/// The exact solution at (t, x).
inline Complex exact_eval(const ExactSolution& sol, double t, const Point& x) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  return std::visit(
      [&](const auto& s) -> Complex {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, Harmonic1D>) {
          const Complex w = exact_symbol(s.params(1.0));
          return s.amplitude * std::exp(w * t + Complex(0.0, s.p * x[0]));
        } else if constexpr (std::is_same_v<S, ConvDiff>) {
          const int d = s.dim;
          const double rate = detail::sq(s.k, d) * s.kappa - detail::sq(s.lambda, d) / (4.0 * s.kappa);
          double expo = rate * t;
          for (int c = 0; c < d; ++c)
            expo += (s.k[c] + s.lambda[c] / (2.0 * s.kappa)) * x[c];
          return s.amplitude * std::exp(expo);
        } else if constexpr (std::is_same_v<S, Transport2D>) {
          return std::cos(two_pi * (x[0] - s.lambda[0] * t)) *
                 std::cos(two_pi * (x[1] - s.lambda[1] * t));
        } else if constexpr (std::is_same_v<S, Decay3D>) {
          const double tp = t + 1.0;
          return s.amplitude * (1.0 - 2.0 * s.lambda) * detail::sq(x, 3) *
                     std::pow(tp, -2.0 * s.lambda) +
                 6.0 * s.amplitude * s.kappa * std::pow(tp, 1.0 - 2.0 * s.lambda);
        } else {
          return std::sin(two_pi * (x[0] - s.lambda[0] * t)) *
                 std::sin(two_pi * (x[1] - s.lambda[1] * t)) *
                 std::sin(two_pi * (x[2] - s.lambda[2] * t));
        }
      },
      sol);
}

/// The exact time derivative at (t, x).
inline Complex exact_rate(const ExactSolution& sol, double t, const Point& x) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  return std::visit(
      [&](const auto& s) -> Complex {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, Harmonic1D>) {
          return exact_symbol(s.params(1.0)) * exact_eval(sol, t, x);
        } else if constexpr (std::is_same_v<S, ConvDiff>) {
          const int d = s.dim;
          const double rate = detail::sq(s.k, d) * s.kappa - detail::sq(s.lambda, d) / (4.0 * s.kappa);
          return rate * exact_eval(sol, t, x);
        } else if constexpr (std::is_same_v<S, Transport2D>) {
          const double a = two_pi * (x[0] - s.lambda[0] * t);
          const double b = two_pi * (x[1] - s.lambda[1] * t);
          return two_pi * (s.lambda[0] * std::sin(a) * std::cos(b) +
                           s.lambda[1] * std::cos(a) * std::sin(b));
        } else if constexpr (std::is_same_v<S, Decay3D>) {
          const double tp = t + 1.0;
          const double e = -2.0 * s.lambda;
          return s.amplitude * (1.0 - 2.0 * s.lambda) * detail::sq(x, 3) * e *
                     std::pow(tp, e - 1.0) +
                 6.0 * s.amplitude * s.kappa * (1.0 + e) * std::pow(tp, e);
        } else {
          const double a = two_pi * (x[0] - s.lambda[0] * t);
          const double b = two_pi * (x[1] - s.lambda[1] * t);
          const double c = two_pi * (x[2] - s.lambda[2] * t);
          return -two_pi * (s.lambda[0] * std::cos(a) * std::sin(b) * std::sin(c) +
                            s.lambda[1] * std::sin(a) * std::cos(b) * std::sin(c) +
                            s.lambda[2] * std::sin(a) * std::sin(b) * std::cos(c));
        }
      },
      sol);
}

/// Node-exclusion threshold of the relative max norm.
inline constexpr double relative_exclusion = 1e-10;

struct ErrorReport {
  double inf_abs = 0.0;
  double inf_rel = 0.0;
  double l2_rel = 0.0;
  int excluded_nodes = 0;
};

/// Max absolute, max relative (skipping |exact| < 1e-10) and discrete
/// relative Euclidean errors.
template <class T>
ErrorReport error_norms(const std::vector<T>& numeric, const std::vector<T>& exact) {
  if (numeric.size() != exact.size())
    throw DomainError("numeric and exact vectors differ in length");
  if (exact.empty())
    throw DomainError("error norms need at least one node");
  ErrorReport r;
  double se = 0.0;
  double su = 0.0;
  bool any = false;
  for (std::size_t i = 0; i < exact.size(); ++i) {
    const double e = std::abs(numeric[i] - exact[i]);
    const double u = std::abs(exact[i]);
    r.inf_abs = std::max(r.inf_abs, e);
    se += e * e;
    su += u * u;
    if (u < relative_exclusion) {
      ++r.excluded_nodes;
      continue;
    }
    any = true;
    r.inf_rel = std::max(r.inf_rel, e / u);
  }
  if (!any)
    throw AllNodesExcluded("every node has |u_exact| below the exclusion threshold");
  r.l2_rel = su > 0.0 ? std::sqrt(se) / std::sqrt(su) : 0.0;
  return r;
}

/// ln(A_prev / A_cur) / ln(h_prev / h_cur); throws SignChange unless the two
/// gaps share a sign.
inline double empirical_order(double a_prev, double a_cur, double h_prev, double h_cur) {
  if (!(h_prev > h_cur) || !(h_cur > 0.0))
    throw DomainError("empirical order needs h_prev > h_cur > 0");
  if (!(a_prev * a_cur > 0.0))
    throw SignChange("gaps of different sign have no empirical order");
  return std::log(a_prev / a_cur) / std::log(h_prev / h_cur);
}

struct SymbolErrors {
  double rel_err = 0.0;
  double abs_err = 0.0;
};

/// Errors of a unit harmonic advanced exactly by the scheme's symbol.
inline SymbolErrors evolve_symbol_exact(const Scheme& s, const SchemeParams& sp, double t) {
  sp.validate();
  if (t < 0.0)
    throw DomainError("time must be non-negative");
  const double rel = std::abs(lumpcorr::expm1(symbol_defect(s, sp) * t));
  return {rel, rel * std::exp(-sp.kappa * sp.p * sp.p * t)};
}

enum class ConvergenceMode { SymbolExact, TimeStepped };

using SchemePair = std::pair<Scheme, Scheme>;

/// The pairs (k, j) whose gaps A(k, j) a table reports.
inline std::vector<SchemePair> default_pairs(bool pure_transport) {
  const auto c = [](int n) { return Scheme::corrected(n); };
  const auto G = Scheme::consistent();
  if (pure_transport)
    return {{c(1), c(2)}, {c(2), c(3)}, {c(1), G}, {c(2), G}, {c(3), G}};
  return {{c(2), c(1)}, {c(3), c(2)}, {G, c(1)}, {G, c(2)}, {G, c(3)}};
}

struct ConvergenceColumn {
  int n_nodes = 0;
  double h = 0.0;
  double tau = 0.0; ///< time step used; 0 in symbol-exact mode
  std::vector<ErrorReport> errors; ///< per scheme
  std::vector<double> gaps;        ///< A(k, j) = |err_k|_inf^2 - |err_j|_inf^2, per pair
  std::vector<double> rel_diffs;   ///< |err_k|_inf,rel - |err_j|_inf,rel, per pair
  std::vector<std::optional<double>> orders; ///< P_{k,j}; empty in the first column
};

struct ConvergenceTable {
  std::vector<Scheme> schemes;
  std::vector<SchemePair> pairs;
  ConvergenceMode mode = ConvergenceMode::SymbolExact;
  double t = 0.0;
  std::vector<ConvergenceColumn> columns;

  /// Index of a scheme in `schemes`.
  std::size_t scheme_index(const Scheme& s) const {
    for (std::size_t i = 0; i < schemes.size(); ++i)
      if (schemes[i] == s)
        return i;
    throw DomainError("scheme " + s.label() + " is not part of this table");
  }
};

struct StepOptions {
  double tau = 0.0;               ///< cap on the starting step; 0 uses the stability step
  double time_error_ratio = 1e-3; ///< required time error / spatial error
  int max_halvings = 20;
};

template <class T>
struct StepResult {
  std::vector<T> solution;
  ErrorReport errors;
  double tau = 0.0;
  double time_error = 0.0; ///< Richardson estimate of the RK4 error, max norm
};

using TimeSteppedResult = StepResult<Complex>;

namespace detail {

/// Coordinates of the first node carrying each dof.
inline std::vector<Point> dof_points(const SimplicialMesh& m) {
  std::vector<Point> pts(m.num_dofs());
  std::vector<char> seen(pts.size(), 0);
  for (int i = 0; i < m.num_nodes(); ++i) {
    const int d = m.dof(i);
    if (!seen[d]) {
      pts[d] = m.nodes[i];
      seen[d] = 1;
    }
  }
  return pts;
}

template <class T>
double max_abs_diff(const std::vector<T>& a, const std::vector<T>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

/// Halves tau from the given start until the Richardson estimate
/// (16/15)|u_tau - u_{tau/2}| is within opt.time_error_ratio of the max-norm
/// spatial error of u_{tau/2}, then returns the tau/2 run.
template <class T, class Run>
StepResult<T> refine_step(Run&& run, const std::vector<T>& exact, double tau, double t_end,
                          const StepOptions& opt) {
  std::vector<T> coarse = run(tau);
  if (t_end == 0.0) {
    const auto err = error_norms(coarse, exact);
    return {std::move(coarse), err, tau, 0.0};
  }
  for (int i = 0; i < opt.max_halvings; ++i) {
    tau *= 0.5;
    std::vector<T> fine = run(tau);
    const double time_err = max_abs_diff(coarse, fine) * 16.0 / 15.0;
    auto err = error_norms(fine, exact);
    if (time_err <= opt.time_error_ratio * err.inf_abs)
      return {std::move(fine), err, tau, time_err};
    coarse = std::move(fine);
  }
  throw SolveFailure("time step rule did not reach the requested time accuracy");
}

} // namespace detail

/// Assembled periodic system of a harmonic problem with N nodes.
inline MolSystem harmonic_system(const Harmonic1D& hm, int n_nodes) {
  const auto pm = uniform_1d_periodic(hm.a, hm.b, n_nodes);
  return make_system(assemble_mass(pm), assemble_diffusion(pm, hm.kappa),
                     assemble_convection(pm, hm.lambda));
}

/// RK4 run of one scheme on the periodic harmonic problem. The step starts at
/// the stability step (or options.tau if smaller) and is halved until the
/// Richardson estimate of the time error is below time_error_ratio times the
/// max-norm spatial error.
inline TimeSteppedResult run_time_stepped_1d(const Harmonic1D& hm, int n_nodes, const Scheme& s,
                                             double t, const StepOptions& opt = {}) {
  const auto pm = uniform_1d_periodic(hm.a, hm.b, n_nodes);
  const MolSystem sys = harmonic_system(hm, n_nodes);
  const ExactSolution sol = hm;
  std::vector<Complex> u0(pm.unknowns()), exact(pm.unknowns());
  for (int k = 0; k < pm.unknowns(); ++k) {
    u0[k] = exact_eval(sol, 0.0, {pm.x(k), 0.0, 0.0});
    exact[k] = exact_eval(sol, t, {pm.x(k), 0.0, 0.0});
  }
  double tau = stable_time_step_1d(s, hm.kappa, hm.lambda, pm.h);
  if (opt.tau > 0.0)
    tau = std::min(tau, opt.tau);

  return detail::refine_step<Complex>(
      [&](double step) { return evolve<Complex>(s, sys, u0, 0.0, t, step); }, exact, tau, t, opt);
}

/// Errors of each scheme for each N, the squared max-norm gaps of each pair,
/// and the empirical orders between consecutive N.
inline ConvergenceTable run_convergence_1d(const Harmonic1D& hm, const std::vector<int>& ns,
                                           const std::vector<Scheme>& schemes,
                                           std::vector<SchemePair> pairs, ConvergenceMode mode,
                                           double t, const StepOptions& opt = {}) {
  if (ns.empty())
    throw DomainError("need at least one node count");
  for (std::size_t i = 1; i < ns.size(); ++i)
    if (!(ns[i] > ns[i - 1]))
      throw DomainError("node counts must be increasing");
  if (!(t >= 0.0))
    throw DomainError("time must be non-negative");
  ConvergenceTable table;
  table.schemes = schemes;
  table.pairs = std::move(pairs);
  table.mode = mode;
  table.t = t;
  for (const auto& [k, j] : table.pairs) {
    table.scheme_index(k);
    table.scheme_index(j);
  }

  for (int n_nodes : ns) {
    const auto pm = uniform_1d_periodic(hm.a, hm.b, n_nodes);
    const SchemeParams sp = hm.params(pm.h);
    ConvergenceColumn col;
    col.n_nodes = n_nodes;
    col.h = pm.h;
    std::vector<SymbolErrors> sym;
    for (const auto& s : schemes) {
      if (mode == ConvergenceMode::SymbolExact) {
        const auto e = evolve_symbol_exact(s, sp, t);
        sym.push_back(e);
        col.errors.push_back({e.abs_err * std::abs(hm.amplitude), e.rel_err, e.rel_err, 0});
      } else {
        const auto r = run_time_stepped_1d(hm, n_nodes, s, t, opt);
        col.errors.push_back(r.errors);
        col.tau = std::max(col.tau, r.tau);
      }
    }
    const double amp2 = hm.amplitude * hm.amplitude;
    const double decay = std::exp(-sp.kappa * sp.p * sp.p * t);
    for (const auto& [k, j] : table.pairs) {
      const auto ik = table.scheme_index(k);
      const auto ij = table.scheme_index(j);
      if (mode == ConvergenceMode::SymbolExact) {
        const double gap = harmonic_gap(k, j, sp, t);
        col.gaps.push_back(amp2 * gap);
        const double sum = sym[ik].abs_err + sym[ij].abs_err;
        col.rel_diffs.push_back(sum > 0.0 ? gap / sum / decay : 0.0);
      } else {
        const double ek = col.errors[ik].inf_abs;
        const double ej = col.errors[ij].inf_abs;
        col.gaps.push_back(ek * ek - ej * ej);
        col.rel_diffs.push_back(col.errors[ik].inf_rel - col.errors[ij].inf_rel);
      }
    }
    if (!table.columns.empty()) {
      const auto& prev = table.columns.back();
      for (std::size_t q = 0; q < table.pairs.size(); ++q) {
        try {
          col.orders.push_back(empirical_order(prev.gaps[q], col.gaps[q], prev.h, col.h));
        } catch (const SignChange&) {
          col.orders.push_back(std::nullopt);
        }
      }
    }
    table.columns.push_back(std::move(col));
  }
  return table;
}

struct FemResult {
  Scheme scheme = Scheme::lumped();
  ErrorReport errors;
  double tau = 0.0;
  double time_error = 0.0;
};

namespace detail {

template <class T>
T narrow(Complex z) {
  if constexpr (std::is_same_v<T, double>)
    return z.real();
  else
    return z;
}

inline MolSystem fem_system(const ExactSolution& sol, const SimplicialMesh& mesh) {
  CsrMatrix conv;
  std::function<double(double)> scale;
  if (const auto* d = std::get_if<Decay3D>(&sol)) {
    std::vector<Point> vel(mesh.nodes.size());
    for (std::size_t i = 0; i < vel.size(); ++i)
      for (int c = 0; c < 3; ++c)
        vel[i][c] = d->lambda * mesh.nodes[i][c];
    conv = assemble_convection(mesh, vel);
    scale = [](double t) { return 1.0 / (t + 1.0); };
  } else {
    const Point v = std::visit(
        [](const auto& s) -> Point {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, Harmonic1D>)
            return {s.lambda, 0.0, 0.0};
          else if constexpr (std::is_same_v<S, Decay3D>)
            return {0.0, 0.0, 0.0};
          else
            return s.lambda;
        },
        sol);
    conv = assemble_convection(mesh, v);
  }
  std::vector<int> boundary;
  for (int b : mesh.boundary_nodes)
    boundary.push_back(mesh.dof(b));
  return make_system(assemble_mass(mesh), assemble_diffusion(mesh, diffusion_coefficient(sol)),
                     std::move(conv), std::move(boundary), std::move(scale));
}

template <class T>
std::vector<FemResult> run_fem_impl(const ExactSolution& sol, const SimplicialMesh& mesh,
                                    const std::vector<Scheme>& schemes, double t_end,
                                    const StepOptions& opt) {
  const MolSystem sys = fem_system(sol, mesh);
  const auto pts = dof_points(mesh);
  const int n = sys.size();
  std::vector<T> u0(n), exact(n);
  for (int i = 0; i < n; ++i) {
    u0[i] = narrow<T>(exact_eval(sol, 0.0, pts[i]));
    exact[i] = narrow<T>(exact_eval(sol, t_end, pts[i]));
  }
  DirichletData<T> bc{
      [&](int dof, double t) { return narrow<T>(exact_eval(sol, t, pts[dof])); },
      [&](int dof, double t) { return narrow<T>(exact_rate(sol, t, pts[dof])); }};
  std::vector<FemResult> out;
  for (const auto& s : schemes) {
    double tau = stable_time_step(s, sys, 0.0);
    if (opt.tau > 0.0)
      tau = std::min(tau, opt.tau);
    auto r = refine_step<T>([&](double step) { return evolve<T>(s, sys, u0, 0.0, t_end, step, &bc); },
                            exact, tau, t_end, opt);
    out.push_back({s, r.errors, r.tau, r.time_error});
  }
  return out;
}

} // namespace detail

/// Evolves each scheme from exact initial data with exact Dirichlet data and
/// reports its error norms at t_end.
inline std::vector<FemResult> run_fem(const ExactSolution& sol, const SimplicialMesh& mesh,
                                      const std::vector<Scheme>& schemes, double t_end,
                                      const StepOptions& opt = {}) {
  if (dimension(sol) != mesh.dim)
    throw DomainError("example dimension does not match the mesh");
  if (!(t_end >= 0.0))
    throw DomainError("t_end must be non-negative");
  if (is_complex(sol))
    return detail::run_fem_impl<Complex>(sol, mesh, schemes, t_end, opt);
  return detail::run_fem_impl<double>(sol, mesh, schemes, t_end, opt);
}

} // namespace lumpcorr
