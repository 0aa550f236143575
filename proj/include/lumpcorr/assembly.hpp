#pragma once

// P1 finite-element matrices on simplicial meshes (consistent mass,
// diffusion stiffness, convection), row-sum lumping, and the matrix-free
// Neumann correction
//
//     (I + A + ... + A^n) Mbar^{-1} v,   A = Mbar^{-1} (Mbar - M).
//
// The semi-discrete system is M u' = -(K + C) u, with K the diffusion and C
// the convection matrix.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "lumpcorr/error.hpp"
#include "lumpcorr/mesh.hpp"
#include "lumpcorr/sparse.hpp"

namespace lumpcorr {

/// Diagonal of row sums of the consistent mass matrix.
struct LumpedMass {
  std::vector<double> diag;

  std::size_t size() const noexcept { return diag.size(); }
};

namespace detail {

/// Barycentric gradients and measure of one element.
struct ElementGeometry {
  double measure = 0.0;
  std::array<Point, 4> grad{};
};

inline ElementGeometry element_geometry(const SimplicialMesh& m, const Simplex& e) {
  ElementGeometry g;
  g.measure = signed_measure(m, e);
  if (!(g.measure > 0.0))
    throw DegenerateElement("element with non-positive measure");
  const int d = m.dim;
  // Rows of J^{-1}, where J has columns x_v - x_0, are the gradients of
  // barycentric coordinates 1..d.
  double J[3][3] = {};
  for (int v = 1; v <= d; ++v)
    for (int c = 0; c < d; ++c)
      J[c][v - 1] = m.nodes[e[v]][c] - m.nodes[e[0]][c];
  double inv[3][3] = {};
  if (d == 1) {
    inv[0][0] = 1.0 / J[0][0];
  } else if (d == 2) {
    const double det = J[0][0] * J[1][1] - J[0][1] * J[1][0];
    inv[0][0] = J[1][1] / det;
    inv[0][1] = -J[0][1] / det;
    inv[1][0] = -J[1][0] / det;
    inv[1][1] = J[0][0] / det;
  } else {
    const double det = J[0][0] * (J[1][1] * J[2][2] - J[1][2] * J[2][1]) -
                       J[0][1] * (J[1][0] * J[2][2] - J[1][2] * J[2][0]) +
                       J[0][2] * (J[1][0] * J[2][1] - J[1][1] * J[2][0]);
    inv[0][0] = (J[1][1] * J[2][2] - J[1][2] * J[2][1]) / det;
    inv[0][1] = (J[0][2] * J[2][1] - J[0][1] * J[2][2]) / det;
    inv[0][2] = (J[0][1] * J[1][2] - J[0][2] * J[1][1]) / det;
    inv[1][0] = (J[1][2] * J[2][0] - J[1][0] * J[2][2]) / det;
    inv[1][1] = (J[0][0] * J[2][2] - J[0][2] * J[2][0]) / det;
    inv[1][2] = (J[0][2] * J[1][0] - J[0][0] * J[1][2]) / det;
    inv[2][0] = (J[1][0] * J[2][1] - J[1][1] * J[2][0]) / det;
    inv[2][1] = (J[0][1] * J[2][0] - J[0][0] * J[2][1]) / det;
    inv[2][2] = (J[0][0] * J[1][1] - J[0][1] * J[1][0]) / det;
  }
  for (int v = 1; v <= d; ++v)
    for (int c = 0; c < d; ++c) {
      g.grad[v][c] = inv[v - 1][c];
      g.grad[0][c] -= inv[v - 1][c];
    }
  return g;
}

/// Exact P1 local mass entry: measure (1 + delta_ij) / ((d+1)(d+2)).
inline double local_mass(int d, double measure, int i, int j) noexcept {
  return measure * (i == j ? 2.0 : 1.0) / ((d + 1) * (d + 2));
}

inline double dot(const Point& a, const Point& b, int d) noexcept {
  double s = 0.0;
  for (int c = 0; c < d; ++c)
    s += a[c] * b[c];
  return s;
}

/// Sparsity pattern over dofs: one entry per pair of dofs sharing an element.
inline CsrMatrix sparsity_pattern(const SimplicialMesh& m) {
  const int n = m.num_dofs();
  std::vector<std::vector<int>> cols(n);
  for (const auto& e : m.elements)
    for (int a = 0; a <= m.dim; ++a)
      for (int b = 0; b <= m.dim; ++b)
        cols[m.dof(e[a])].push_back(m.dof(e[b]));
  std::vector<int> off(n + 1, 0);
  std::vector<int> idx;
  for (int i = 0; i < n; ++i) {
    auto& c = cols[i];
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
    idx.insert(idx.end(), c.begin(), c.end());
    off[i + 1] = static_cast<int>(idx.size());
  }
  std::vector<double> val(idx.size(), 0.0);
  return CsrMatrix(n, n, std::move(off), std::move(idx), std::move(val));
}

/// Assembles sum_e local(e, geometry, a, b) into the dof pattern.
template <class Local>
CsrMatrix assemble(const SimplicialMesh& m, Local&& local) {
  if (m.elements.empty())
    throw InvalidMesh("mesh has no elements");
  CsrMatrix A = sparsity_pattern(m);
  auto& val = A.values();
  for (const auto& e : m.elements) {
    const auto g = element_geometry(m, e);
    for (int a = 0; a <= m.dim; ++a) {
      const int row = m.dof(e[a]);
      for (int b = 0; b <= m.dim; ++b)
        val[A.find(row, m.dof(e[b]))] += local(e, g, a, b);
    }
  }
  return A;
}

} // namespace detail

/// Consistent mass matrix, sum_e int phi_i phi_j.
inline CsrMatrix assemble_mass(const SimplicialMesh& m) {
  return detail::assemble(m, [&](const Simplex&, const detail::ElementGeometry& g, int a, int b) {
    return detail::local_mass(m.dim, g.measure, a, b);
  });
}

/// Diffusion stiffness, kappa sum_e int grad phi_i . grad phi_j.
inline CsrMatrix assemble_diffusion(const SimplicialMesh& m, double kappa) {
  if (!std::isfinite(kappa) || kappa < 0.0)
    throw DomainError("kappa must be finite and non-negative");
  return detail::assemble(m, [&](const Simplex&, const detail::ElementGeometry& g, int a, int b) {
    return kappa * g.measure * detail::dot(g.grad[a], g.grad[b], m.dim);
  });
}

/// Convection with a constant velocity, sum_e int phi_i (v . grad phi_j).
inline CsrMatrix assemble_convection(const SimplicialMesh& m, const Point& velocity) {
  return detail::assemble(m, [&](const Simplex&, const detail::ElementGeometry& g, int, int b) {
    return g.measure / (m.dim + 1) * detail::dot(velocity, g.grad[b], m.dim);
  });
}

/// Convection with a velocity interpolated from node values (exact for
/// linear fields), sum_e int phi_i (v_h . grad phi_j).
inline CsrMatrix assemble_convection(const SimplicialMesh& m,
                                     const std::vector<Point>& nodal_velocity) {
  if (nodal_velocity.size() != m.nodes.size())
    throw DomainError("one velocity per mesh node is required");
  return detail::assemble(m, [&](const Simplex& e, const detail::ElementGeometry& g, int a,
                                 int b) {
    double s = 0.0;
    for (int l = 0; l <= m.dim; ++l)
      s += detail::local_mass(m.dim, g.measure, a, l) *
           detail::dot(nodal_velocity[e[l]], g.grad[b], m.dim);
    return s;
  });
}

namespace detail {

/// Circulant tridiagonal matrix with rows (lower, diag, upper).
inline CsrMatrix periodic_tridiagonal(int n, double lower, double diag, double upper) {
  std::vector<int> off(n + 1, 0);
  std::vector<int> idx;
  std::vector<double> val;
  for (int k = 0; k < n; ++k) {
    std::array<std::pair<int, double>, 3> row{
        {{(k + n - 1) % n, lower}, {k, diag}, {(k + 1) % n, upper}}};
    std::sort(row.begin(), row.end());
    for (const auto& [j, v] : row) {
      if (!idx.empty() && static_cast<int>(idx.size()) > off[k] && idx.back() == j)
        val.back() += v;
      else {
        idx.push_back(j);
        val.push_back(v);
      }
    }
    off[k + 1] = static_cast<int>(idx.size());
  }
  return CsrMatrix(n, n, std::move(off), std::move(idx), std::move(val));
}

} // namespace detail

/// Uniform periodic 1D mass, rows (h/6, 2h/3, h/6) built from h itself so
/// that node rounding does not perturb the stencil.
inline CsrMatrix assemble_mass(const Mesh1DPeriodic& pm) {
  return detail::periodic_tridiagonal(pm.unknowns(), pm.h / 6.0, 2.0 * pm.h / 3.0, pm.h / 6.0);
}

/// Uniform periodic 1D diffusion, rows (kappa / h) (-1, 2, -1).
inline CsrMatrix assemble_diffusion(const Mesh1DPeriodic& pm, double kappa) {
  if (!std::isfinite(kappa) || kappa < 0.0)
    throw DomainError("kappa must be finite and non-negative");
  const double c = kappa / pm.h;
  return detail::periodic_tridiagonal(pm.unknowns(), -c, 2.0 * c, -c);
}

/// Uniform periodic 1D convection, rows (lambda / 2) (-1, 0, 1).
inline CsrMatrix assemble_convection(const Mesh1DPeriodic& pm, double lambda) {
  return detail::periodic_tridiagonal(pm.unknowns(), -lambda / 2.0, 0.0, lambda / 2.0);
}

/// Row sums of M; throws NonPositiveLumping on a row sum <= 0.
inline LumpedMass lump(const CsrMatrix& M) {
  LumpedMass out;
  out.diag.resize(M.rows());
  for (int i = 0; i < M.rows(); ++i) {
    const double s = M.row_sum(i);
    if (!(s > 0.0))
      throw NonPositiveLumping("row " + std::to_string(i) + " of the mass matrix sums to " +
                               std::to_string(s));
    out.diag[i] = s;
  }
  return out;
}

/// Row sums of the block of M left after dropping rows and columns with
/// mask[i] != 0; masked rows keep their full sums.
inline LumpedMass lump(const CsrMatrix& M, const std::vector<char>& mask) {
  if (mask.size() != static_cast<std::size_t>(M.rows()))
    throw DomainError("mask length must equal the number of rows");
  LumpedMass out = lump(M);
  for (int i = 0; i < M.rows(); ++i) {
    if (mask[i])
      continue;
    double s = 0.0;
    for (int k = M.offsets()[i]; k < M.offsets()[i + 1]; ++k)
      if (!mask[M.indices()[k]])
        s += M.values()[k];
    if (!(s > 0.0))
      throw NonPositiveLumping("interior row " + std::to_string(i) + " sums to " +
                               std::to_string(s));
    out.diag[i] = s;
  }
  return out;
}

/// w <- A w = w - Mbar^{-1} (M w).
template <class T>
void apply_correction_operator(const CsrMatrix& M, const LumpedMass& Mbar, std::vector<T>& w,
                               std::vector<T>& scratch) {
  scratch.resize(w.size());
  M.multiply<T>(w, scratch);
  for (std::size_t i = 0; i < w.size(); ++i)
    w[i] -= scratch[i] / Mbar.diag[i];
}

/// (I + A + ... + A^n) Mbar^{-1} v, with n applications of A.
template <class T>
std::vector<T> correction_apply(const CsrMatrix& M, const LumpedMass& Mbar,
                                const std::vector<T>& v, int n) {
  if (n < 0)
    throw DomainError("number of corrections must be non-negative");
  if (v.size() != Mbar.size() || static_cast<std::size_t>(M.rows()) != v.size())
    throw DomainError("correction operand dimension mismatch");
  std::vector<T> w(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    w[i] = v[i] / Mbar.diag[i];
  std::vector<T> acc = w;
  std::vector<T> scratch;
  for (int k = 1; k <= n; ++k) {
    apply_correction_operator(M, Mbar, w, scratch);
    for (std::size_t i = 0; i < w.size(); ++i)
      acc[i] += w[i];
  }
  return acc;
}

} // namespace lumpcorr
