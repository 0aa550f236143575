#pragma once

// Simplicial meshes: uniform periodic 1D meshes, structured tensor-product
// meshes split into segments, triangles or Kuhn tetrahedra, seeded interior
// perturbation, and a line-oriented text format.
//
// Text format (no comments, no blank lines):
//   dim <d>
//   nodes <N>            then N lines of d coordinates
//   elements <E>         then E lines of d+1 zero-based node indices
//   boundary <B>         then B node indices, one per line

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include "lumpcorr/error.hpp"

namespace lumpcorr {

using Point = std::array<double, 3>;
using Simplex = std::array<int, 4>;

/// Uniform mesh of [a, b) with n_nodes - 1 distinct unknowns; node
/// n_nodes - 1 (x = b) is identified with node 0.
struct Mesh1DPeriodic {
  double a = 0.0;
  double b = 1.0;
  int n_nodes = 3;
  double h = 0.5;

  int unknowns() const noexcept { return n_nodes - 1; }
  double x(int k) const noexcept { return a + k * h; }
  int wrap(int k) const noexcept {
    const int n = unknowns();
    return ((k % n) + n) % n;
  }
};

inline Mesh1DPeriodic uniform_1d_periodic(double a, double b, int n_nodes) {
  if (n_nodes < 3)
    throw InvalidMesh("a periodic mesh needs at least 3 nodes");
  if (!std::isfinite(a) || !std::isfinite(b) || !(b > a))
    throw InvalidMesh("periodic mesh bounds must satisfy a < b");
  return {a, b, n_nodes, (b - a) / (n_nodes - 1)};
}

/// Nodes, P1 simplices and boundary flags. When dof_map is non-empty, node
/// i carries unknown dof_map[i] (used to identify periodic end nodes).
struct SimplicialMesh {
  int dim = 1;
  std::vector<Point> nodes;
  std::vector<Simplex> elements;
  std::vector<int> boundary_nodes; ///< sorted, unique
  std::vector<int> dof_map;

  int num_nodes() const noexcept { return static_cast<int>(nodes.size()); }
  int num_elements() const noexcept { return static_cast<int>(elements.size()); }
  int num_dofs() const noexcept {
    if (dof_map.empty())
      return num_nodes();
    return *std::max_element(dof_map.begin(), dof_map.end()) + 1;
  }
  int dof(int node) const noexcept { return dof_map.empty() ? node : dof_map[node]; }
  bool periodic() const noexcept { return !dof_map.empty(); }

  friend bool operator==(const SimplicialMesh&, const SimplicialMesh&) = default;
};

/// Signed measure (length, area or volume) of element e.
inline double signed_measure(const SimplicialMesh& m, const Simplex& e) {
  const auto& x0 = m.nodes[e[0]];
  auto d = [&](int v, int c) { return m.nodes[e[v]][c] - x0[c]; };
  switch (m.dim) {
  case 1:
    return d(1, 0);
  case 2:
    return 0.5 * (d(1, 0) * d(2, 1) - d(2, 0) * d(1, 1));
  case 3:
    return (d(1, 0) * (d(2, 1) * d(3, 2) - d(3, 1) * d(2, 2)) -
            d(1, 1) * (d(2, 0) * d(3, 2) - d(3, 0) * d(2, 2)) +
            d(1, 2) * (d(2, 0) * d(3, 1) - d(3, 0) * d(2, 1))) /
           6.0;
  default:
    throw InvalidMesh("mesh dimension must be 1, 2 or 3");
  }
}

inline double total_measure(const SimplicialMesh& m) {
  double sum = 0.0;
  for (const auto& e : m.elements)
    sum += signed_measure(m, e);
  return sum;
}

namespace detail {

/// Swaps two vertices of every negatively oriented element; throws on
/// zero-measure elements.
inline void orient_elements(SimplicialMesh& m) {
  for (auto& e : m.elements) {
    const double v = signed_measure(m, e);
    if (!(std::abs(v) > 0.0) || !std::isfinite(v))
      throw DegenerateElement("element with zero measure");
    if (v < 0.0)
      std::swap(e[0], e[1]);
  }
}

} // namespace detail

/// The periodic 1D mesh as segments; node n_nodes - 1 shares dof 0.
inline SimplicialMesh periodic_segment_mesh(const Mesh1DPeriodic& pm) {
  SimplicialMesh m;
  m.dim = 1;
  const int n = pm.unknowns();
  m.nodes.reserve(n + 1);
  for (int k = 0; k <= n; ++k)
    m.nodes.push_back({k == n ? pm.b : pm.x(k), 0.0, 0.0});
  for (int k = 0; k < n; ++k)
    m.elements.push_back({k, k + 1, 0, 0});
  m.dof_map.resize(n + 1);
  for (int k = 0; k <= n; ++k)
    m.dof_map[k] = k % n;
  return m;
}

struct Box {
  Point lo{0.0, 0.0, 0.0};
  Point hi{1.0, 1.0, 1.0};
};

/// Tensor grid with counts[c] nodes along axis c, split into segments (1D),
/// two triangles per cell cut along the (1,0)-(0,1) diagonal (2D) or six
/// Kuhn tetrahedra per cell around the (0,0,1)-(1,1,0) diagonal (3D).
inline SimplicialMesh structured_simplicial(int dim, const std::vector<int>& counts,
                                            const Box& bounds = {}) {
  if (dim < 1 || dim > 3)
    throw InvalidMesh("mesh dimension must be 1, 2 or 3");
  if (static_cast<int>(counts.size()) != dim)
    throw InvalidMesh("need one node count per dimension");
  std::array<int, 3> n{1, 1, 1};
  for (int c = 0; c < dim; ++c) {
    if (counts[c] < 2)
      throw InvalidMesh("each node count must be at least 2");
    if (!std::isfinite(bounds.lo[c]) || !std::isfinite(bounds.hi[c]) ||
        !(bounds.hi[c] > bounds.lo[c]))
      throw InvalidMesh("degenerate bounding box");
    n[c] = counts[c];
  }
  auto id = [&](int i, int j, int k) { return i + n[0] * (j + n[1] * k); };

  SimplicialMesh m;
  m.dim = dim;
  m.nodes.reserve(static_cast<std::size_t>(n[0]) * n[1] * n[2]);
  for (int k = 0; k < n[2]; ++k)
    for (int j = 0; j < n[1]; ++j)
      for (int i = 0; i < n[0]; ++i) {
        Point p{0.0, 0.0, 0.0};
        const std::array<int, 3> ijk{i, j, k};
        for (int c = 0; c < dim; ++c)
          p[c] = ijk[c] == n[c] - 1
                     ? bounds.hi[c]
                     : bounds.lo[c] + (bounds.hi[c] - bounds.lo[c]) * ijk[c] / (n[c] - 1);
        m.nodes.push_back(p);
        bool on_boundary = false;
        for (int c = 0; c < dim; ++c)
          on_boundary = on_boundary || ijk[c] == 0 || ijk[c] == n[c] - 1;
        if (on_boundary)
          m.boundary_nodes.push_back(id(i, j, k));
      }

  if (dim == 1) {
    for (int i = 0; i + 1 < n[0]; ++i)
      m.elements.push_back({i, i + 1, 0, 0});
  } else if (dim == 2) {
    for (int j = 0; j + 1 < n[1]; ++j)
      for (int i = 0; i + 1 < n[0]; ++i) {
        const int v00 = id(i, j, 0), v10 = id(i + 1, j, 0);
        const int v01 = id(i, j + 1, 0), v11 = id(i + 1, j + 1, 0);
        m.elements.push_back({v00, v10, v01, 0});
        m.elements.push_back({v10, v11, v01, 0});
      }
  } else {
    static constexpr std::array<std::array<int, 3>, 6> perms{
        {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
    for (int k = 0; k + 1 < n[2]; ++k)
      for (int j = 0; j + 1 < n[1]; ++j)
        for (int i = 0; i + 1 < n[0]; ++i)
          for (const auto& perm : perms) {
            // Paths from (i, j, k+1) to (i+1, j+1, k) share that cell diagonal.
            std::array<int, 3> c{i, j, k + 1};
            Simplex s{};
            s[0] = id(c[0], c[1], c[2]);
            for (int step = 0; step < 3; ++step) {
              c[perm[step]] += perm[step] == 2 ? -1 : 1;
              s[step + 1] = id(c[0], c[1], c[2]);
            }
            m.elements.push_back(s);
          }
  }
  detail::orient_elements(m);
  return m;
}

/// Smallest measure a perturbed element may keep, relative to its original.
inline constexpr double min_measure_fraction = 0.1;

/// Moves interior nodes by seeded uniform offsets of at most amplitude times
/// the shortest incident edge per coordinate. Offsets of nodes in elements
/// flattened below min_measure_fraction of their original measure are
/// halved, up to 10 times.
inline SimplicialMesh perturb_interior(const SimplicialMesh& mesh, double amplitude,
                                       std::uint64_t seed) {
  if (!(amplitude >= 0.0) || !(amplitude < 0.5))
    throw DomainError("perturbation amplitude must lie in [0, 0.5)");
  SimplicialMesh out = mesh;
  if (amplitude == 0.0)
    return out;
  const int nn = mesh.num_nodes();
  std::vector<double> local(nn, std::numeric_limits<double>::infinity());
  for (const auto& e : mesh.elements)
    for (int a = 0; a <= mesh.dim; ++a)
      for (int b = a + 1; b <= mesh.dim; ++b) {
        double len2 = 0.0;
        for (int c = 0; c < mesh.dim; ++c) {
          const double d = mesh.nodes[e[a]][c] - mesh.nodes[e[b]][c];
          len2 += d * d;
        }
        const double len = std::sqrt(len2);
        local[e[a]] = std::min(local[e[a]], len);
        local[e[b]] = std::min(local[e[b]], len);
      }

  std::vector<char> fixed(nn, 0);
  for (int b : mesh.boundary_nodes)
    fixed[b] = 1;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<Point> offset(nn, Point{0.0, 0.0, 0.0});
  for (int i = 0; i < nn; ++i) {
    if (fixed[i])
      continue;
    for (int c = 0; c < mesh.dim; ++c)
      offset[i][c] = amplitude * local[i] * unit(rng);
  }

  std::vector<double> original(mesh.elements.size());
  for (std::size_t k = 0; k < original.size(); ++k)
    original[k] = signed_measure(mesh, mesh.elements[k]);

  auto place = [&] {
    for (int i = 0; i < nn; ++i)
      for (int c = 0; c < mesh.dim; ++c)
        out.nodes[i][c] = mesh.nodes[i][c] + offset[i][c];
  };
  place();
  for (int attempt = 0;; ++attempt) {
    std::vector<char> bad(nn, 0);
    bool any = false;
    for (std::size_t k = 0; k < out.elements.size(); ++k)
      if (!(signed_measure(out, out.elements[k]) > min_measure_fraction * original[k])) {
        const auto& e = out.elements[k];
        any = true;
        for (int v = 0; v <= mesh.dim; ++v)
          bad[e[v]] = 1;
      }
    if (!any)
      return out;
    if (attempt == 10)
      throw DegenerateElement("perturbation left flattened elements after 10 retries");
    for (int i = 0; i < nn; ++i)
      if (bad[i])
        for (auto& o : offset[i])
          o *= 0.5;
    place();
  }
}

inline std::string write_mesh(const SimplicialMesh& m) {
  if (m.periodic())
    throw InvalidMesh("periodic meshes have no text representation");
  std::string s;
  char buf[64];
  s += "dim " + std::to_string(m.dim) + "\n";
  s += "nodes " + std::to_string(m.nodes.size()) + "\n";
  for (const auto& p : m.nodes) {
    for (int c = 0; c < m.dim; ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", p[c]);
      if (c)
        s += ' ';
      s += buf;
    }
    s += '\n';
  }
  s += "elements " + std::to_string(m.elements.size()) + "\n";
  for (const auto& e : m.elements) {
    for (int v = 0; v <= m.dim; ++v) {
      if (v)
        s += ' ';
      s += std::to_string(e[v]);
    }
    s += '\n';
  }
  s += "boundary " + std::to_string(m.boundary_nodes.size()) + "\n";
  for (int b : m.boundary_nodes)
    s += std::to_string(b) + "\n";
  return s;
}

namespace detail {

class MeshLineReader {
public:
  explicit MeshLineReader(const std::string& text) : in_(text) {}

  std::size_t line() const noexcept { return line_; }

  std::string next(const char* expecting) {
    std::string s;
    if (!std::getline(in_, s))
      throw ParseError(line_ + 1, std::string("unexpected end of input, expected ") + expecting);
    ++line_;
    if (!s.empty() && s.back() == '\r')
      s.pop_back();
    return s;
  }

  bool at_end() {
    std::string s;
    while (std::getline(in_, s)) {
      ++line_;
      if (!s.empty() && s != "\r")
        return false;
    }
    return true;
  }

  template <class T>
  std::vector<T> fields(const std::string& s, std::size_t count, const char* what) {
    std::istringstream ls(s);
    std::vector<T> out;
    std::string tok;
    while (ls >> tok) {
      std::size_t pos = 0;
      T v{};
      try {
        if constexpr (std::is_same_v<T, double>)
          v = std::stod(tok, &pos);
        else
          v = static_cast<T>(std::stoll(tok, &pos));
      } catch (const std::exception&) {
        pos = 0;
      }
      if (pos != tok.size() || tok.empty())
        throw ParseError(line_, std::string("malformed ") + what + " '" + tok + "'");
      out.push_back(v);
    }
    if (out.size() != count)
      throw ParseError(line_, std::string("expected ") + std::to_string(count) + " " + what +
                                  " values, got " + std::to_string(out.size()));
    return out;
  }

  long long header(const char* keyword) {
    const std::string s = next(keyword);
    std::istringstream ls(s);
    std::string word;
    std::string count;
    std::string extra;
    ls >> word >> count;
    if (word != keyword || count.empty() || (ls >> extra))
      throw ParseError(line_, std::string("expected '") + keyword + " <count>'");
    std::size_t pos = 0;
    long long v = -1;
    try {
      v = std::stoll(count, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != count.size() || v < 0)
      throw ParseError(line_, std::string("bad count after '") + keyword + "'");
    return v;
  }

private:
  std::istringstream in_;
  std::size_t line_ = 0;
};

} // namespace detail

inline SimplicialMesh read_mesh(const std::string& text) {
  detail::MeshLineReader r(text);
  SimplicialMesh m;
  const long long dim = r.header("dim");
  if (dim < 1 || dim > 3)
    throw ParseError(r.line(), "dimension must be 1, 2 or 3");
  m.dim = static_cast<int>(dim);

  const long long nn = r.header("nodes");
  m.nodes.reserve(static_cast<std::size_t>(nn));
  for (long long i = 0; i < nn; ++i) {
    const auto v = r.fields<double>(r.next("node coordinates"), m.dim, "coordinate");
    Point p{0.0, 0.0, 0.0};
    for (int c = 0; c < m.dim; ++c) {
      if (!std::isfinite(v[c]))
        throw ParseError(r.line(), "non-finite coordinate");
      p[c] = v[c];
    }
    m.nodes.push_back(p);
  }

  const long long ne = r.header("elements");
  m.elements.reserve(static_cast<std::size_t>(ne));
  for (long long i = 0; i < ne; ++i) {
    const auto v = r.fields<long long>(r.next("element indices"), m.dim + 1, "node index");
    Simplex s{0, 0, 0, 0};
    for (int k = 0; k <= m.dim; ++k) {
      if (v[k] < 0 || v[k] >= nn)
        throw ParseError(r.line(), "node index " + std::to_string(v[k]) + " out of range");
      s[k] = static_cast<int>(v[k]);
    }
    m.elements.push_back(s);
  }

  const long long nb = r.header("boundary");
  for (long long i = 0; i < nb; ++i) {
    const auto v = r.fields<long long>(r.next("boundary index"), 1, "boundary index");
    if (v[0] < 0 || v[0] >= nn)
      throw ParseError(r.line(), "boundary index " + std::to_string(v[0]) + " out of range");
    m.boundary_nodes.push_back(static_cast<int>(v[0]));
  }
  if (!r.at_end())
    throw ParseError(r.line(), "trailing content after boundary section");
  std::sort(m.boundary_nodes.begin(), m.boundary_nodes.end());
  m.boundary_nodes.erase(std::unique(m.boundary_nodes.begin(), m.boundary_nodes.end()),
                         m.boundary_nodes.end());
  detail::orient_elements(m);
  return m;
}

} // namespace lumpcorr
