#include <algorithm>
#include <cmath>
#include <string>

#include <gtest/gtest.h>

#include "lumpcorr/mesh.hpp"

using namespace lumpcorr;

namespace {

double min_measure(const SimplicialMesh& m) {
  double out = INFINITY;
  for (const auto& e : m.elements)
    out = std::min(out, signed_measure(m, e));
  return out;
}

bool on_box_boundary(const Point& p, int dim) {
  for (int c = 0; c < dim; ++c)
    if (p[c] == 0.0 || p[c] == 1.0)
      return true;
  return false;
}

} // namespace

TEST(PeriodicMesh, Spacing) {
  const auto pm = uniform_1d_periodic(0.0, 10.0, 501);
  EXPECT_EQ(pm.unknowns(), 500);
  EXPECT_DOUBLE_EQ(pm.h, 0.02);
  EXPECT_EQ(pm.wrap(-1), 499);
  EXPECT_EQ(pm.wrap(500), 0);
  EXPECT_THROW(uniform_1d_periodic(0.0, 1.0, 2), InvalidMesh);
  EXPECT_THROW(uniform_1d_periodic(1.0, 1.0, 5), InvalidMesh);

  const auto m = periodic_segment_mesh(uniform_1d_periodic(0.0, 1.0, 5));
  EXPECT_EQ(m.num_nodes(), 5);
  EXPECT_EQ(m.num_dofs(), 4);
  EXPECT_EQ(m.dof(4), 0);
  EXPECT_NEAR(total_measure(m), 1.0, 1e-15);
  EXPECT_THROW(write_mesh(m), InvalidMesh);
}

TEST(StructuredMesh, CountsAndMeasure) {
  struct Case {
    int dim;
    std::vector<int> counts;
    int elements;
    int boundary;
  };
  const Case cases[] = {{1, {6}, 5, 2},
                        {2, {4, 5}, 2 * 3 * 4, 4 * 5 - 2 * 3},
                        {3, {3, 4, 5}, 6 * 2 * 3 * 4, 3 * 4 * 5 - 1 * 2 * 3}};
  for (const auto& c : cases) {
    const auto m = structured_simplicial(c.dim, c.counts);
    EXPECT_EQ(m.num_elements(), c.elements);
    EXPECT_EQ(static_cast<int>(m.boundary_nodes.size()), c.boundary);
    EXPECT_NEAR(total_measure(m), 1.0, 1e-14);
    EXPECT_GT(min_measure(m), 0.0);
    for (int b : m.boundary_nodes)
      EXPECT_TRUE(on_box_boundary(m.nodes[b], c.dim));
    EXPECT_TRUE(std::is_sorted(m.boundary_nodes.begin(), m.boundary_nodes.end()));
  }
  const auto box = structured_simplicial(2, {3, 3}, Box{{-1.0, 0.0, 0.0}, {1.0, 3.0, 0.0}});
  EXPECT_NEAR(total_measure(box), 6.0, 1e-14);
}

TEST(StructuredMesh, DiagonalDirections) {
  // 2D cells are cut along the (1,0)-(0,1) diagonal.
  const auto m2 = structured_simplicial(2, {2, 2});
  ASSERT_EQ(m2.num_elements(), 2);
  for (const auto& e : m2.elements) {
    const bool has10 = std::count(e.begin(), e.begin() + 3, 1) == 1;
    const bool has01 = std::count(e.begin(), e.begin() + 3, 2) == 1;
    EXPECT_TRUE(has10 && has01);
  }
  // 3D cells share the (0,0,1)-(1,1,0) diagonal: nodes 4 and 3.
  const auto m3 = structured_simplicial(3, {2, 2, 2});
  ASSERT_EQ(m3.num_elements(), 6);
  for (const auto& e : m3.elements) {
    EXPECT_EQ(std::count(e.begin(), e.end(), 4), 1);
    EXPECT_EQ(std::count(e.begin(), e.end(), 3), 1);
  }
}

TEST(StructuredMesh, RejectsBadInput) {
  EXPECT_THROW(structured_simplicial(4, {2, 2, 2, 2}), InvalidMesh);
  EXPECT_THROW(structured_simplicial(2, {9, 9, 1}), InvalidMesh);
  EXPECT_THROW(structured_simplicial(2, {1, 4}), InvalidMesh);
  EXPECT_THROW(structured_simplicial(1, {4}, Box{{1.0, 0.0, 0.0}, {1.0, 1.0, 1.0}}), InvalidMesh);
}

TEST(Perturbation, DeterministicAndValid) {
  const auto base = structured_simplicial(3, {6, 7, 8});
  const auto a = perturb_interior(base, 0.3, 1);
  const auto b = perturb_interior(base, 0.3, 1);
  const auto c = perturb_interior(base, 0.3, 2);
  EXPECT_EQ(a.nodes, b.nodes);
  EXPECT_NE(a.nodes, c.nodes);
  EXPECT_EQ(a.elements, base.elements);
  EXPECT_EQ(a.boundary_nodes, base.boundary_nodes);
  EXPECT_NEAR(total_measure(a), 1.0, 1e-13);
  for (int bnode : base.boundary_nodes)
    EXPECT_EQ(a.nodes[bnode], base.nodes[bnode]);
  for (std::size_t i = 0; i < base.elements.size(); ++i)
    EXPECT_GT(signed_measure(a, a.elements[i]),
              min_measure_fraction * signed_measure(base, base.elements[i]) * (1.0 - 1e-12));

  bool moved = false;
  for (int i = 0; i < base.num_nodes(); ++i)
    moved = moved || a.nodes[i] != base.nodes[i];
  EXPECT_TRUE(moved);
  EXPECT_EQ(perturb_interior(base, 0.0, 1).nodes, base.nodes);
  EXPECT_THROW(perturb_interior(base, -0.1, 1), DomainError);
}

TEST(MeshText, RoundTrip) {
  for (int dim : {1, 2, 3}) {
    auto m = structured_simplicial(dim, std::vector<int>(dim, 3));
    if (dim > 1)
      m = perturb_interior(m, 0.3, 5);
    const auto back = read_mesh(write_mesh(m));
    EXPECT_EQ(back.dim, m.dim);
    EXPECT_EQ(back.nodes, m.nodes);
    EXPECT_EQ(back.elements, m.elements);
    EXPECT_EQ(back.boundary_nodes, m.boundary_nodes);
  }
}

TEST(MeshText, OrientsElements) {
  const auto m = read_mesh("dim 2\nnodes 3\n0 0\n1 0\n0 1\nelements 1\n0 2 1\nboundary 3\n0\n1\n2\n");
  EXPECT_GT(signed_measure(m, m.elements[0]), 0.0);
}

TEST(MeshText, ParseErrorsCarryLines) {
  struct Case {
    std::string text;
    std::size_t line;
  };
  const Case cases[] = {
      {"dim 4\n", 1},
      {"dim 2\nnodes 2\n0 0\n1\n", 4},
      {"dim 1\nnodes 2\n0\nx\n", 4},
      {"dim 1\nnodes 2\n0\n1\nelements 1\n0 2\n", 6},
      {"dim 1\nnodes 2\n0\n1\nelements 1\n0 1\nboundary 1\n7\n", 8},
      {"dim 1\nnodes 2\n0\n1\nelements 1\n0 1\nboundary 0\nextra\n", 8},
      {"dim 1\nnodes 2\n0\n1\nelements 1\n", 6},
      {"dim 1\nnodez 2\n", 2},
  };
  for (const auto& c : cases) {
    try {
      read_mesh(c.text);
      ADD_FAILURE() << "no error for: " << c.text;
    } catch (const ParseError& e) {
      EXPECT_EQ(e.line(), c.line) << c.text << " -> " << e.what();
    }
  }
}
