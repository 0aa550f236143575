#include <cmath>
#include <random>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "lumpcorr/assembly.hpp"

using namespace lumpcorr;

namespace {

Eigen::MatrixXd dense(const CsrMatrix& A) {
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(A.rows(), A.cols());
  for (int i = 0; i < A.rows(); ++i)
    for (int k = A.offsets()[i]; k < A.offsets()[i + 1]; ++k)
      D(i, A.indices()[k]) += A.values()[k];
  return D;
}

SimplicialMesh periodic(int n_nodes, double b = 1.0) {
  return periodic_segment_mesh(uniform_1d_periodic(0.0, b, n_nodes));
}

// Rows k-1, k, k+1 of a periodic 1D matrix, as a 3-point stencil.
std::array<double, 3> stencil(const CsrMatrix& A, int k) {
  const int n = A.rows();
  return {A.at(k, (k + n - 1) % n), A.at(k, k), A.at(k, (k + 1) % n)};
}

} // namespace

TEST(Assembly, OneDimensionalStencils) {
  // h = 0.02 on [0, 10]; every row equals the finite-difference stencil.
  const auto pm = uniform_1d_periodic(0.0, 10.0, 501);
  const double h = 0.02, kappa = 0.01, lambda = 1.0;
  const auto M = assemble_mass(pm);
  const auto K = assemble_diffusion(pm, kappa);
  const auto C = assemble_convection(pm, lambda);
  const auto L = lump(M);
  for (int k = 0; k < 500; ++k) {
    const auto ms = stencil(M, k), ks = stencil(K, k), cs = stencil(C, k);
    for (int j = 0; j < 3; ++j) {
      EXPECT_DOUBLE_EQ(ms[j], j == 1 ? 2.0 * h / 3.0 : h / 6.0);
      EXPECT_DOUBLE_EQ(ks[j], j == 1 ? 1.0 : -0.5);
      EXPECT_DOUBLE_EQ(cs[j], (j - 1) * lambda / 2.0);
    }
    EXPECT_DOUBLE_EQ(L.diag[k], h);
  }
  EXPECT_EQ(M.nnz(), 3u * 500u);

  // The element-by-element assembly on the same mesh agrees to rounding of
  // the node coordinates.
  const auto m = periodic_segment_mesh(pm);
  const Eigen::MatrixXd Md = dense(assemble_mass(m)) - dense(M);
  const Eigen::MatrixXd Kd = dense(assemble_diffusion(m, kappa)) - dense(K);
  const Eigen::MatrixXd Cd = dense(assemble_convection(m, Point{lambda, 0.0, 0.0})) - dense(C);
  EXPECT_LE(Md.cwiseAbs().maxCoeff(), 1e-12 * h);
  EXPECT_LE(Kd.cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE(Cd.cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Assembly, SmallestPeriodicMesh) {
  // Two unknowns: both neighbours are the same dof, so entries add.
  const auto M = assemble_mass(uniform_1d_periodic(0.0, 1.0, 3));
  EXPECT_DOUBLE_EQ(M.at(0, 1), 0.5 / 3.0);
  EXPECT_DOUBLE_EQ(M.row_sum(1), 0.5);
}

TEST(Assembly, LocalTriangleMass) {
  // Reference triangle: mass = area/12 * [[2,1,1],[1,2,1],[1,1,2]].
  const auto m = read_mesh("dim 2\nnodes 3\n0 0\n1 0\n0 1\nelements 1\n0 1 2\nboundary 0\n");
  const Eigen::MatrixXd M = dense(assemble_mass(m));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      EXPECT_NEAR(M(i, j), (i == j ? 2.0 : 1.0) / 24.0, 1e-16);
  const Eigen::MatrixXd K = dense(assemble_diffusion(m, 2.0));
  EXPECT_NEAR(K(0, 0), 2.0, 1e-15);
  EXPECT_NEAR(K(1, 2), 0.0, 1e-15);
  EXPECT_NEAR(K(0, 1), -1.0, 1e-15);
}

TEST(Assembly, MultiDimensionalInvariants) {
  for (int dim : {2, 3}) {
    const auto m = perturb_interior(structured_simplicial(dim, std::vector<int>(dim, 5)), 0.3, 3);
    const Eigen::MatrixXd M = dense(assemble_mass(m));
    EXPECT_NEAR(M.sum(), 1.0, 1e-13);
    EXPECT_LE((M - M.transpose()).cwiseAbs().maxCoeff(), 1e-17);
    EXPECT_GT(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(M).eigenvalues().minCoeff(), 0.0);

    const Eigen::MatrixXd K = dense(assemble_diffusion(m, 0.7));
    EXPECT_LE((K * Eigen::VectorXd::Ones(K.cols())).cwiseAbs().maxCoeff(), 1e-13);
    EXPECT_LE((K - K.transpose()).cwiseAbs().maxCoeff(), 1e-13);

    // Constant velocity: C 1 = 0 and C + C^T has zero interior rows.
    const Eigen::MatrixXd C = dense(assemble_convection(m, Point{1.0, -2.0, 0.5}));
    EXPECT_LE((C * Eigen::VectorXd::Ones(C.cols())).cwiseAbs().maxCoeff(), 1e-13);
    // Nodal velocity equal to the constant one reproduces the same matrix.
    const std::vector<Point> nodal(m.nodes.size(), Point{1.0, -2.0, 0.5});
    EXPECT_LE((dense(assemble_convection(m, nodal)) - C).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(Assembly, MaskedLumping) {
  const auto m = structured_simplicial(2, {4, 4});
  const auto M = assemble_mass(m);
  std::vector<char> mask(m.num_nodes(), 0);
  for (int b : m.boundary_nodes)
    mask[b] = 1;
  const auto full = lump(M);
  const auto inner = lump(M, mask);
  for (int i = 0; i < m.num_nodes(); ++i) {
    double s = 0.0;
    for (int j = 0; j < m.num_nodes(); ++j)
      if (mask[i] || !mask[j])
        s += M.at(i, j);
    EXPECT_NEAR(inner.diag[i], s, 1e-16);
    EXPECT_LE(inner.diag[i], full.diag[i]);
  }
  EXPECT_THROW(lump(M, std::vector<char>(3, 0)), DomainError);
}

TEST(Correction, SingleApplicationIsScaledSecondDifference) {
  const auto m = periodic(41);
  const auto M = assemble_mass(m);
  const auto L = lump(M);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  std::vector<double> y(40), scratch;
  for (auto& v : y)
    v = g(rng);
  auto w = y;
  apply_correction_operator(M, L, w, scratch);
  for (int k = 0; k < 40; ++k) {
    const double d2 = y[(k + 39) % 40] - 2.0 * y[k] + y[(k + 1) % 40];
    EXPECT_NEAR(w[k], -d2 / 6.0, 1e-14);
  }
}

TEST(Correction, MatchesDensePowerOracle) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> g;
  std::vector<SimplicialMesh> meshes{periodic(8), periodic(21), structured_simplicial(2, {4, 5}),
                                     perturb_interior(structured_simplicial(2, {4, 4}), 0.3, 2),
                                     structured_simplicial(1, {19})};
  for (const auto& m : meshes) {
    const auto M = assemble_mass(m);
    const auto L = lump(M);
    const Eigen::MatrixXd Md = dense(M);
    const Eigen::VectorXd inv = Eigen::Map<const Eigen::VectorXd>(L.diag.data(), L.size()).cwiseInverse();
    const Eigen::MatrixXd A = Eigen::MatrixXd::Identity(Md.rows(), Md.cols()) - inv.asDiagonal() * Md;
    ASSERT_LE(Md.rows(), 20);
    std::vector<double> v(M.rows());
    for (auto& x : v)
      x = g(rng);
    const Eigen::VectorXd vd = Eigen::Map<const Eigen::VectorXd>(v.data(), v.size());
    for (int n = 0; n <= 6; ++n) {
      Eigen::VectorXd ref = Eigen::VectorXd::Zero(vd.size());
      Eigen::MatrixXd P = Eigen::MatrixXd::Identity(A.rows(), A.cols());
      for (int k = 0; k <= n; ++k, P = P * A)
        ref += P * (inv.asDiagonal() * vd);
      const auto got = correction_apply<double>(M, L, v, n);
      for (int i = 0; i < ref.size(); ++i)
        EXPECT_NEAR(got[i], ref[i], 1e-13 * std::max(1.0, ref.cwiseAbs().maxCoeff())) << n;

      // A^n v alone, through repeated matrix-free applications.
      std::vector<double> w = v, scratch;
      for (int k = 0; k < n; ++k)
        apply_correction_operator(M, L, w, scratch);
      Eigen::VectorXd pw = vd;
      for (int k = 0; k < n; ++k)
        pw = A * pw;
      for (int i = 0; i < pw.size(); ++i)
        EXPECT_NEAR(w[i], pw[i], 1e-13 * std::max(1.0, vd.cwiseAbs().maxCoeff()));
    }
  }
  EXPECT_THROW(correction_apply<double>(assemble_mass(periodic(5)), lump(assemble_mass(periodic(5))),
                                        std::vector<double>(4, 1.0), -1),
               DomainError);
}

TEST(Correction, OperatorNormBound) {
  // ||A||_inf <= 2/3 on the uniform 1D mesh: |A v|_inf <= (2/3) |v|_inf.
  const auto m = periodic(33);
  const auto M = assemble_mass(m);
  const auto L = lump(M);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(32), scratch;
  for (int trial = 0; trial < 50; ++trial) {
    double vmax = 0.0;
    for (auto& x : v) {
      x = u(rng);
      vmax = std::max(vmax, std::abs(x));
    }
    auto w = v;
    apply_correction_operator(M, L, w, scratch);
    double wmax = 0.0;
    for (double x : w)
      wmax = std::max(wmax, std::abs(x));
    EXPECT_LE(wmax, 2.0 / 3.0 * vmax * (1.0 + 1e-14));
  }
}

TEST(Assembly, RejectsBadInput) {
  const auto m = periodic(5);
  EXPECT_THROW(assemble_diffusion(m, -1.0), DomainError);
  EXPECT_THROW(assemble_diffusion(uniform_1d_periodic(0.0, 1.0, 5), -1.0), DomainError);
  EXPECT_THROW(assemble_convection(m, std::vector<Point>(2)), DomainError);
  SimplicialMesh flat = structured_simplicial(2, {2, 2});
  flat.nodes[3] = flat.nodes[0];
  EXPECT_THROW(assemble_mass(flat), DegenerateElement);
  SimplicialMesh empty;
  EXPECT_THROW(assemble_mass(empty), InvalidMesh);
}
