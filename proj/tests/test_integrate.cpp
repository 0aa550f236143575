#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "lumpcorr/integrate.hpp"
#include "lumpcorr/symbols.hpp"

using namespace lumpcorr;
using Complex = std::complex<double>;

namespace {

constexpr double pi = std::numbers::pi;

MolSystem periodic_system(int n_nodes, double length, double kappa, double lambda) {
  const auto pm = uniform_1d_periodic(0.0, length, n_nodes);
  return make_system(assemble_mass(pm), assemble_diffusion(pm, kappa),
                     assemble_convection(pm, lambda));
}

Eigen::MatrixXd dense(const CsrMatrix& A) {
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(A.rows(), A.cols());
  for (int i = 0; i < A.rows(); ++i)
    for (int k = A.offsets()[i]; k < A.offsets()[i + 1]; ++k)
      D(i, A.indices()[k]) += A.values()[k];
  return D;
}

template <class T>
double max_abs(const std::vector<T>& v) {
  double m = 0.0;
  for (const auto& x : v)
    m = std::max(m, std::abs(x));
  return m;
}

const Scheme selectors[] = {Scheme::lumped(), Scheme::corrected(1), Scheme::corrected(3),
                            Scheme::consistent()};

} // namespace

TEST(Rhs, HarmonicIsEigenvectorWithSymbolEigenvalue) {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> nn(8, 200), kk(1, 6);
  std::uniform_real_distribution<double> lam(-2.0, 2.0), kap(0.0, 0.2), len(0.5, 10.0);
  for (int trial = 0; trial < 50; ++trial) {
    const int n_nodes = nn(rng);
    const double length = len(rng), kappa = kap(rng), lambda = lam(rng);
    const int n = n_nodes - 1;
    const double h = length / n;
    const double p = 2.0 * pi * std::min(kk(rng), n / 2) / length;
    const auto sys = periodic_system(n_nodes, length, kappa, lambda);
    std::vector<Complex> u(n);
    for (int k = 0; k < n; ++k)
      u[k] = std::polar(1.0, p * k * h);
    for (const auto& s : selectors) {
      const Symbol w = scheme_symbol(s, {lambda, kappa, h, p});
      const auto du = rhs<Complex>(s, sys, 0.0, u);
      double err = 0.0;
      for (int k = 0; k < n; ++k)
        err = std::max(err, std::abs(du[k] - w * u[k]));
      EXPECT_LE(err, 1e-11 * std::max(1.0, std::abs(w))) << s.label() << " N=" << n_nodes;
    }
  }
}

TEST(Rhs, ConstantStateIsSteady) {
  const auto sys = periodic_system(33, 2.0, 0.3, -1.5);
  const std::vector<double> u(32, 4.0);
  for (const auto& s : selectors)
    EXPECT_LE(max_abs(rhs<double>(s, sys, 0.0, u)), 1e-12) << s.label();
}

TEST(Rhs, FirstCorrectionIsLumpedMinusScaledSecondDifference) {
  const auto sys = periodic_system(41, 1.0, 0.05, 0.7);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  std::vector<double> u(40);
  for (auto& x : u)
    x = g(rng);
  const auto w = rhs<double>(Scheme::lumped(), sys, 0.0, u);
  const auto w1 = rhs<double>(Scheme::corrected(1), sys, 0.0, u);
  for (int k = 0; k < 40; ++k) {
    const double d2 = w[(k + 39) % 40] - 2.0 * w[k] + w[(k + 1) % 40];
    EXPECT_NEAR(w1[k], w[k] - d2 / 6.0, 1e-12 * max_abs(w));
  }
}

TEST(Rhs, LumpedMassWeightedSumIsConserved) {
  // 1^T Mbar du = 1^T g = 0 on a periodic mesh for every scheme.
  const auto sys = periodic_system(51, 3.0, 0.1, 1.2);
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g;
  std::vector<double> u(50);
  for (auto& x : u)
    x = g(rng);
  for (const auto& s : selectors) {
    const auto du = rhs<double>(s, sys, 0.0, u);
    double total = 0.0;
    for (int k = 0; k < 50; ++k)
      total += sys.lumped.diag[k] * du[k];
    EXPECT_NEAR(total, 0.0, 1e-12 * max_abs(du)) << s.label();
  }
  const auto end = evolve<double>(Scheme::corrected(2), sys, u, 0.0, 0.5, 0.01);
  double before = 0.0, after = 0.0;
  for (int k = 0; k < 50; ++k) {
    before += sys.lumped.diag[k] * u[k];
    after += sys.lumped.diag[k] * end[k];
  }
  EXPECT_NEAR(after, before, 1e-12);
}

TEST(Rhs, DirichletLinearTransportIsExact) {
  // u = x + 2y - t (lambda_x + 2 lambda_y) solves pure transport, and every
  // scheme reproduces its rate at interior nodes on any mesh.
  const auto m = perturb_interior(structured_simplicial(2, {7, 6}), 0.3, 4);
  const Point vel{0.8, -0.4, 0.0};
  const double rate = -(vel[0] + 2.0 * vel[1]);
  auto sys = make_system(assemble_mass(m), assemble_diffusion(m, 0.25),
                         assemble_convection(m, vel), m.boundary_nodes);
  DirichletData<double> bc;
  bc.value = [&](int i, double t) { return m.nodes[i][0] + 2.0 * m.nodes[i][1] + rate * t; };
  bc.rate = [&](int, double) { return rate; };
  std::vector<double> u(m.num_nodes());
  for (int i = 0; i < m.num_nodes(); ++i)
    u[i] = bc.value(i, 0.3);
  for (const auto& s : selectors) {
    const auto du = rhs<double>(s, sys, 0.3, u, &bc);
    for (double x : du)
      EXPECT_NEAR(x, rate, 1e-11) << s.label();
  }
  const auto end = evolve<double>(Scheme::corrected(1), sys, u, 0.3, 0.5, 0.01, &bc);
  for (int i = 0; i < m.num_nodes(); ++i)
    EXPECT_NEAR(end[i], bc.value(i, 0.5), 1e-12);
}

TEST(MassSolve, MatchesDenseDirectSolve) {
  const auto m = perturb_interior(structured_simplicial(3, {4, 4, 5}), 0.3, 9);
  const auto M = assemble_mass(m);
  const Eigen::MatrixXd D = dense(M);
  std::mt19937_64 rng(12);
  std::normal_distribution<double> g;
  std::vector<double> b(M.rows());
  for (auto& x : b)
    x = g(rng);
  const Eigen::VectorXd ref = D.ldlt().solve(Eigen::Map<const Eigen::VectorXd>(b.data(), b.size()));
  const auto x = solve_mass<double>(M, b);
  for (int i = 0; i < M.rows(); ++i)
    EXPECT_NEAR(x[i], ref[i], 1e-12 * ref.cwiseAbs().maxCoeff());

  // The masked solve is the interior block solve.
  std::vector<char> mask(M.rows(), 0);
  std::vector<int> inner;
  for (int bnode : m.boundary_nodes)
    mask[bnode] = 1;
  for (int i = 0; i < M.rows(); ++i)
    if (!mask[i])
      inner.push_back(i);
  Eigen::MatrixXd Dii(inner.size(), inner.size());
  Eigen::VectorXd bi(inner.size());
  for (std::size_t a = 0; a < inner.size(); ++a) {
    bi[a] = b[inner[a]];
    for (std::size_t c = 0; c < inner.size(); ++c)
      Dii(a, c) = D(inner[a], inner[c]);
  }
  const Eigen::VectorXd refi = Dii.ldlt().solve(bi);
  const auto xm = solve_mass<double>(M, b, 1e-13, &mask);
  for (std::size_t a = 0; a < inner.size(); ++a)
    EXPECT_NEAR(xm[inner[a]], refi[a], 1e-12 * refi.cwiseAbs().maxCoeff());
  for (int bnode : m.boundary_nodes)
    EXPECT_EQ(xm[bnode], 0.0);

  std::vector<Complex> bc(b.begin(), b.end());
  for (auto& z : bc)
    z *= Complex(0.6, -0.8);
  const auto xc = solve_mass<Complex>(M, bc);
  for (int i = 0; i < M.rows(); ++i)
    EXPECT_LE(std::abs(xc[i] - Complex(0.6, -0.8) * ref[i]), 1e-12 * ref.cwiseAbs().maxCoeff());
  EXPECT_THROW(solve_mass<double>(M, std::vector<double>(3)), DomainError);
}

TEST(Rk4, OneStepAndOrder) {
  auto decay = [](double, const std::vector<double>& y) { return std::vector<double>{-y[0]}; };
  EXPECT_NEAR(rk4_step<double>(decay, 0.0, {1.0}, 0.1)[0], 0.90483750, 5e-9);
  double prev = 0.0;
  for (int k = 0; k < 4; ++k) {
    const double tau = 0.05 / (1 << k);
    const double err = std::abs(evolve_ode<double>(decay, {1.0}, 0.0, 1.0, tau)[0] - std::exp(-1.0));
    if (k > 0) {
      EXPECT_NEAR(std::log2(prev / err), 4.0, 0.1) << tau;
    }
    prev = err;
  }
}

TEST(Rk4, EdgeCases) {
  auto decay = [](double, const std::vector<double>& y) { return std::vector<double>{-y[0]}; };
  EXPECT_EQ(evolve_ode<double>(decay, {2.0}, 1.0, 1.0, 0.1)[0], 2.0);
  EXPECT_THROW(evolve_ode<double>(decay, {1.0}, 1.0, 0.5, 0.1), DomainError);
  EXPECT_THROW(rk4_step<double>(decay, 0.0, {1.0}, 0.0), DomainError);
  // A last partial step lands exactly on t_end.
  double last_t = 0.0;
  evolve_ode<double>(decay, {1.0}, 0.0, 0.25, 0.1,
                     [&](double t, const std::vector<double>&) { last_t = t; });
  EXPECT_EQ(last_t, 0.25);
  auto blowup = [](double, const std::vector<double>& y) { return std::vector<double>{1e300 * y[0]}; };
  EXPECT_THROW(evolve_ode<double>(blowup, {1e10}, 0.0, 1.0, 0.5), NonFinite);
}

TEST(StepRule, StableStepKeepsSchemesBounded) {
  const double kappa = 0.01, lambda = 1.0;
  const auto sys = periodic_system(101, 10.0, kappa, lambda);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  std::vector<double> u(100);
  for (auto& x : u)
    x = g(rng);
  for (const auto& s : selectors) {
    const double tau = stable_time_step_1d(s, kappa, lambda, 0.1);
    EXPECT_GT(tau, 0.0);
    EXPECT_LE(tau, stable_time_step(s, sys, 0.0) * 1.5) << s.label();
    const auto end = evolve<double>(s, sys, u, 0.0, 200.0 * tau, tau);
    EXPECT_LE(max_abs(end), 2.0 * max_abs(u)) << s.label();
  }
  EXPECT_GT(stable_time_step_1d(Scheme::lumped(), kappa, lambda, 0.1),
            stable_time_step_1d(Scheme::consistent(), kappa, lambda, 0.1));
}
