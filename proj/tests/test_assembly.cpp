#include <gtest/gtest.h>

#include "lrk/assembly.hpp"
#include "lrk/error.hpp"
#include "lrk/problems.hpp"
#include "lrk/weighted_linalg.hpp"
#include "oracles.hpp"

using namespace lrk;

TEST(WeightedMass, SingleCellUnitWeight) {
  Mesh m = build_mesh(1, 1, 0, 1.0);
  BlockDiagSPD A = assemble_weighted_mass(m);
  ASSERT_EQ(A.num_blocks(), 1);
  EXPECT_NEAR(A.block(0)(0, 0), 1.0 / 3.0, 1e-15);
}

TEST(WeightedMass, SingleCellChiWeight) {
  Mesh m = build_mesh(1, 1, 0, 1.0);
  BlockDiagSPD A = assemble_weighted_mass(m, relax::chi);
  EXPECT_NEAR(A.block(0)(0, 0), 43.0 / 30.0, 1e-14);
}

TEST(WeightedMass, MatchesQuadratureOracle) {
  Mesh m = build_mesh(2, 3, 2, 1.0);
  BlockDiagSPD A = assemble_weighted_mass(m, relax::chi);
  for (int c = 0; c < m.n_eps(); ++c) {
    double a = m.eps_edges()[c], b = m.eps_edges()[c + 1];
    for (int i = 0; i <= 2; ++i)
      for (int j = 0; j <= 2; ++j) {
        double ref = oracle::integrate(
            [&](double e) { return relax::chi(e) * e * e * m.eps_basis(c, e)[i] * m.eps_basis(c, e)[j]; }, a, b, 4);
        EXPECT_NEAR(A.block(c)(i, j), ref, 1e-14);
      }
  }
}

TEST(WeightedMass, AllBlocksSPD) {
  for (int k : {0, 1, 2, 3}) {
    Mesh m = build_mesh(2, 40, k, 1.0);
    EXPECT_NO_THROW(assemble_weighted_mass(m));
  }
}

TEST(WeightedMass, NonPositiveWeightRejected) {
  Mesh m = build_mesh(1, 2, 1, 1.0);
  try {
    assemble_weighted_mass(m, [](double e) { return e - 0.5; });
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotPositive);
  }
}

TEST(Moments, L0SingleCell) {
  Mesh m = build_mesh(1, 1, 0, 1.0);
  MomentVectors mv = assemble_moments(m, relax::eta);
  ASSERT_EQ(mv.L0.size(), 1);
  EXPECT_NEAR(mv.L0[0], std::sqrt(2.0), 1e-14);
}

TEST(Moments, L0HigherModesVanish) {
  Mesh m = build_mesh(7, 2, 2, 1.0);
  MomentVectors mv = assemble_moments(m, relax::eta);
  for (int c = 0; c < 7; ++c) {
    EXPECT_LT(std::abs(mv.L0[3 * c + 1]), 1e-13);
    EXPECT_LT(std::abs(mv.L0[3 * c + 2]), 1e-13);
  }
  EXPECT_NEAR(mv.L0.norm(), std::sqrt(2.0), 1e-12);
}

TEST(Moments, LEtaSingleCellOracle) {
  Mesh m = build_mesh(1, 1, 0, 1.0, 24);
  MomentVectors mv = assemble_moments(m, relax::eta);
  double ref = oracle::integrate([](double e) { return (4 + e * e / 2) / (e * e + 1) * e * e; }, 0, 1);
  EXPECT_NEAR(mv.L_eta[0], ref, 1e-12);
}

TEST(EvalG, VanishesAtEquilibrium) {
  auto sys = relax::system(6, 8, 2);
  Matrix G = eval_G(sys.eq.F_eq, sys.mom, sys.A_EA);
  double scale = (sys.mom.L0 * sys.mom.L_eta.transpose()).norm();
  EXPECT_LT(G.norm(), 1e-11 * scale);
}

TEST(EvalG, ZeroInput) {
  auto sys = relax::system(3, 4, 1);
  Matrix G = eval_G(Matrix::Zero(sys.mesh.m(), sys.mesh.n()), sys.mom, sys.A_EA);
  EXPECT_EQ((G - sys.mom.L0 * sys.mom.L_eta.transpose()).norm(), 0.0);
}

TEST(EvalG, DenseOracleTwoCells) {
  Mesh m = build_mesh(2, 2, 0, 1.0, 24);
  MomentVectors mv = assemble_moments(m, relax::eta);
  BlockDiagSPD AEA = assemble_weighted_mass(m, relax::chi);
  // independent construction of L0, L_eta, A_EA for piecewise constants
  Vector L0(2), Le(2);
  Matrix A = Matrix::Zero(2, 2);
  for (int c = 0; c < 2; ++c) {
    L0[c] = 1.0;  // int over a width-1 mu cell of 1/sqrt(1)
    double a = 0.5 * c, b = a + 0.5, y = 1 / std::sqrt(0.5);
    Le[c] = oracle::integrate([&](double e) { return relax::eta(e) * y * e * e; }, a, b);
    A(c, c) = oracle::integrate([&](double e) { return relax::chi(e) * y * y * e * e; }, a, b);
  }
  std::mt19937_64 g(7);
  Matrix F = oracle::random_matrix(g, 2, 2);
  Matrix ref = L0 * Le.transpose() - F * A;
  Matrix G = eval_G(F, mv, AEA);
  EXPECT_LT((G - ref).cwiseAbs().maxCoeff(), 1e-13);
  Matrix E = oracle::random_matrix(g, 2, 1), U = oracle::random_matrix(g, 2, 1);
  EXPECT_LT((eval_G_times(F, E, mv, AEA) - ref * E).norm(), 1e-13);
  EXPECT_LT((eval_GT_times(F, U, mv, AEA) - ref.transpose() * U).norm(), 1e-13);
}

TEST(Equilibrium, PolynomialTargetReproduced) {
  Mesh m = build_mesh(3, 4, 2, 1.0);
  auto g = [](double e) { return 1 + e - e * e; };
  auto sys = RelaxationSystem::build(m, [](double) { return 3.0; }, [&](double e) { return 3.0 * g(e); });
  for (double mu : {-0.8, 0.1, 0.9})
    for (double e : {0.05, 0.33, 0.6, 0.97}) EXPECT_NEAR(eval_dg(m, sys.eq.F_eq, mu, e), g(e), 1e-11);
}

TEST(Equilibrium, ReferencePointValue) {
  const auto& sys = oracle::reference_160_q2();
  EXPECT_NEAR(eval_dg(sys.mesh, sys.eq.F_eq, 0.0, 0.5), 0.8, 1e-6);
}

TEST(Equilibrium, FactorsConsistent) {
  const auto& sys = oracle::reference_160_q2();
  const auto& eq = sys.eq;
  EXPECT_FALSE(eq.degenerate);
  EXPECT_NEAR(eq.U_eq.norm(), 1.0, 1e-14);
  EXPECT_NEAR(sys.A1.inner(eq.E_eq, eq.E_eq), 1.0, 1e-12);
  Matrix R = eq.U_eq * eq.S_eq * eq.E_eq.transpose();
  EXPECT_LT((R - eq.F_eq).norm(), 1e-12 * eq.F_eq.norm());
  // S_eq <= chi_min^{-1/2} ||eps eta||
  double bound = sys.norm_eps_eta / std::sqrt(sys.bounds.min);
  EXPECT_LE(eq.S_eq, bound);
  double ne = std::sqrt(2.0 * oracle::integrate([](double e) { return std::pow(e * relax::eta(e), 2); }, 0, 1));
  EXPECT_NEAR(sys.norm_eps_eta, ne, 1e-12);
}

TEST(Equilibrium, ZeroEmissionDegenerate) {
  Mesh m = build_mesh(2, 2, 1, 1.0);
  auto sys = RelaxationSystem::build(m, relax::chi, [](double) { return 0.0; });
  EXPECT_TRUE(sys.eq.degenerate);
  EXPECT_EQ(sys.eq.S_eq, 0.0);
}

TEST(ChiBounds, Reference) {
  const auto& sys = oracle::reference_160_q2();
  EXPECT_NEAR(sys.bounds.min, 4.0, 1e-6);
  EXPECT_GE(sys.bounds.min, 4.0);
  EXPECT_NEAR(sys.bounds.max, 4.5, 1e-3);
  EXPECT_LE(sys.bounds.max, 4.5);
}

TEST(AssemblyInvariants, RayleighQuotientInChiRange) {
  auto sys = relax::system(3, 20, 2);
  std::mt19937_64 g(61);
  for (int t = 0; t < 200; ++t) {
    Matrix W = oracle::random_matrix(g, 3, sys.mesh.n());
    double q = wnorm(W, sys.A_EA) / wnorm(W, sys.A1);
    EXPECT_GE(q * q, sys.bounds.min * (1 - 1e-12));
    EXPECT_LE(q * q, sys.bounds.max * (1 + 1e-12));
  }
}

TEST(AssemblyInvariants, RefinementConsistent) {
  auto total = [](int n) {
    Mesh m = build_mesh(1, n, 2, 1.0);
    BlockDiagSPD A = assemble_weighted_mass(m, relax::chi);
    double s = 0;
    // constant 1 = sqrt(h) on the degree-0 mode of each cell
    for (int c = 0; c < n; ++c) s += m.eps_width(c) * A.block(c)(0, 0);
    return s;
  };
  double ref = 4.0 / 3.0 + 0.1;
  EXPECT_NEAR(total(5), ref, 1e-12);
  EXPECT_NEAR(total(10), total(5), 1e-12);
}

TEST(AssemblyInvariants, EquilibriumNormIdentity) {
  const auto& sys = oracle::reference_160_q2();
  EXPECT_NEAR(sys.eq.S_eq, wnorm(sys.eq.F_eq, sys.A1), 1e-11 * sys.eq.S_eq);
  Matrix G = eval_G(sys.eq.F_eq, sys.mom, sys.A_EA);
  EXPECT_LE(G.norm(), 1e-11 * (sys.mom.L0 * sys.mom.L_eta.transpose()).norm());
}
