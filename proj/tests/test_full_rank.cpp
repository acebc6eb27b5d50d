#include <gtest/gtest.h>

#include "lrk/error.hpp"
#include "lrk/full_rank.hpp"
#include "lrk/problems.hpp"
#include "lrk/weighted_linalg.hpp"
#include "oracles.hpp"

using namespace lrk;

TEST(FullRankStep, EquilibriumFixedPoint) {
  auto sys = relax::system(8, 8, 2);
  for (double dt : {1e-3, 1.0, 100.0}) {
    Matrix F1 = step_full(sys.eq.F_eq, dt, sys);
    EXPECT_LT((F1 - sys.eq.F_eq).norm(), 1e-12 * sys.eq.F_eq.norm()) << dt;
  }
}

TEST(FullRankStep, ScalarBackwardEuler) {
  Mesh m = build_mesh(1, 1, 0, 1.0);
  const double chi = 3.0;
  auto sys = RelaxationSystem::build(m, [&](double) { return chi; }, [&](double e) { return chi * (1 + e); });
  double Feq = sys.eq.F_eq(0, 0);
  for (double dt : {0.1, 2.0}) {
    Matrix F = Matrix::Constant(1, 1, 0.7);
    double ref = (0.7 + dt * chi * Feq) / (1 + dt * chi);
    EXPECT_NEAR(step_full(F, dt, sys)(0, 0), ref, 1e-13);
  }
}

TEST(FullRankStep, RejectsBadInput) {
  auto sys = relax::system(2, 2, 1);
  EXPECT_THROW(FullRankStepper(sys, 0.0), Error);
  EXPECT_THROW(step_full(Matrix::Zero(3, 3), 0.1, sys), Error);
}

TEST(FullRankStep, OneLargeStepDecay) {
  const auto& sys = oracle::reference_160_q2();
  Matrix F0 = project_initial(sys.mesh, relax::f0, sys.A1);
  Matrix F1 = step_full(F0, 10.0, sys);
  double r = weighted_l2_error(F1, sys.eq.F_eq, sys.A1) / weighted_l2_error(F0, sys.eq.F_eq, sys.A1);
  EXPECT_LE(r, 1.0 / 41.0 + 1e-6);
}

TEST(ExactSolution, Values) {
  for (double mu : {-1.0, 0.2})
    for (double e : {0.0, 0.4, 1.0}) EXPECT_EQ(exact_solution_reference(mu, e, 0.0), relax::f0(mu, e));
  for (double e = 0; e <= 1.0; e += 0.125)
    EXPECT_LE(std::abs(exact_solution_reference(0.3, e, 100.0) - 1 / (e * e + 1)), 1e-100);
  EXPECT_NEAR(exact_solution_reference(0, 0, 1), 1 + 2 * std::exp(-4.0), 1e-15);
  EXPECT_NEAR(exact_solution_reference(0, 0, 1), 1.0366313, 1e-7);
}

TEST(WeightedError, SelfIsZero) {
  auto sys = relax::system(4, 4, 2);
  Matrix F0 = project_initial(sys.mesh, relax::f0, sys.A1);
  EXPECT_EQ(weighted_l2_error(F0, F0, sys.A1), 0.0);
}

TEST(WeightedError, MatchesQuadratureForPolynomialDifference) {
  // F = 0 against f = 1: ||eps||^2 = 2 * 1/3
  auto sys = relax::system(3, 5, 1);
  double e = weighted_l2_error(sys.mesh, Matrix::Zero(sys.mesh.m(), sys.mesh.n()), [](double, double) { return 1.0; });
  EXPECT_NEAR(e, std::sqrt(2.0 / 3.0), 1e-14);
}

TEST(WeightedError, EquilibriumProjectionFloor) {
  const auto& sys = oracle::reference_160_q2();
  double e = weighted_l2_error(sys.mesh, sys.eq.F_eq, [](double, double eps) { return relax::f_eq(eps); });
  EXPECT_LT(e, 1e-11);
}

TEST(WeightedError, InitialProjectionThirdOrder) {
  std::vector<double> errs;
  for (int N : {10, 20, 40}) {
    auto sys = relax::system(N, N, 2);
    Matrix F0 = project_initial(sys.mesh, relax::f0, sys.A1);
    errs.push_back(weighted_l2_error(sys.mesh, F0, relax::f0));
  }
  for (std::size_t i = 1; i < errs.size(); ++i) {
    double ratio = errs[i - 1] / errs[i];
    EXPECT_GT(ratio, 7.0);
    EXPECT_LT(ratio, 9.0);
  }
}

TEST(RunFull, ZeroSteps) {
  auto sys = relax::system(3, 3, 1);
  Matrix F0 = project_initial(sys.mesh, relax::f0, sys.A1);
  FullRunConfig cfg;
  cfg.dt = 0.1;
  auto recs = run_full(F0, cfg, sys);
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_EQ(recs[0].step, 0);
  EXPECT_EQ(recs[0].time, 0.0);
}

TEST(RunFull, RankStartsAtNineEndsAtOne) {
  const auto& sys = oracle::reference_160_q2();
  Matrix F0 = project_initial(sys.mesh, relax::f0, sys.A1);
  FullRunConfig cfg;
  cfg.dt = 0.05;
  cfg.n_steps = 200;
  cfg.record_every = 200;
  auto recs = run_full(F0, cfg, sys);
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_EQ(*recs.front().num_rank, 9);
  EXPECT_EQ(*recs.back().num_rank, 1);
}

TEST(RunFull, DecayRatioApproachesBound) {
  const auto& sys = oracle::reference_160_q2();
  Matrix F0 = project_initial(sys.mesh, relax::f0, sys.A1);
  FullRunConfig cfg;
  cfg.dt = 2.0;
  cfg.n_steps = 10;
  cfg.track_rank = false;
  auto recs = run_full(F0, cfg, sys);
  double c = 1.0 / (1.0 + 2.0 * sys.bounds.min);
  double prev = 0.0;
  for (std::size_t i = 1; i < recs.size(); ++i) {
    double r = recs[i].err_eq / recs[i - 1].err_eq;
    EXPECT_LE(r, c + 1e-12);
    EXPECT_GE(r, 1.0 / (1.0 + 2.0 * sys.bounds.max) - 1e-12);
    EXPECT_GE(r, prev - 1e-12);
    prev = r;
  }
  EXPECT_GT(prev, 0.5 * (1.0 / 9.0 + 0.1));
}

TEST(RunFull, ExactErrorRecorded) {
  auto sys = relax::system(10, 10, 2);
  Matrix F0 = project_initial(sys.mesh, relax::f0, sys.A1);
  FullRunConfig cfg;
  cfg.dt = 0.01;
  cfg.n_steps = 4;
  cfg.record_every = 2;
  cfg.exact = relax::exact;
  auto recs = run_full(F0, cfg, sys);
  ASSERT_EQ(recs.size(), 3u);
  EXPECT_EQ(recs[2].step, 4);
  for (auto& r : recs) ASSERT_TRUE(r.err_exact.has_value());
  EXPECT_NEAR(*recs[0].err_exact, weighted_l2_error(sys.mesh, F0, relax::f0), 1e-15);
}
