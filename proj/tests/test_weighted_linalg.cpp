#include <gtest/gtest.h>

#include "lrk/error.hpp"
#include "lrk/problems.hpp"
#include "lrk/weighted_linalg.hpp"
#include "oracles.hpp"

using namespace lrk;

namespace {

BlockDiagSPD identity_blocks(int nb, int p) {
  return BlockDiagSPD(std::vector<Matrix>(nb, Matrix::Identity(p, p)));
}

const RelaxationSystem& small_sys() {
  static const RelaxationSystem s = relax::system(6, 7, 2);
  return s;
}

const SqrtPair& small_sq() {
  static const SqrtPair s = matrix_sqrt(small_sys().A1);
  return s;
}

double a1_norm(const Matrix& F, const BlockDiagSPD& A1) { return std::sqrt(A1.inner(F.transpose(), F.transpose())); }

}  // namespace

TEST(WeightedFrobenius, UnitRow) {
  Matrix e1 = Matrix::Zero(1, 3);
  e1(0, 0) = 1;
  EXPECT_DOUBLE_EQ(wfrob(e1, e1, identity_blocks(3, 1)), 1.0);
}

TEST(WeightedFrobenius, TransposeIdentity) {
  std::mt19937_64 g(1);
  Matrix A = oracle::random_matrix(g, 3, 2), B = oracle::random_matrix(g, 4, 2), D = oracle::random_matrix(g, 3, 4);
  BlockDiagSPD I4 = identity_blocks(4, 1), I2 = identity_blocks(2, 1);
  EXPECT_NEAR(wfrob(A * B.transpose(), D, I4), wfrob(A, D * B, I2), 1e-12);
  EXPECT_NEAR(wfrob(A * B.transpose(), D, I4), (A * B.transpose()).cwiseProduct(D).sum(), 1e-12);
}

TEST(WeightedFrobenius, EquilibriumNormalized) {
  const auto& s = small_sys();
  EXPECT_NEAR(wnorm(s.eq.E_eq.transpose(), s.A1), 1.0, 1e-10);
}

TEST(MatrixSqrt, Identity) {
  SqrtPair sp = matrix_sqrt(identity_blocks(2, 3));
  EXPECT_LT((sp.half.dense() - Matrix::Identity(6, 6)).norm(), 1e-15);
  EXPECT_LT((sp.inv_half.dense() - Matrix::Identity(6, 6)).norm(), 1e-15);
}

TEST(MatrixSqrt, Scalar) {
  SqrtPair sp = matrix_sqrt(BlockDiagSPD({Matrix::Constant(1, 1, 4.0)}));
  EXPECT_NEAR(sp.half.block(0)(0, 0), 2.0, 1e-15);
  EXPECT_NEAR(sp.inv_half.block(0)(0, 0), 0.5, 1e-15);
}

TEST(MatrixSqrt, RandomBlockReconstruction) {
  std::mt19937_64 g(3);
  Matrix A = oracle::random_spd(g, 3);
  SqrtPair sp = matrix_sqrt(BlockDiagSPD({A}));
  Matrix H = sp.half.block(0), Hi = sp.inv_half.block(0);
  EXPECT_LT((H * H - A).norm(), 1e-11 * A.norm());
  EXPECT_LT((H * Hi - Matrix::Identity(3, 3)).norm(), 1e-11);
  EXPECT_LT((H - H.transpose()).norm(), 1e-13);
}

TEST(BlockDiag, RejectsNonSPD) {
  Matrix A(2, 2);
  A << 1, 2, 2, 1;
  try {
    BlockDiagSPD b({A});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotSPD);
  }
}

TEST(BlockDiag, OperationsMatchDense) {
  std::mt19937_64 g(5);
  std::vector<Matrix> blocks;
  for (int b = 0; b < 3; ++b) blocks.push_back(oracle::random_spd(g, 2));
  BlockDiagSPD M(blocks);
  Matrix D = M.dense();
  Matrix V = oracle::random_matrix(g, 6, 2), F = oracle::random_matrix(g, 4, 6);
  EXPECT_LT((M.apply(V) - D * V).norm(), 1e-12);
  EXPECT_LT((M.apply_right(F) - F * D).norm(), 1e-12);
  EXPECT_LT((M.solve(V) - D.ldlt().solve(V)).norm(), 1e-10);
  EXPECT_LT((M.solve_right(F) - D.ldlt().solve(F.transpose()).transpose()).norm(), 1e-10);
  EXPECT_NEAR(M.inner(V, V), (V.transpose() * D * V).trace(), 1e-11);
  EXPECT_LT((M.plus(M, 2.0).dense() - 3 * D).norm(), 1e-12);
}

TEST(ThinQR, ContractAndSign) {
  std::mt19937_64 g(9);
  Matrix K = oracle::random_matrix(g, 20, 4);
  QR qr = thin_qr(K);
  EXPECT_LT(orthonormality_defect(qr.Q), 1e-13);
  EXPECT_LT((qr.Q * qr.R - K).norm(), 1e-12 * K.norm());
  for (int i = 0; i < 4; ++i) EXPECT_GE(qr.R(i, i), 0.0);
  EXPECT_LT(qr.R.triangularView<Eigen::StrictlyLower>().toDenseMatrix().norm(), 1e-15);
}

TEST(Gsvd, ZeroMatrixDegenerate) {
  const auto& s = small_sys();
  LowRankState st = gsvd(Matrix::Zero(s.mesh.m(), s.mesh.n()), small_sq(), 1);
  EXPECT_TRUE(st.degenerate);
  EXPECT_EQ(st.S.rows(), 1);
  EXPECT_EQ(st.S(0, 0), 0.0);
  EXPECT_LT(orthonormality_defect(st.U), 1e-12);
  EXPECT_LT(orthonormality_defect(st.E, s.A1), 1e-12);
}

TEST(Gsvd, RecoversEquilibrium) {
  const auto& s = small_sys();
  LowRankState st = gsvd(s.eq.F_eq, small_sq(), 1);
  EXPECT_NEAR(st.S(0, 0), s.eq.S_eq, 1e-10 * s.eq.S_eq);
  EXPECT_NEAR(std::abs((st.U.transpose() * s.eq.U_eq)(0, 0)), 1.0, 1e-10);
}

TEST(Gsvd, FullRankReconstruction) {
  const auto& s = small_sys();
  std::mt19937_64 g(11);
  Matrix F = oracle::random_matrix(g, s.mesh.m(), s.mesh.n());
  int r = std::min(s.mesh.m(), s.mesh.n());
  LowRankState st = gsvd(F, small_sq(), r);
  EXPECT_LE(a1_norm(st.full() - F, s.A1), 1e-10 * a1_norm(F, s.A1));
  EXPECT_LT(orthonormality_defect(st.U), 1e-10);
  EXPECT_LT(orthonormality_defect(st.E, s.A1), 1e-10);
  for (int i = 1; i < r; ++i) EXPECT_GE(st.S(i - 1, i - 1), st.S(i, i));
}

TEST(Gsvd, RankTooLarge) {
  const auto& s = small_sys();
  try {
    gsvd(Matrix::Zero(s.mesh.m(), s.mesh.n()), small_sq(), s.mesh.n() + 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::RankRequestTooLarge);
  }
}

TEST(Gqr, Idempotent) {
  const auto& s = small_sys();
  QR qr = gqr(s.eq.E_eq, small_sq());
  EXPECT_NEAR(qr.R(0, 0), 1.0, 1e-12);
  EXPECT_LT((qr.Q - s.eq.E_eq).norm(), 1e-10);
  QR q2 = gqr(2.0 * s.eq.E_eq, small_sq());
  EXPECT_NEAR(q2.R(0, 0), 2.0, 1e-12);
  EXPECT_LT((q2.Q - s.eq.E_eq).norm(), 1e-10);
}

TEST(Gqr, RandomReconstruction) {
  const auto& s = small_sys();
  std::mt19937_64 g(13);
  Matrix L = oracle::random_matrix(g, s.mesh.n(), 3);
  QR qr = gqr(L, small_sq());
  EXPECT_LE(orthonormality_defect(qr.Q, s.A1), 1e-10);
  EXPECT_LE((qr.Q * qr.R - L).norm(), 1e-10 * L.norm());
}

TEST(GramSchmidt, AlreadyOrthonormal) {
  const auto& s = small_sys();
  std::mt19937_64 g(15);
  Matrix B = gqr(oracle::random_matrix(g, s.mesh.n(), 3), small_sq()).Q;
  QR qr = weighted_gram_schmidt(B, s.A1);
  EXPECT_LT((qr.Q - B).norm(), 1e-12);
  EXPECT_LT((qr.R - Matrix::Identity(3, 3)).norm(), 1e-12);
}

TEST(GramSchmidt, DuplicateColumnRankDeficient) {
  const auto& s = small_sys();
  Matrix B(s.mesh.n(), 2);
  B << s.eq.E_eq, s.eq.E_eq;
  try {
    weighted_gram_schmidt(B, s.A1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::RankDeficient);
  }
}

TEST(GramSchmidt, AgreesWithGqr) {
  const auto& s = small_sys();
  std::mt19937_64 g(17);
  Matrix B = oracle::random_matrix(g, s.mesh.n(), 4);
  QR a = weighted_gram_schmidt(B, s.A1);
  QR b = gqr(B, small_sq());
  for (int j = 0; j < 4; ++j) {
    double d = std::min((a.Q.col(j) - b.Q.col(j)).norm(), (a.Q.col(j) + b.Q.col(j)).norm());
    EXPECT_LT(d, 1e-9);
  }
}

TEST(NumericalRank, Cases) {
  EXPECT_EQ(numerical_rank(Matrix::Zero(5, 4)), 0);
  const auto& s = small_sys();
  EXPECT_EQ(numerical_rank(s.eq.F_eq, 1e-12), 1);
  Vector sv = singular_values(Matrix::Identity(3, 3) * 2.0);
  EXPECT_NEAR(sv[0], 2.0, 1e-15);
}
