#include "lrk/weighted_linalg.hpp"

#include <cmath>
#include <string>

#include "lrk/error.hpp"

namespace lrk {

double wfrob(const Matrix& Z, const Matrix& W, const BlockDiagSPD& M) {
  if (Z.rows() != W.rows() || Z.cols() != M.dim() || W.cols() != M.dim())
    raise(ErrorCode::ShapeMismatch, "wfrob: shapes");
  return M.inner(Z.transpose(), W.transpose());
}

double wnorm(const Matrix& Z, const BlockDiagSPD& M) {
  return std::sqrt(std::max(0.0, wfrob(Z, Z, M)));
}

SqrtPair matrix_sqrt(const BlockDiagSPD& A) {
  std::vector<Matrix> half, inv_half;
  for (int b = 0; b < A.num_blocks(); ++b) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(A.block(b));
    const Vector& lam = es.eigenvalues();
    double scale = A.block(b).norm();
    if (lam.minCoeff() <= 0.0) {
      if (lam.minCoeff() < -1e-13 * scale)
        raise(ErrorCode::NotSPD, "block " + std::to_string(b) + " has negative eigenvalue");
      raise(ErrorCode::NotSPD, "block " + std::to_string(b) + " is singular");
    }
    const Matrix& V = es.eigenvectors();
    half.push_back(V * lam.cwiseSqrt().asDiagonal() * V.transpose());
    inv_half.push_back(V * lam.cwiseSqrt().cwiseInverse().asDiagonal() * V.transpose());
    half.back() = 0.5 * (half.back() + half.back().transpose()).eval();
    inv_half.back() = 0.5 * (inv_half.back() + inv_half.back().transpose()).eval();
  }
  return SqrtPair{BlockDiagSPD(std::move(half)), BlockDiagSPD(std::move(inv_half))};
}

QR thin_qr(const Matrix& K) {
  const Eigen::Index m = K.rows(), r = K.cols();
  Eigen::HouseholderQR<Matrix> qr(K);
  QR out;
  out.Q = qr.householderQ() * Matrix::Identity(m, r);
  out.R = qr.matrixQR().topRows(r).triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < r; ++j) {
    if (out.R(j, j) < 0.0) {
      out.R.row(j) *= -1.0;
      out.Q.col(j) *= -1.0;
    }
  }
  return out;
}

namespace {

void check_rank(const QR& qr, const Vector& col_norms, const char* who) {
  for (Eigen::Index j = 0; j < qr.R.cols(); ++j) {
    if (!(qr.R(j, j) > 1e-12 * col_norms[j]) || col_norms[j] == 0.0)
      raise(ErrorCode::RankDeficient, std::string(who) + ": column " + std::to_string(j));
  }
}

Vector weighted_col_norms(const Matrix& B, const BlockDiagSPD& M) {
  Matrix MB = M.apply(B);
  Vector n(B.cols());
  for (Eigen::Index j = 0; j < B.cols(); ++j) n[j] = std::sqrt(std::max(0.0, B.col(j).dot(MB.col(j))));
  return n;
}

}  // namespace

QR gqr(const Matrix& L, const SqrtPair& sq) {
  if (L.rows() != sq.half.dim()) raise(ErrorCode::ShapeMismatch, "gqr: rows");
  Matrix Lh = sq.half.apply(L);
  QR qr = thin_qr(Lh);
  Vector norms = Lh.colwise().norm().transpose();
  check_rank(qr, norms, "gqr");
  qr.Q = sq.inv_half.apply(qr.Q);
  return qr;
}

QR weighted_gram_schmidt(const Matrix& B, const BlockDiagSPD& M) {
  if (B.rows() != M.dim()) raise(ErrorCode::ShapeMismatch, "weighted_gram_schmidt: rows");
  const Eigen::Index r = B.cols();
  Vector norms = weighted_col_norms(B, M);
  QR out{B, Matrix::Zero(r, r)};
  Matrix& Q = out.Q;
  for (Eigen::Index j = 0; j < r; ++j) {
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index i = 0; i < j; ++i) {
        double c = M.inner(Q.col(i), Q.col(j));
        Q.col(j) -= c * Q.col(i);
        out.R(i, j) += c;
      }
    }
    double nj = std::sqrt(std::max(0.0, M.inner(Q.col(j), Q.col(j))));
    out.R(j, j) = nj;
    if (!(nj > 1e-12 * norms[j]) || norms[j] == 0.0)
      raise(ErrorCode::RankDeficient, "weighted_gram_schmidt: column " + std::to_string(j));
    Q.col(j) /= nj;
  }
  return out;
}

LowRankState gsvd(const Matrix& F, const SqrtPair& sq, int r) {
  const Eigen::Index m = F.rows(), n = F.cols();
  if (n != sq.half.dim()) raise(ErrorCode::ShapeMismatch, "gsvd: columns");
  if (r < 1 || r > std::min(m, n))
    raise(ErrorCode::RankRequestTooLarge, "requested rank " + std::to_string(r));
  LowRankState st;
  if (F.lpNorm<Eigen::Infinity>() == 0.0) {
    st.U = Matrix::Identity(m, r);
    st.S = Matrix::Zero(r, r);
    st.E = sq.inv_half.apply(Matrix::Identity(n, r));
    st.degenerate = true;
    return st;
  }
  Matrix Fh = sq.half.apply_right(F);
  Eigen::BDCSVD<Matrix> svd(Fh, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Matrix U = svd.matrixU().leftCols(r);
  Matrix V = svd.matrixV().leftCols(r);
  for (int j = 0; j < r; ++j) {
    Eigen::Index imax;
    U.col(j).cwiseAbs().maxCoeff(&imax);
    if (U(imax, j) < 0.0) {
      U.col(j) *= -1.0;
      V.col(j) *= -1.0;
    }
  }
  st.U = std::move(U);
  st.S = svd.singularValues().head(r).asDiagonal();
  st.E = sq.inv_half.apply(V);
  return st;
}

Vector singular_values(const Matrix& F) {
  if (F.size() == 0) return Vector();
  Eigen::BDCSVD<Matrix> svd(F);
  return svd.singularValues();
}

int numerical_rank(const Matrix& F, double tol) {
  Vector s = singular_values(F);
  int count = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s[i] > tol) ++count;
  return count;
}

double orthonormality_defect(const Matrix& U) {
  return (U.transpose() * U - Matrix::Identity(U.cols(), U.cols())).norm();
}

double orthonormality_defect(const Matrix& E, const BlockDiagSPD& M) {
  return (E.transpose() * M.apply(E) - Matrix::Identity(E.cols(), E.cols())).norm();
}

}  // namespace lrk
