#pragma once

#include "lrk/block_diag.hpp"

namespace lrk {

// trace(Z M W^T) for Z, W of shape p x n
double wfrob(const Matrix& Z, const Matrix& W, const BlockDiagSPD& M);
double wnorm(const Matrix& Z, const BlockDiagSPD& M);

struct SqrtPair {
  BlockDiagSPD half;
  BlockDiagSPD inv_half;
};

SqrtPair matrix_sqrt(const BlockDiagSPD& A);

struct LowRankState {
  Matrix U;  // m x r, orthonormal
  Matrix S;  // r x r
  Matrix E;  // n x r, A1-orthonormal
  bool degenerate = false;

  int rank() const { return static_cast<int>(S.rows()); }
  Matrix full() const { return U * S * E.transpose(); }
};

struct QR {
  Matrix Q;
  Matrix R;  // upper triangular, nonnegative diagonal
};

// Householder thin QR with sign fix; never fails.
QR thin_qr(const Matrix& K);

LowRankState gsvd(const Matrix& F, const SqrtPair& sq, int r);
QR gqr(const Matrix& L, const SqrtPair& sq);
// Modified Gram-Schmidt in the M inner product with one reorthogonalization pass.
QR weighted_gram_schmidt(const Matrix& B, const BlockDiagSPD& M);

Vector singular_values(const Matrix& F);
int numerical_rank(const Matrix& F, double tol = 1e-12);

double orthonormality_defect(const Matrix& U);                      // ||U^T U - I||_F
double orthonormality_defect(const Matrix& E, const BlockDiagSPD& M);  // ||E^T M E - I||_F

}  // namespace lrk
