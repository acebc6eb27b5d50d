#include "lrk/block_diag.hpp"

#include <string>

#include "lrk/error.hpp"

namespace lrk {

BlockDiagSPD::BlockDiagSPD(std::vector<Matrix> blocks) : blocks_(std::move(blocks)) {
  if (blocks_.empty()) raise(ErrorCode::ShapeMismatch, "no blocks");
  p_ = static_cast<int>(blocks_.front().rows());
  llt_.reserve(blocks_.size());
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    const Matrix& A = blocks_[b];
    if (A.rows() != p_ || A.cols() != p_) raise(ErrorCode::ShapeMismatch, "unequal block sizes");
    if ((A - A.transpose()).norm() > 1e-12 * (1.0 + A.norm()))
      raise(ErrorCode::NotSPD, "block " + std::to_string(b) + " not symmetric");
    llt_.emplace_back(A);
    if (llt_.back().info() != Eigen::Success)
      raise(ErrorCode::NotSPD, "block " + std::to_string(b) + " not positive definite");
  }
}

Matrix BlockDiagSPD::dense() const {
  Matrix D = Matrix::Zero(dim(), dim());
  for (int b = 0; b < num_blocks(); ++b) D.block(b * p_, b * p_, p_, p_) = blocks_[b];
  return D;
}

Matrix BlockDiagSPD::apply(const Matrix& V) const {
  if (V.rows() != dim()) raise(ErrorCode::ShapeMismatch, "apply: row count");
  Matrix out(V.rows(), V.cols());
  for (int b = 0; b < num_blocks(); ++b)
    out.middleRows(b * p_, p_).noalias() = blocks_[b] * V.middleRows(b * p_, p_);
  return out;
}

Matrix BlockDiagSPD::apply_right(const Matrix& F) const {
  if (F.cols() != dim()) raise(ErrorCode::ShapeMismatch, "apply_right: column count");
  Matrix out(F.rows(), F.cols());
  for (int b = 0; b < num_blocks(); ++b)
    out.middleCols(b * p_, p_).noalias() = F.middleCols(b * p_, p_) * blocks_[b];
  return out;
}

Matrix BlockDiagSPD::solve(const Matrix& V) const {
  if (V.rows() != dim()) raise(ErrorCode::ShapeMismatch, "solve: row count");
  Matrix out(V.rows(), V.cols());
  for (int b = 0; b < num_blocks(); ++b)
    out.middleRows(b * p_, p_) = llt_[b].solve(V.middleRows(b * p_, p_));
  return out;
}

Matrix BlockDiagSPD::solve_right(const Matrix& F) const {
  if (F.cols() != dim()) raise(ErrorCode::ShapeMismatch, "solve_right: column count");
  Matrix out(F.rows(), F.cols());
  for (int b = 0; b < num_blocks(); ++b)
    out.middleCols(b * p_, p_) = llt_[b].solve(F.middleCols(b * p_, p_).transpose()).transpose();
  return out;
}

double BlockDiagSPD::inner(const Matrix& X, const Matrix& Y) const {
  if (X.rows() != dim() || Y.rows() != dim() || X.cols() != Y.cols())
    raise(ErrorCode::ShapeMismatch, "inner: shapes");
  double s = 0.0;
  for (int b = 0; b < num_blocks(); ++b)
    s += (X.middleRows(b * p_, p_).transpose() * blocks_[b] * Y.middleRows(b * p_, p_)).trace();
  return s;
}

BlockDiagSPD BlockDiagSPD::plus(const BlockDiagSPD& other, double scale) const {
  if (other.num_blocks() != num_blocks() || other.p_ != p_)
    raise(ErrorCode::ShapeMismatch, "plus: block layout");
  std::vector<Matrix> blocks(blocks_.size());
  for (std::size_t b = 0; b < blocks_.size(); ++b) blocks[b] = blocks_[b] + scale * other.blocks_[b];
  return BlockDiagSPD(std::move(blocks));
}

}  // namespace lrk
