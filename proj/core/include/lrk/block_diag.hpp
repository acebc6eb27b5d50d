#pragma once

#include <vector>

#include "lrk/types.hpp"

namespace lrk {

// Block-diagonal SPD matrix with equal square blocks. Cholesky factors are
// computed at construction; the object is immutable afterwards.
class BlockDiagSPD {
 public:
  BlockDiagSPD() = default;
  explicit BlockDiagSPD(std::vector<Matrix> blocks);

  int num_blocks() const { return static_cast<int>(blocks_.size()); }
  int block_size() const { return p_; }
  int dim() const { return num_blocks() * p_; }
  const Matrix& block(int b) const { return blocks_[b]; }
  Matrix dense() const;

  Matrix apply(const Matrix& V) const;        // A V
  Matrix apply_right(const Matrix& F) const;  // F A
  Matrix solve(const Matrix& V) const;        // A^{-1} V
  Matrix solve_right(const Matrix& F) const;  // F A^{-1}
  // sum_b <X_b, A_b Y_b> = trace(X^T A Y) for X, Y with dim() rows
  double inner(const Matrix& X, const Matrix& Y) const;

  BlockDiagSPD plus(const BlockDiagSPD& other, double scale) const;  // A + scale*other

 private:
  std::vector<Matrix> blocks_;
  std::vector<Eigen::LLT<Matrix>> llt_;
  int p_ = 0;
};

}  // namespace lrk
