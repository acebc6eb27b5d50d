#pragma once

#include <optional>
#include <vector>

#include "lrk/assembly.hpp"

namespace lrk {

// Backward Euler: F'(A1 + dt A_EA) = F A1 + dt L0 L_eta^T.
// Holds the per-block factorization for one dt; F' = F T + L0 w^T.
class FullRankStepper {
 public:
  FullRankStepper(const RelaxationSystem& sys, double dt);
  Matrix step(const Matrix& F) const;
  double dt() const { return dt_; }

 private:
  double dt_;
  int p_;
  std::vector<Matrix> T_;  // A1_b (A1_b + dt A_EA_b)^{-1}
  Vector L0_;
  Vector w_;               // dt (A1 + dt A_EA)^{-1} L_eta
};

Matrix step_full(const Matrix& F, double dt, const RelaxationSystem& sys);

double weighted_l2_error(const Matrix& F, const Matrix& F_ref, const BlockDiagSPD& A1);
// over-integrated with quad_order + 2 points per cell and direction
double weighted_l2_error(const Mesh& mesh, const Matrix& F, const PhaseField& ref);

double exact_solution_reference(double mu, double eps, double t);

struct FullRunConfig {
  double dt = 0.0;
  int n_steps = 0;
  int record_every = 1;
  double rank_tol = 1e-12;
  bool track_rank = true;
  TimeField exact;  // optional
};

struct StepRecord {
  int step = 0;
  double time = 0.0;
  std::optional<double> err_exact;
  double err_eq = 0.0;
  std::optional<int> num_rank;
  double norm = 0.0;
};

std::vector<StepRecord> run_full(const Matrix& F0, const FullRunConfig& cfg,
                                 const RelaxationSystem& sys, Matrix* final_state = nullptr);

}  // namespace lrk
