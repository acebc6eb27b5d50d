#include "lrk/full_rank.hpp"

#include <cmath>

#include "lrk/error.hpp"
#include "lrk/problems.hpp"
#include "lrk/weighted_linalg.hpp"

namespace lrk {

FullRankStepper::FullRankStepper(const RelaxationSystem& sys, double dt)
    : dt_(dt), p_(sys.A1.block_size()), L0_(sys.mom.L0) {
  if (!(dt > 0.0)) raise(ErrorCode::NotPositive, "dt must be positive");
  const int nb = sys.A1.num_blocks();
  T_.resize(nb);
  w_.resize(sys.A1.dim());
  for (int b = 0; b < nb; ++b) {
    Matrix Mb = sys.A1.block(b) + dt * sys.A_EA.block(b);
    Eigen::LLT<Matrix> llt(Mb);
    if (llt.info() != Eigen::Success) raise(ErrorCode::SingularSystem, "shifted block not SPD");
    // T_b = A1_b Mb^{-1} = (Mb^{-1} A1_b)^T
    T_[b] = llt.solve(sys.A1.block(b)).transpose();
    w_.segment(b * p_, p_) = dt * llt.solve(sys.mom.L_eta.segment(b * p_, p_));
  }
}

Matrix FullRankStepper::step(const Matrix& F) const {
  if (F.rows() != L0_.size() || F.cols() != w_.size())
    raise(ErrorCode::ShapeMismatch, "step: F shape");
  Matrix out(F.rows(), F.cols());
  for (std::size_t b = 0; b < T_.size(); ++b)
    out.middleCols(b * p_, p_).noalias() = F.middleCols(b * p_, p_) * T_[b];
  out.noalias() += L0_ * w_.transpose();
  return out;
}

Matrix step_full(const Matrix& F, double dt, const RelaxationSystem& sys) {
  return FullRankStepper(sys, dt).step(F);
}

double weighted_l2_error(const Matrix& F, const Matrix& F_ref, const BlockDiagSPD& A1) {
  if (F.rows() != F_ref.rows() || F.cols() != F_ref.cols())
    raise(ErrorCode::ShapeMismatch, "weighted_l2_error: shapes");
  return wnorm(F - F_ref, A1);
}

double weighted_l2_error(const Mesh& mesh, const Matrix& F, const PhaseField& ref) {
  if (F.rows() != mesh.m() || F.cols() != mesh.n())
    raise(ErrorCode::ShapeMismatch, "weighted_l2_error: F shape");
  const int p = mesh.local_dofs(), q = mesh.quad_order() + 2;
  GaussRule rule = gauss_legendre(q);
  Matrix B(p, q);
  for (int j = 0; j < q; ++j) B.col(j) = scaled_legendre(mesh.degree(), rule.nodes[j]);
  double total = 0.0;
  Matrix vals(q, q);
  for (int a = 0; a < mesh.n_mu(); ++a) {
    double ha = mesh.mu_width(a), ma = mesh.mu_edges()[a];
    for (int b = 0; b < mesh.n_eps(); ++b) {
      double hb = mesh.eps_width(b), eb = mesh.eps_edges()[b];
      vals.noalias() = B.transpose() * F.block(a * p, b * p, p, p) * B / std::sqrt(ha * hb);
      double cell = 0.0;
      for (int i = 0; i < q; ++i) {
        double mu = ma + 0.5 * ha * (rule.nodes[i] + 1.0);
        double wi = 0.5 * ha * rule.weights[i];
        for (int j = 0; j < q; ++j) {
          double eps = eb + 0.5 * hb * (rule.nodes[j] + 1.0);
          double wj = 0.5 * hb * rule.weights[j];
          double d = vals(i, j) - ref(mu, eps);
          cell += wi * wj * eps * eps * d * d;
        }
      }
      total += cell;
    }
  }
  return std::sqrt(total);
}

double exact_solution_reference(double mu, double eps, double t) { return relax::exact(mu, eps, t); }

std::vector<StepRecord> run_full(const Matrix& F0, const FullRunConfig& cfg,
                                 const RelaxationSystem& sys, Matrix* final_state) {
  if (cfg.n_steps < 0 || cfg.record_every < 1) raise(ErrorCode::ConfigError, "run_full: bad counts");
  FullRankStepper stepper(sys, cfg.dt);
  std::vector<StepRecord> out;
  auto record = [&](int step, const Matrix& F) {
    StepRecord rec;
    rec.step = step;
    rec.time = step * cfg.dt;
    if (cfg.exact) {
      double t = rec.time;
      rec.err_exact = weighted_l2_error(sys.mesh, F, [&](double mu, double eps) {
        return cfg.exact(mu, eps, t);
      });
    }
    rec.err_eq = wnorm(F - sys.eq.F_eq, sys.A1);
    if (cfg.track_rank) rec.num_rank = numerical_rank(F, cfg.rank_tol);
    rec.norm = wnorm(F, sys.A1);
    out.push_back(rec);
  };
  Matrix F = F0;
  record(0, F);
  for (int s = 1; s <= cfg.n_steps; ++s) {
    F = stepper.step(F);
    if (s % cfg.record_every == 0 || s == cfg.n_steps) record(s, F);
  }
  if (final_state) *final_state = std::move(F);
  return out;
}

}  // namespace lrk
