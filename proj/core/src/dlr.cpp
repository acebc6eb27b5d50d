#include "lrk/dlr.hpp"

#include <cmath>
#include <future>
#include <limits>
#include <random>

#include "lrk/error.hpp"
#include "lrk/full_rank.hpp"

namespace lrk {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// X (I + dt B)^{-1} for SPD B
Matrix shifted_solve_right(const Matrix& X, const Matrix& B, double dt) {
  const Eigen::Index r = B.rows();
  Matrix Mshift = Matrix::Identity(r, r) + dt * B;
  Mshift = 0.5 * (Mshift + Mshift.transpose()).eval();
  Eigen::LLT<Matrix> llt(Mshift);
  if (llt.info() != Eigen::Success) raise(ErrorCode::SingularSystem, "I + dt B not SPD");
  return llt.solve(X.transpose()).transpose();
}

// A1-orthonormal basis of span(L), completed with seeded random directions.
Matrix pad_orthonormal(const Matrix& L, const BlockDiagSPD& A1, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Matrix Q = L;
  auto orthogonalize = [&](Eigen::Index j) {
    for (int pass = 0; pass < 2; ++pass)
      for (Eigen::Index i = 0; i < j; ++i) Q.col(j) -= A1.inner(Q.col(i), Q.col(j)) * Q.col(i);
    return std::sqrt(std::max(0.0, A1.inner(Q.col(j), Q.col(j))));
  };
  for (Eigen::Index j = 0; j < Q.cols(); ++j) {
    double orig = std::sqrt(std::max(0.0, A1.inner(Q.col(j), Q.col(j))));
    double nj = orthogonalize(j);
    while (!(nj > 1e-12 * orig) || nj == 0.0) {
      for (Eigen::Index i = 0; i < Q.rows(); ++i) Q(i, j) = nd(rng);
      orig = std::sqrt(A1.inner(Q.col(j), Q.col(j)));
      nj = orthogonalize(j);
    }
    Q.col(j) /= nj;
  }
  return Q;
}

}  // namespace

LowRankState init_low_rank(const Matrix& F0, int r, const SqrtPair& sq) { return gsvd(F0, sq, r); }

KStepResult k_step(const LowRankState& st, const SiuiConfig& cfg, const RelaxationSystem& sys) {
  KStepResult out;
  const int r = st.rank();
  if (cfg.skip_k_step) {
    double beta = (st.U.transpose() * sys.eq.U_eq).norm();
    if (beta < 1.0 - 1e-8)
      raise(ErrorCode::SkipConditionViolated, "||P_U U_eq|| = " + std::to_string(beta));
    out.K = st.U * st.S;
    out.U = st.U;
    out.M = Matrix::Identity(r, r);
    out.skipped = true;
    return out;
  }
  Matrix AE = sys.A_EA.apply(st.E);
  Matrix B = st.E.transpose() * AE;
  Matrix rhs = st.U * st.S;
  rhs.noalias() += (cfg.dt * sys.mom.L0) * (sys.mom.L_eta.transpose() * st.E);
  out.K = shifted_solve_right(rhs, B, cfg.dt);
  QR qr = thin_qr(out.K);
  out.U = std::move(qr.Q);
  out.M = out.U.transpose() * st.U;
  return out;
}

LStepResult l_step(const LowRankState& st, const SiuiConfig& cfg, const RelaxationSystem& sys,
                   const SqrtPair& sq) {
  LStepResult out;
  BlockDiagSPD shifted = sys.A1.plus(sys.A_EA, cfg.dt);
  Matrix rhs = sys.A1.apply(st.E * st.S.transpose());
  rhs.noalias() += (cfg.dt * sys.mom.L_eta) * (sys.mom.L0.transpose() * st.U);
  out.L = shifted.solve(rhs);
  try {
    out.E = gqr(out.L, sq).Q;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::RankDeficient || cfg.on_rank_deficient == RankPolicy::Fail) throw;
    out.E = pad_orthonormal(out.L, sys.A1, cfg.pad_seed);
    out.padded = true;
  }
  out.N = out.E.transpose() * sys.A1.apply(st.E);
  return out;
}

SStepResult s_step(const Matrix& U_new, const Matrix& E_new, const Matrix& M, const Matrix& N,
                   const LowRankState& st, double dt, const RelaxationSystem& sys) {
  SStepResult out;
  out.S_star = M * st.S * N.transpose();
  double sn = st.S.norm(), ssn = out.S_star.norm();
  if (ssn > sn + 1e-12 * std::max(1.0, sn))
    raise(ErrorCode::InvariantViolation, "||S*||_F exceeds ||S||_F");
  Matrix B = E_new.transpose() * sys.A_EA.apply(E_new);
  Matrix rhs = out.S_star;
  rhs.noalias() += (dt * (U_new.transpose() * sys.mom.L0)) * (sys.mom.L_eta.transpose() * E_new);
  out.S = shifted_solve_right(rhs, B, dt);
  return out;
}

SiuiTrace siui_step_traced(const LowRankState& st, const SiuiConfig& cfg,
                           const RelaxationSystem& sys, const SqrtPair& sq) {
  if (!(cfg.dt > 0.0)) raise(ErrorCode::NotPositive, "dt must be positive");
  KStepResult K;
  LStepResult L;
  if (cfg.parallel_kl) {
    auto fk = std::async(std::launch::async, [&] { return k_step(st, cfg, sys); });
    L = l_step(st, cfg, sys, sq);
    K = fk.get();
  } else {
    K = k_step(st, cfg, sys);
    L = l_step(st, cfg, sys, sq);
  }
  SStepResult S = s_step(K.U, L.E, K.M, L.N, st, cfg.dt, sys);
  SiuiTrace tr;
  tr.s_norm = st.S.norm();
  tr.s_star_norm = S.S_star.norm();
  tr.k_skipped = K.skipped;
  tr.state = LowRankState{std::move(K.U), std::move(S.S), std::move(L.E), false};
  return tr;
}

LowRankState siui_step(const LowRankState& st, const SiuiConfig& cfg, const RelaxationSystem& sys,
                       const SqrtPair& sq) {
  return siui_step_traced(st, cfg, sys, sq).state;
}

Thresholds thresholds(const ThresholdParams& p, double dt, const ChiBounds& cb) {
  Thresholds th;
  th.c = 1.0 / (1.0 + dt * cb.min);
  th.delta_chi = (1.0 + cb.ratio()) * p.delta;
  double sr = std::sqrt(static_cast<double>(p.r));
  double a = p.beta > 0.0 ? sr / (p.beta * cb.min) : kInf;
  double b = p.alpha > 0.0 ? sr * std::sqrt(cb.max) / (p.alpha * std::pow(cb.min, 1.5)) : kInf;
  double inv_delta = p.delta > 0.0 ? 1.0 / p.delta : kInf;
  th.dt1 = a * inv_delta;
  th.dt2 = b * inv_delta;
  th.dt0 = std::sqrt(2.0) * inv_delta * std::max(a, b);
  return th;
}

double delta_from_dt(double dt, int r, double beta, double alpha, const ChiBounds& cb) {
  double sr = std::sqrt(static_cast<double>(r));
  double a = beta > 0.0 ? sr / (beta * cb.min) : kInf;
  double b = alpha > 0.0 ? sr * std::sqrt(cb.max) / (alpha * std::pow(cb.min, 1.5)) : kInf;
  return std::sqrt(2.0) * std::max(a, b) / dt;
}

TheoryDiagnostics theory_diagnostics(const LowRankState& st, const RelaxationSystem& sys,
                                     const ThresholdParams& p, double dt) {
  TheoryDiagnostics d;
  const auto& eq = sys.eq;
  d.degenerate = eq.degenerate;
  d.th = thresholds(p, dt, sys.bounds);
  Matrix F = st.full();
  d.err_eq = wnorm(F - eq.F_eq, sys.A1);
  if (eq.degenerate) return d;
  d.beta = (st.U.transpose() * eq.U_eq).norm();
  Matrix A1E = sys.A1.apply(st.E);
  Matrix AE = sys.A_EA.apply(st.E);
  d.e_proj = (A1E.transpose() * eq.E_eq).norm();
  Matrix B = st.E.transpose() * AE;
  Vector z = B.llt().solve(AE.transpose() * eq.E_eq);
  d.alpha = z.norm();
  // P_U F_eq A1 P_E with F_eq = U_eq S_eq E_eq^T
  Vector pu = st.U * (st.U.transpose() * eq.U_eq);
  Vector pe = st.E * (A1E.transpose() * eq.E_eq);
  Matrix diff = eq.F_eq - eq.S_eq * pu * pe.transpose();
  d.eq_proj_err = wnorm(diff, sys.A1);
  double b2 = d.beta * d.beta, e2 = d.e_proj * d.e_proj;
  d.eq_proj_err_closed =
      eq.S_eq * std::sqrt(std::max(0.0, (1.0 - b2) + b2 * (1.0 - e2)));
  return d;
}

std::vector<DlrRecord> run_dlr(const LowRankState& st0, const DlrRunConfig& cfg,
                               const RelaxationSystem& sys, const SqrtPair& sq,
                               LowRankState* final_state) {
  if (cfg.n_steps < 0 || cfg.record_every < 1) raise(ErrorCode::ConfigError, "run_dlr: bad counts");
  std::vector<DlrRecord> out;
  const double dt = cfg.siui.dt;
  auto record = [&](int step, const LowRankState& st, double sn, double ssn) {
    DlrRecord rec;
    rec.step = step;
    rec.time = step * dt;
    rec.diag = theory_diagnostics(st, sys, cfg.params, dt);
    Matrix F = st.full();
    if (cfg.exact) {
      double t = rec.time;
      rec.err_exact = weighted_l2_error(sys.mesh, F, [&](double mu, double eps) {
        return cfg.exact(mu, eps, t);
      });
    }
    if (cfg.track_rank) rec.num_rank = numerical_rank(F, cfg.rank_tol);
    rec.norm = st.S.norm();
    rec.s_norm = sn;
    rec.s_star_norm = ssn;
    out.push_back(std::move(rec));
  };
  LowRankState st = st0;
  record(0, st, st.S.norm(), st.S.norm());
  for (int s = 1; s <= cfg.n_steps; ++s) {
    SiuiTrace tr = siui_step_traced(st, cfg.siui, sys, sq);
    st = std::move(tr.state);
    if (s % cfg.record_every == 0 || s == cfg.n_steps) record(s, st, tr.s_norm, tr.s_star_norm);
  }
  if (final_state) *final_state = std::move(st);
  return out;
}

bool ProjectionBoundReport::all_passed() const {
  for (const auto& c : checks)
    if (!c.passed) return false;
  return true;
}

ProjectionBoundReport check_projection_bounds(const std::vector<DlrRecord>& history, double dt,
                                              const ThresholdParams& p,
                                              const RelaxationSystem& sys) {
  ProjectionBoundReport rep;
  if (history.empty()) return rep;
  const double slack = 1e-9;
  const double seq = sys.eq.S_eq;
  Thresholds th = thresholds(p, dt, sys.bounds);
  auto hyp_b = [&](const DlrRecord& r) { return r.diag.beta >= p.beta - 1e-12; };
  auto hyp_a = [&](const DlrRecord& r) { return r.diag.alpha >= p.alpha - 1e-12; };
  rep.hypotheses_met_initially = hyp_b(history.front()) && hyp_a(history.front());
  for (std::size_t i = 0; i + 1 < history.size(); ++i) {
    const auto& a = history[i];
    const auto& b = history[i + 1];
    if (b.step != a.step + 1) raise(ErrorCode::ConfigError, "history must be consecutive steps");
    bool hb = hyp_b(a), ha = hyp_a(a);
    if (!hb || !ha) rep.hypothesis_failures.push_back(a.step);
    if (seq == 0.0) continue;
    double rhs = p.delta * p.delta / (seq * seq) * a.diag.err_eq * a.diag.err_eq;
    if (hb && dt >= th.dt1) {
      double lhs = 1.0 - b.diag.e_proj * b.diag.e_proj;
      rep.checks.push_back({b.step, "E-projection", lhs, rhs, lhs <= rhs + slack});
    }
    if (ha && dt >= th.dt2) {
      double lhs = 1.0 - b.diag.beta * b.diag.beta;
      rep.checks.push_back({b.step, "U-projection", lhs, rhs, lhs <= rhs + slack});
    }
    if (ha && hb && dt >= th.dt0) {
      double lhs = b.diag.err_eq;
      double r1 = (th.c + th.delta_chi) * a.diag.err_eq;
      rep.checks.push_back({b.step, "one-step", lhs, r1, lhs <= r1 + slack});
    }
  }
  double rate = th.c + th.delta_chi;
  if (rep.hypotheses_met_initially && dt >= th.dt0 && rate < 1.0) {
    double e0 = history.front().diag.err_eq;
    for (std::size_t i = 1; i < history.size(); ++i) {
      double lhs = history[i].diag.err_eq;
      double rhs = std::pow(rate, history[i].step) * e0;
      rep.checks.push_back({history[i].step, "multi-step", lhs, rhs, lhs <= rhs + slack});
    }
  }
  return rep;
}

double g_gamma(double gamma, double alpha, double chi_ratio) {
  double tau = 0.5 * (1.0 - alpha * alpha / (gamma * gamma));
  return gamma * gamma * (1.0 - tau) + (1.0 - gamma * gamma) * chi_ratio * (1.0 - 1.0 / tau);
}

GammaCurve g_gamma_curve(double alpha, double chi_ratio, int samples) {
  GammaCurve gc;
  if (samples < 1) samples = 1;
  gc.gamma.resize(samples);
  gc.g.resize(samples);
  for (int i = 0; i < samples; ++i) {
    double gam = alpha + (1.0 - alpha) * (i + 1) / samples;
    gc.gamma[i] = gam;
    gc.g[i] = g_gamma(gam, alpha, chi_ratio);
  }
  // smallest gamma such that every sample from it up to 1 has g >= alpha^2
  gc.gamma_star = 1.0;
  for (int i = samples - 1; i >= 0; --i) {
    if (gc.g[i] >= alpha * alpha) gc.gamma_star = gc.gamma[i];
    else break;
  }
  return gc;
}

}  // namespace lrk
