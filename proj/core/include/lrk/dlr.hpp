#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lrk/assembly.hpp"
#include "lrk/weighted_linalg.hpp"

namespace lrk {

enum class RankPolicy { Fail, PadRandom };

struct SiuiConfig {
  double dt = 0.0;
  bool skip_k_step = false;
  bool parallel_kl = false;
  RankPolicy on_rank_deficient = RankPolicy::Fail;
  std::uint64_t pad_seed = 0;
};

struct KStepResult {
  Matrix K;
  Matrix U;
  Matrix M;  // U_new^T U_old
  bool skipped = false;
};

struct LStepResult {
  Matrix L;
  Matrix E;
  Matrix N;  // E_new^T A1 E_old
  bool padded = false;
};

struct SStepResult {
  Matrix S;
  Matrix S_star;
};

LowRankState init_low_rank(const Matrix& F0, int r, const SqrtPair& sq);

KStepResult k_step(const LowRankState& st, const SiuiConfig& cfg, const RelaxationSystem& sys);
LStepResult l_step(const LowRankState& st, const SiuiConfig& cfg, const RelaxationSystem& sys,
                   const SqrtPair& sq);
SStepResult s_step(const Matrix& U_new, const Matrix& E_new, const Matrix& M, const Matrix& N,
                   const LowRankState& st, double dt, const RelaxationSystem& sys);

struct SiuiTrace {
  LowRankState state;
  double s_norm = 0.0;       // ||S^n||_F
  double s_star_norm = 0.0;  // ||S^{n,*}||_F
  bool k_skipped = false;
};

SiuiTrace siui_step_traced(const LowRankState& st, const SiuiConfig& cfg,
                           const RelaxationSystem& sys, const SqrtPair& sq);
LowRankState siui_step(const LowRankState& st, const SiuiConfig& cfg, const RelaxationSystem& sys,
                       const SqrtPair& sq);

struct ThresholdParams {
  int r = 1;
  double beta = 1.0;
  double alpha = 1.0;
  double delta = 0.0;
};

struct Thresholds {
  double c = 0.0;
  double delta_chi = 0.0;
  double dt0 = 0.0;
  double dt1 = 0.0;
  double dt2 = 0.0;
};

Thresholds thresholds(const ThresholdParams& p, double dt, const ChiBounds& cb);
// smallest delta for which dt >= dt0
double delta_from_dt(double dt, int r, double beta, double alpha, const ChiBounds& cb);

struct TheoryDiagnostics {
  double beta = 0.0;
  double e_proj = 0.0;
  double alpha = 0.0;
  double err_eq = 0.0;
  double eq_proj_err = 0.0;         // direct
  double eq_proj_err_closed = 0.0;  // S_eq^2 [(1-b^2) + b^2 (1-e^2)]
  Thresholds th;
  bool degenerate = false;
};

TheoryDiagnostics theory_diagnostics(const LowRankState& st, const RelaxationSystem& sys,
                                     const ThresholdParams& p, double dt);

struct DlrRunConfig {
  SiuiConfig siui;
  int n_steps = 0;
  int record_every = 1;
  double rank_tol = 1e-12;
  bool track_rank = false;
  TimeField exact;  // optional
  ThresholdParams params;
};

struct DlrRecord {
  int step = 0;
  double time = 0.0;
  TheoryDiagnostics diag;
  std::optional<double> err_exact;
  std::optional<int> num_rank;
  double norm = 0.0;         // ||eps f||
  double s_norm = 0.0;       // ||S^{n-1}||_F going into this step
  double s_star_norm = 0.0;  // ||S^{n-1,*}||_F
};

std::vector<DlrRecord> run_dlr(const LowRankState& st0, const DlrRunConfig& cfg,
                               const RelaxationSystem& sys, const SqrtPair& sq,
                               LowRankState* final_state = nullptr);

struct BoundCheck {
  int step = 0;
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool passed = true;
};

struct ProjectionBoundReport {
  std::vector<BoundCheck> checks;
  bool hypotheses_met_initially = false;
  std::vector<int> hypothesis_failures;  // steps where beta_n < beta or alpha_n < alpha
  bool all_passed() const;
};

// Records must be consecutive steps (record_every = 1).
ProjectionBoundReport check_projection_bounds(const std::vector<DlrRecord>& history, double dt,
                                              const ThresholdParams& p,
                                              const RelaxationSystem& sys);

struct GammaCurve {
  std::vector<double> gamma;
  std::vector<double> g;
  double gamma_star = 1.0;
};

double g_gamma(double gamma, double alpha, double chi_ratio);
GammaCurve g_gamma_curve(double alpha, double chi_ratio, int samples);

}  // namespace lrk
