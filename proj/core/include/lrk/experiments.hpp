#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "lrk/dlr.hpp"

namespace lrk {

// Bases for the initial-basis condition study on the reference problem.
struct CaseBases {
  Vector U_eq, U_hat2, U_hat3, U_check;
  Vector E_eq, E_hat2, E_check, E_bar2, E_bar3;
};

CaseBases build_case_bases(const RelaxationSystem& sys, const SqrtPair& sq, const Matrix& F0);

struct CaseSpec {
  std::string id;
  double beta = 0.0;                  // construction-forced value
  std::optional<double> alpha;        // reported reference, if any
  std::string verdict;                // "C", "NC" or "" (not classified)
};

const std::vector<CaseSpec>& case_catalog();
const CaseSpec& case_spec(const std::string& id);
LowRankState case_initial_state(const CaseBases& cb, const std::string& id,
                                const RelaxationSystem& sys, std::uint64_t seed);

// "C": every step ratio <= c + 0.05; "NC": err(last) > 0.5 err(0); else "?"
std::string classify_convergence(const std::vector<double>& err_eq, double c);

struct ResultRow {
  std::string experiment;
  std::string case_id;
  int n_mu = 0, n_eps = 0, k = 0;
  std::optional<int> r;  // empty for full rank
  double dt = 0.0;
  int step = 0;
  double time = 0.0;
  std::optional<double> err_exact, err_eq;
  std::optional<int> num_rank;
  std::optional<double> beta, e_proj, alpha, wall_ms;
};

struct Check {
  std::string name;
  double value = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  bool passed = false;
  std::string note;
};

struct ExperimentResult {
  std::string name;
  std::vector<ResultRow> rows;
  std::vector<Check> checks;
  std::map<std::string, double> metrics;
  std::map<std::string, std::string> labels;
  bool passed() const;
};

struct ExperimentConfig {
  std::string name;
  int n_mu = 0, n_eps = 0;  // 0: experiment default
  int k = -1;
  std::vector<int> ranks;
  std::vector<int> n_list;
  std::vector<double> dt_list;
  std::vector<double> t_list;
  double dt = 0.0;
  double tfinal = 0.0;
  int steps = 0;
  int record_every = 0;
  std::uint64_t seed = 42;
  bool skip_k_step = false;
  std::vector<std::string> cases;
  int repetitions = 100;  // random a4 draws in basis_study
  int threads = 0;  // 0: LOWRANK_KINETICS_THREADS or hardware
  bool record_timing = false;
  std::string out;
  std::string format = "csv";
};

const std::vector<std::string>& experiment_names();
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// key = value with [mesh] / [run] / [output] sections
ExperimentConfig parse_config(const std::string& text, ExperimentConfig base = {});
ExperimentConfig load_config(const std::string& path, ExperimentConfig base = {});

int thread_budget(int requested);

// least-squares slope of log2(y) against log2(x)
double fit_log_slope(const std::vector<double>& x, const std::vector<double>& y);
// indices with y > 100 * min(y)
std::vector<std::size_t> presaturation(const std::vector<double>& y);

extern const char* kCsvHeader;
std::string format_double(double v);
void write_csv(std::ostream& os, const std::vector<ResultRow>& rows, bool header = true);
void write_json(std::ostream& os, const ExperimentResult& res);
void write_gnuplot(std::ostream& os, const ExperimentResult& res, const std::string& csv_path);

}  // namespace lrk
