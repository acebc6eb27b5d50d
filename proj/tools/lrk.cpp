#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "lrk/error.hpp"
#include "lrk/experiments.hpp"
#include "lrk/full_rank.hpp"
#include "lrk/problems.hpp"

namespace {

struct Flags {
  std::optional<int> nmu, neps, degree, rank, steps;
  std::optional<double> dt, tfinal;
  std::optional<std::uint64_t> seed;
  bool skip_kstep = false;
  bool timing = false;
  std::string config, out, format;
  std::optional<int> threads;
};

void add_flags(CLI::App* app, Flags& f) {
  app->add_option("--nmu", f.nmu, "cells in mu");
  app->add_option("--neps", f.neps, "cells in eps");
  app->add_option("--degree", f.degree, "polynomial degree k");
  app->add_option("--rank", f.rank, "low-rank r");
  app->add_option("--dt", f.dt, "time step");
  app->add_option("--tfinal", f.tfinal, "final time");
  app->add_option("--steps", f.steps, "number of steps");
  app->add_option("--seed", f.seed, "random seed");
  app->add_flag("--skip-kstep", f.skip_kstep, "omit the K-step (requires U_eq in span U)");
  app->add_option("--config", f.config, "config file ([mesh]/[run]/[output])");
  app->add_option("--out", f.out, "output path (default stdout)");
  app->add_option("--format", f.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app->add_option("--threads", f.threads, "sweep concurrency");
  app->add_flag("--timing", f.timing, "fill the wall_ms column");
}

lrk::ExperimentConfig make_config(const Flags& f, const std::string& name) {
  lrk::ExperimentConfig c;
  c.name = name;
  if (!f.config.empty()) c = lrk::load_config(f.config, c);
  if (!name.empty()) c.name = name;
  if (f.nmu) c.n_mu = *f.nmu;
  if (f.neps) c.n_eps = *f.neps;
  if (f.degree) c.k = *f.degree;
  if (f.rank) c.ranks = {*f.rank};
  if (f.dt) c.dt = *f.dt;
  if (f.tfinal) c.tfinal = *f.tfinal;
  if (f.steps) c.steps = *f.steps;
  if (f.seed) c.seed = *f.seed;
  if (f.skip_kstep) c.skip_k_step = true;
  if (!f.out.empty()) c.out = f.out;
  if (!f.format.empty()) c.format = f.format;
  if (f.threads) c.threads = *f.threads;
  if (f.timing) c.record_timing = true;
  return c;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) lrk::raise(lrk::ErrorCode::IoError, "cannot write " + path);
  return os;
}

// rows to CSV (or the summary to JSON); summary and gnuplot script next to a CSV file
void emit(const lrk::ExperimentConfig& c, const lrk::ExperimentResult& res) {
  if (c.out.empty()) {
    if (c.format == "json") lrk::write_json(std::cout, res);
    else lrk::write_csv(std::cout, res.rows);
    return;
  }
  if (c.format == "json") {
    auto os = open_out(c.out);
    lrk::write_json(os, res);
    return;
  }
  {
    auto os = open_out(c.out);
    lrk::write_csv(os, res.rows);
  }
  if (!res.checks.empty() || !res.metrics.empty()) {
    auto js = open_out(c.out + ".summary.json");
    lrk::write_json(js, res);
  }
  auto gp = open_out(c.out + ".gp");
  lrk::write_gnuplot(gp, res, c.out);
}

lrk::ExperimentResult solve_full(const lrk::ExperimentConfig& c) {
  int nmu = c.n_mu > 0 ? c.n_mu : 40, neps = c.n_eps > 0 ? c.n_eps : nmu, k = c.k >= 0 ? c.k : 2;
  double dt = c.dt > 0 ? c.dt : 0.01;
  int steps = c.steps > 0 ? c.steps : (c.tfinal > 0 ? static_cast<int>(std::llround(c.tfinal / dt)) : 100);
  auto sys = lrk::relax::system(nmu, neps, k);
  lrk::Matrix F0 = lrk::project_initial(sys.mesh, lrk::relax::f0, sys.A1);
  lrk::FullRunConfig fc;
  fc.dt = dt;
  fc.n_steps = steps;
  fc.record_every = c.record_every > 0 ? c.record_every : 1;
  fc.exact = lrk::relax::exact;
  lrk::ExperimentResult res;
  res.name = "solve_full";
  for (const auto& rc : lrk::run_full(F0, fc, sys)) {
    lrk::ResultRow r;
    r.experiment = "solve_full";
    r.n_mu = nmu;
    r.n_eps = neps;
    r.k = k;
    r.dt = dt;
    r.step = rc.step;
    r.time = rc.time;
    r.err_exact = rc.err_exact;
    r.err_eq = rc.err_eq;
    r.num_rank = rc.num_rank;
    res.rows.push_back(r);
  }
  return res;
}

lrk::ExperimentResult solve_dlr(const lrk::ExperimentConfig& c) {
  int nmu = c.n_mu > 0 ? c.n_mu : 40, neps = c.n_eps > 0 ? c.n_eps : nmu, k = c.k >= 0 ? c.k : 2;
  int r = c.ranks.empty() ? 3 : c.ranks.front();
  double dt = c.dt > 0 ? c.dt : 0.01;
  int steps = c.steps > 0 ? c.steps : (c.tfinal > 0 ? static_cast<int>(std::llround(c.tfinal / dt)) : 100);
  auto sys = lrk::relax::system(nmu, neps, k);
  auto sq = lrk::matrix_sqrt(sys.A1);
  lrk::Matrix F0 = lrk::project_initial(sys.mesh, lrk::relax::f0, sys.A1);
  lrk::DlrRunConfig dc;
  dc.siui.dt = dt;
  dc.siui.skip_k_step = c.skip_k_step;
  dc.n_steps = steps;
  dc.record_every = c.record_every > 0 ? c.record_every : 1;
  dc.exact = lrk::relax::exact;
  dc.params.r = r;
  lrk::ExperimentResult res;
  res.name = "solve_dlr";
  for (const auto& rc : lrk::run_dlr(lrk::init_low_rank(F0, r, sq), dc, sys, sq)) {
    lrk::ResultRow row;
    row.experiment = "solve_dlr";
    row.n_mu = nmu;
    row.n_eps = neps;
    row.k = k;
    row.r = r;
    row.dt = dt;
    row.step = rc.step;
    row.time = rc.time;
    row.err_exact = rc.err_exact;
    row.err_eq = rc.diag.err_eq;
    row.beta = rc.diag.beta;
    row.e_proj = rc.diag.e_proj;
    row.alpha = rc.diag.alpha;
    res.rows.push_back(row);
  }
  return res;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Low-rank DG solver for the relaxation kinetic model"};
  app.require_subcommand(1);
  Flags f;
  auto* full = app.add_subcommand("solve-full", "full-rank backward Euler run on the reference problem");
  add_flags(full, f);
  auto* dlr = app.add_subcommand("solve-dlr", "semi-implicit unconventional integrator run on the reference problem");
  add_flags(dlr, f);
  auto* exp = app.add_subcommand("experiment", "run a preset experiment");
  std::string exp_name;
  std::string names;
  for (const auto& n : lrk::experiment_names()) names += (names.empty() ? "" : ", ") + n;
  exp->add_option("name", exp_name, "one of: " + names)->required();
  add_flags(exp, f);
  auto* basis = app.add_subcommand("basis-study", "initial-basis condition study");
  std::string case_id;
  basis->add_option("--case", case_id, "a..f, a1..a4")->required();
  add_flags(basis, f);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*full) {
      auto c = make_config(f, "");
      emit(c, solve_full(c));
      return 0;
    }
    if (*dlr) {
      auto c = make_config(f, "");
      emit(c, solve_dlr(c));
      return 0;
    }
    if (*exp || *basis) {
      auto c = make_config(f, *exp ? exp_name : "basis_study");
      if (*basis) c.cases = {case_id};
      auto res = lrk::run_experiment(c);
      emit(c, res);
      for (const auto& ch : res.checks)
        std::cerr << (ch.passed ? "PASS " : "FAIL ") << ch.name << " = " << lrk::format_double(ch.value)
                  << " in [" << lrk::format_double(ch.lo) << ", " << lrk::format_double(ch.hi) << "]"
                  << (ch.note.empty() ? "" : " (" + ch.note + ")") << '\n';
      return res.passed() ? 0 : 2;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
