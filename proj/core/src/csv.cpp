#include <charconv>
#include <cmath>

#include "json.hpp"
#include "lrk/experiments.hpp"

namespace lrk {

const char* kCsvHeader =
    "experiment,case,n_mu,n_eps,k,r,dt,step,time,err_exact,err_eq,num_rank,beta,e_proj,alpha,wall_ms";

std::string format_double(double v) {
  if (!std::isfinite(v)) return {};
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

std::string opt(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }
std::string opt(const std::optional<int>& v) { return v ? std::to_string(*v) : std::string(); }

nlohmann::json num(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

}  // namespace

void write_csv(std::ostream& os, const std::vector<ResultRow>& rows, bool header) {
  if (header) os << kCsvHeader << '\n';
  for (const auto& r : rows) {
    os << r.experiment << ',' << r.case_id << ',' << r.n_mu << ',' << r.n_eps << ',' << r.k << ',' << opt(r.r)
       << ',' << format_double(r.dt) << ',' << r.step << ',' << format_double(r.time) << ',' << opt(r.err_exact)
       << ',' << opt(r.err_eq) << ',' << opt(r.num_rank) << ',' << opt(r.beta) << ',' << opt(r.e_proj) << ','
       << opt(r.alpha) << ',' << opt(r.wall_ms) << '\n';
  }
}

void write_json(std::ostream& os, const ExperimentResult& res) {
  nlohmann::ordered_json j;
  j["experiment"] = res.name;
  j["passed"] = res.passed();
  auto& checks = j["checks"] = nlohmann::ordered_json::array();
  for (const auto& c : res.checks) {
    nlohmann::ordered_json cj;
    cj["name"] = c.name;
    cj["value"] = num(c.value);
    cj["lo"] = num(c.lo);
    cj["hi"] = num(c.hi);
    cj["passed"] = c.passed;
    if (!c.note.empty()) cj["note"] = c.note;
    checks.push_back(cj);
  }
  auto& metrics = j["metrics"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : res.metrics) metrics[k] = num(v);
  auto& labels = j["labels"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : res.labels) labels[k] = v;
  j["rows"] = res.rows.size();
  os << j.dump(2) << '\n';
}

void write_gnuplot(std::ostream& os, const ExperimentResult& res, const std::string& csv_path) {
  os << "# " << res.name << "\n"
     << "set datafile separator ','\n"
     << "set key autotitle columnhead\n"
     << "set logscale y\n"
     << "set format y '%.0e'\n"
     << "set grid\n";
  if (res.name == "convergence_space") {
    os << "set logscale x\nset xlabel 'N'\nset ylabel 'weighted L2 error'\n"
       << "plot '" << csv_path << "' using 3:10 with linespoints title 'err'\n";
  } else if (res.name == "convergence_time") {
    os << "set logscale x\nset xlabel 'dt'\nset ylabel 'weighted L2 error'\n"
       << "plot '" << csv_path << "' using 7:10 with linespoints title 'err'\n";
  } else if (res.name == "rank_evolution") {
    os << "unset logscale y\nset format y '%g'\nset xlabel 't'\nset ylabel 'rank'\n"
       << "plot '" << csv_path << "' using 9:12 with steps title 'numerical rank'\n";
  } else if (res.name == "one_step_decay") {
    os << "set logscale x\nset xlabel 'T'\nset ylabel 'weighted L2 error'\n"
       << "plot '" << csv_path << "' using 9:10 with points title 'err vs exact'\n";
  } else if (res.name == "basis_study") {
    os << "set logscale x\nset xlabel 'T'\nset ylabel 'err_eq'\n"
       << "plot '" << csv_path << "' using ($1 eq 'basis_study_onestep' ? $9 : 1/0):11 with points title 'one step'\n";
  } else {
    os << "set xlabel 'step'\nset ylabel 'err_eq'\n"
       << "plot '" << csv_path << "' using 8:11 with points title 'err_eq'\n";
  }
}

}  // namespace lrk
