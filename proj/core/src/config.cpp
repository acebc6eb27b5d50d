#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "lrk/error.hpp"
#include "lrk/experiments.hpp"

namespace lrk {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  // accepts a/b fractions such as 1/80
  auto slash = v.find('/');
  try {
    std::size_t pos = 0;
    if (slash != std::string::npos) {
      double a = std::stod(v.substr(0, slash)), b = std::stod(v.substr(slash + 1));
      return a / b;
    }
    double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    raise(ErrorCode::ConfigError, key + ": not a number: '" + v + "'");
  }
}

long long to_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    long long x = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    raise(ErrorCode::ConfigError, key + ": not an integer: '" + v + "'");
  }
}

bool to_bool(const std::string& key, std::string v) {
  std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  raise(ErrorCode::ConfigError, key + ": not a boolean: '" + v + "'");
}

void apply(ExperimentConfig& c, const std::string& section, const std::string& key, const std::string& v) {
  const std::string where = section.empty() ? key : section + "." + key;
  if (section == "mesh") {
    if (key == "n_mu" || key == "nmu") c.n_mu = static_cast<int>(to_int(where, v));
    else if (key == "n_eps" || key == "neps") c.n_eps = static_cast<int>(to_int(where, v));
    else if (key == "degree" || key == "k") c.k = static_cast<int>(to_int(where, v));
    else if (key == "n_list") {
      c.n_list.clear();
      for (auto& s : split_list(v)) c.n_list.push_back(static_cast<int>(to_int(where, s)));
    } else raise(ErrorCode::ConfigError, "unknown key " + where);
  } else if (section == "run") {
    if (key == "experiment") c.name = v;
    else if (key == "rank" || key == "ranks") {
      c.ranks.clear();
      for (auto& s : split_list(v)) c.ranks.push_back(static_cast<int>(to_int(where, s)));
    } else if (key == "dt") c.dt = to_double(where, v);
    else if (key == "dt_list") {
      c.dt_list.clear();
      for (auto& s : split_list(v)) c.dt_list.push_back(to_double(where, s));
    } else if (key == "tfinal") c.tfinal = to_double(where, v);
    else if (key == "t_list") {
      c.t_list.clear();
      for (auto& s : split_list(v)) c.t_list.push_back(to_double(where, s));
    } else if (key == "steps") c.steps = static_cast<int>(to_int(where, v));
    else if (key == "record_every") c.record_every = static_cast<int>(to_int(where, v));
    else if (key == "seed") c.seed = static_cast<std::uint64_t>(to_int(where, v));
    else if (key == "skip_kstep") c.skip_k_step = to_bool(where, v);
    else if (key == "case" || key == "cases") c.cases = split_list(v);
    else if (key == "repetitions") c.repetitions = static_cast<int>(to_int(where, v));
    else if (key == "threads") c.threads = static_cast<int>(to_int(where, v));
    else raise(ErrorCode::ConfigError, "unknown key " + where);
  } else if (section == "output") {
    if (key == "out" || key == "path") c.out = v;
    else if (key == "format") {
      if (v != "csv" && v != "json") raise(ErrorCode::ConfigError, where + ": expected csv or json");
      c.format = v;
    } else if (key == "timing") c.record_timing = to_bool(where, v);
    else raise(ErrorCode::ConfigError, "unknown key " + where);
  } else {
    raise(ErrorCode::ConfigError, "key outside a known section: " + where);
  }
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, ExperimentConfig base) {
  std::stringstream ss(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') raise(ErrorCode::ConfigError, "line " + std::to_string(lineno) + ": bad section");
      section = trim(line.substr(1, line.size() - 2));
      if (section != "mesh" && section != "run" && section != "output")
        raise(ErrorCode::ConfigError, "unknown section [" + section + "]");
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) raise(ErrorCode::ConfigError, "line " + std::to_string(lineno) + ": expected key = value");
    apply(base, section, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return base;
}

ExperimentConfig load_config(const std::string& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) raise(ErrorCode::IoError, "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

}  // namespace lrk
