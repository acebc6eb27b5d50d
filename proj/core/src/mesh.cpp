#include "lrk/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <utility>
#include <numbers>
#include <string>

#include "lrk/assembly.hpp"
#include "lrk/block_diag.hpp"
#include "lrk/error.hpp"

namespace lrk {

namespace {

// P_n(x) and P_n'(x)
std::pair<double, double> legendre_with_derivative(int n, double x) {
  double p0 = 1.0, p1 = x;
  for (int j = 2; j <= n; ++j) {
    double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
    p0 = p1;
    p1 = p2;
  }
  return {p1, n * (x * p1 - p0) / (x * x - 1.0)};
}

}  // namespace

GaussRule gauss_legendre(int points) {
  if (points < 1) raise(ErrorCode::InvalidGrid, "quadrature needs at least one point");
  const int n = points;
  GaussRule rule{Vector(n), Vector(n)};
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      auto [p, dp] = legendre_with_derivative(n, x);
      double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double dp = legendre_with_derivative(n, x).second;
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

Vector scaled_legendre(int k, double x) {
  Vector v(k + 1);
  double p0 = 1.0, p1 = x;
  v[0] = 1.0;
  if (k >= 1) v[1] = std::sqrt(3.0) * x;
  for (int j = 2; j <= k; ++j) {
    double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
    p0 = p1;
    p1 = p2;
    v[j] = std::sqrt(2.0 * j + 1.0) * p2;
  }
  return v;
}

namespace {

void check_edges(const std::vector<double>& e, const char* name) {
  if (e.size() < 2) raise(ErrorCode::InvalidGrid, std::string(name) + ": need at least one cell");
  for (std::size_t i = 0; i + 1 < e.size(); ++i) {
    if (!(e[i + 1] > e[i]))
      raise(ErrorCode::InvalidGrid, std::string(name) + ": edges not strictly increasing");
  }
}

std::vector<double> uniform_edges(int cells, double a, double b) {
  std::vector<double> e(cells + 1);
  for (int i = 0; i <= cells; ++i) e[i] = a + (b - a) * i / cells;
  e.back() = b;
  return e;
}

int locate(const std::vector<double>& e, double x, const char* name) {
  if (!(x >= e.front() && x <= e.back()))
    raise(ErrorCode::OutOfDomain, std::string(name) + " = " + std::to_string(x));
  auto it = std::upper_bound(e.begin(), e.end(), x);
  int c = static_cast<int>(it - e.begin()) - 1;
  int last = static_cast<int>(e.size()) - 2;
  return c > last ? last : c;
}

}  // namespace

Mesh::Mesh(std::vector<double> mu_edges, std::vector<double> eps_edges, int k, int quad_order)
    : mu_edges_(std::move(mu_edges)), eps_edges_(std::move(eps_edges)), k_(k) {
  if (k < 0) raise(ErrorCode::InvalidGrid, "negative degree");
  check_edges(mu_edges_, "mu");
  check_edges(eps_edges_, "eps");
  if (std::abs(mu_edges_.front() + 1.0) > 1e-14 || std::abs(mu_edges_.back() - 1.0) > 1e-14)
    raise(ErrorCode::InvalidGrid, "mu edges must span [-1, 1]");
  if (eps_edges_.front() != 0.0) raise(ErrorCode::InvalidGrid, "eps edges must start at 0");
  q_ = quad_order == 0 ? k + 4 : quad_order;
  if (q_ < k + 3) raise(ErrorCode::InvalidGrid, "quad_order must be at least k+3");
  rule_ = gauss_legendre(q_);
  ref_basis_.resize(k + 1, q_);
  for (int j = 0; j < q_; ++j) ref_basis_.col(j) = scaled_legendre(k, rule_.nodes[j]);
}

Mesh Mesh::uniform(int n_mu, int n_eps, int k, double eps_max, int quad_order) {
  if (n_mu < 1 || n_eps < 1) raise(ErrorCode::InvalidGrid, "cell counts must be positive");
  if (!(eps_max > 0.0)) raise(ErrorCode::InvalidGrid, "eps_max must be positive");
  return Mesh(uniform_edges(n_mu, -1.0, 1.0), uniform_edges(n_eps, 0.0, eps_max), k, quad_order);
}

Mesh Mesh::from_edges(std::vector<double> mu_edges, std::vector<double> eps_edges, int k,
                      int quad_order) {
  return Mesh(std::move(mu_edges), std::move(eps_edges), k, quad_order);
}

Mesh build_mesh(int n_mu, int n_eps, int k, double eps_max, int quad_order) {
  return Mesh::uniform(n_mu, n_eps, k, eps_max, quad_order);
}

int Mesh::locate_mu(double mu) const { return locate(mu_edges_, mu, "mu"); }
int Mesh::locate_eps(double eps) const { return locate(eps_edges_, eps, "eps"); }

Vector Mesh::mu_basis(int cell, double mu) const {
  double h = mu_width(cell);
  double xi = 2.0 * (mu - mu_edges_[cell]) / h - 1.0;
  return scaled_legendre(k_, xi) / std::sqrt(h);
}

Vector Mesh::eps_basis(int cell, double eps) const {
  double h = eps_width(cell);
  double xi = 2.0 * (eps - eps_edges_[cell]) / h - 1.0;
  return scaled_legendre(k_, xi) / std::sqrt(h);
}

Matrix weighted_moments(const Mesh& mesh, const PhaseField& f0) {
  const int p = mesh.local_dofs(), q = mesh.quad_order();
  const auto& rule = mesh.rule();
  const Matrix& B = mesh.ref_basis();
  Matrix R = Matrix::Zero(mesh.m(), mesh.n());
  Matrix vals(q, q);
  for (int a = 0; a < mesh.n_mu(); ++a) {
    double ha = mesh.mu_width(a), ma = mesh.mu_edges()[a];
    for (int b = 0; b < mesh.n_eps(); ++b) {
      double hb = mesh.eps_width(b), eb = mesh.eps_edges()[b];
      for (int i = 0; i < q; ++i) {
        double mu = ma + 0.5 * ha * (rule.nodes[i] + 1.0);
        double wi = 0.5 * ha * rule.weights[i];
        for (int j = 0; j < q; ++j) {
          double eps = eb + 0.5 * hb * (rule.nodes[j] + 1.0);
          double wj = 0.5 * hb * rule.weights[j];
          vals(i, j) = f0(mu, eps) * wi * wj * eps * eps;
        }
      }
      R.block(a * p, b * p, p, p) = B * vals * B.transpose() / std::sqrt(ha * hb);
    }
  }
  return R;
}

Matrix project_initial(const Mesh& mesh, const PhaseField& f0, const BlockDiagSPD& A1) {
  if (A1.dim() != mesh.n()) raise(ErrorCode::ShapeMismatch, "A1 does not match mesh");
  return A1.solve_right(weighted_moments(mesh, f0));
}

Matrix project_initial(const Mesh& mesh, const PhaseField& f0) {
  return project_initial(mesh, f0, assemble_weighted_mass(mesh));
}

double eval_dg(const Mesh& mesh, const Matrix& F, double mu, double eps) {
  if (F.rows() != mesh.m() || F.cols() != mesh.n())
    raise(ErrorCode::ShapeMismatch, "coefficient matrix does not match mesh");
  int a = mesh.locate_mu(mu), b = mesh.locate_eps(eps);
  const int p = mesh.local_dofs();
  Vector x = mesh.mu_basis(a, mu), y = mesh.eps_basis(b, eps);
  return x.dot(F.block(a * p, b * p, p, p) * y);
}

}  // namespace lrk
