#pragma once

#include <vector>

#include "lrk/types.hpp"

namespace lrk {

struct GaussRule {
  Vector nodes;    // on [-1, 1]
  Vector weights;
};

GaussRule gauss_legendre(int points);

// sqrt(2i+1) P_i(x) for i = 0..k, orthonormal on [-1,1] w.r.t. dx/2.
Vector scaled_legendre(int k, double x);

// Tensor DG space on [-1,1] x [0,eps_max]. Dof index = cell*(k+1) + local degree.
class Mesh {
 public:
  static Mesh uniform(int n_mu, int n_eps, int k, double eps_max, int quad_order = 0);
  static Mesh from_edges(std::vector<double> mu_edges, std::vector<double> eps_edges, int k,
                         int quad_order = 0);

  int n_mu() const { return static_cast<int>(mu_edges_.size()) - 1; }
  int n_eps() const { return static_cast<int>(eps_edges_.size()) - 1; }
  int degree() const { return k_; }
  int local_dofs() const { return k_ + 1; }
  int m() const { return n_mu() * local_dofs(); }
  int n() const { return n_eps() * local_dofs(); }
  int quad_order() const { return q_; }
  double eps_max() const { return eps_edges_.back(); }
  double mu_length() const { return mu_edges_.back() - mu_edges_.front(); }

  const std::vector<double>& mu_edges() const { return mu_edges_; }
  const std::vector<double>& eps_edges() const { return eps_edges_; }
  double mu_width(int c) const { return mu_edges_[c + 1] - mu_edges_[c]; }
  double eps_width(int c) const { return eps_edges_[c + 1] - eps_edges_[c]; }

  const GaussRule& rule() const { return rule_; }
  // (k+1) x q, scaled_legendre at the reference nodes
  const Matrix& ref_basis() const { return ref_basis_; }

  // Left-closed cells, last cell closed. Throws OutOfDomain.
  int locate_mu(double mu) const;
  int locate_eps(double eps) const;

  // Values of the k+1 cell basis functions at x inside the given cell.
  Vector mu_basis(int cell, double mu) const;
  Vector eps_basis(int cell, double eps) const;

 private:
  Mesh(std::vector<double> mu_edges, std::vector<double> eps_edges, int k, int quad_order);

  std::vector<double> mu_edges_, eps_edges_;
  int k_ = 0;
  int q_ = 0;
  GaussRule rule_;
  Matrix ref_basis_;
};

Mesh build_mesh(int n_mu, int n_eps, int k, double eps_max, int quad_order = 0);

class BlockDiagSPD;

// Coefficients F0 with F0 A1 = R, R_ij = int f0 x_i y_j eps^2.
Matrix project_initial(const Mesh& mesh, const PhaseField& f0);
Matrix project_initial(const Mesh& mesh, const PhaseField& f0, const BlockDiagSPD& A1);
// R only
Matrix weighted_moments(const Mesh& mesh, const PhaseField& f0);

double eval_dg(const Mesh& mesh, const Matrix& F, double mu, double eps);

}  // namespace lrk
