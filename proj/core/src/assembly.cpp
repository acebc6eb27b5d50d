#include "lrk/assembly.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "lrk/error.hpp"

namespace lrk {

namespace {

template <class Fn>
void for_eps_nodes(const Mesh& mesh, Fn&& fn) {
  const auto& rule = mesh.rule();
  for (int b = 0; b < mesh.n_eps(); ++b) {
    double h = mesh.eps_width(b), e0 = mesh.eps_edges()[b];
    for (int j = 0; j < mesh.quad_order(); ++j) {
      double eps = e0 + 0.5 * h * (rule.nodes[j] + 1.0);
      fn(b, j, eps, 0.5 * h * rule.weights[j]);
    }
  }
}

}  // namespace

BlockDiagSPD assemble_weighted_mass(const Mesh& mesh, const EnergyField& phi) {
  const int p = mesh.local_dofs();
  const Matrix& B = mesh.ref_basis();
  std::vector<Matrix> blocks(mesh.n_eps(), Matrix::Zero(p, p));
  for_eps_nodes(mesh, [&](int b, int j, double eps, double w) {
    double v = phi ? phi(eps) : 1.0;
    if (!(v > 0.0)) raise(ErrorCode::NotPositive, "weight not positive at eps = " + std::to_string(eps));
    blocks[b] += (v * w * eps * eps / mesh.eps_width(b)) * B.col(j) * B.col(j).transpose();
  });
  for (auto& blk : blocks) blk = 0.5 * (blk + blk.transpose()).eval();
  try {
    return BlockDiagSPD(std::move(blocks));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::NotSPD) raise(ErrorCode::SingularMass, e.what());
    throw;
  }
}

MomentVectors assemble_moments(const Mesh& mesh, const EnergyField& eta) {
  const int p = mesh.local_dofs();
  MomentVectors mom{Vector::Zero(mesh.m()), Vector::Zero(mesh.n())};
  for (int a = 0; a < mesh.n_mu(); ++a) mom.L0[a * p] = std::sqrt(mesh.mu_width(a));
  const Matrix& B = mesh.ref_basis();
  for_eps_nodes(mesh, [&](int b, int j, double eps, double w) {
    mom.L_eta.segment(b * p, p) +=
        (eta(eps) * w * eps * eps / std::sqrt(mesh.eps_width(b))) * B.col(j);
  });
  return mom;
}

Matrix eval_G(const Matrix& F, const MomentVectors& mom, const BlockDiagSPD& A_EA) {
  if (F.rows() != mom.L0.size() || F.cols() != mom.L_eta.size())
    raise(ErrorCode::ShapeMismatch, "eval_G: F shape");
  Matrix G = mom.L0 * mom.L_eta.transpose();
  G -= A_EA.apply_right(F);
  return G;
}

Matrix eval_G_times(const Matrix& F, const Matrix& E, const MomentVectors& mom,
                    const BlockDiagSPD& A_EA) {
  if (F.rows() != mom.L0.size() || F.cols() != mom.L_eta.size() || E.rows() != F.cols())
    raise(ErrorCode::ShapeMismatch, "eval_G_times: shapes");
  Matrix out = mom.L0 * (mom.L_eta.transpose() * E);
  out.noalias() -= F * A_EA.apply(E);
  return out;
}

Matrix eval_GT_times(const Matrix& F, const Matrix& U, const MomentVectors& mom,
                     const BlockDiagSPD& A_EA) {
  if (F.rows() != mom.L0.size() || F.cols() != mom.L_eta.size() || U.rows() != F.rows())
    raise(ErrorCode::ShapeMismatch, "eval_GT_times: shapes");
  Matrix out = mom.L_eta * (mom.L0.transpose() * U);
  out -= A_EA.apply(F.transpose() * U);
  return out;
}

EquilibriumFactors compute_equilibrium(const Mesh& mesh, const MomentVectors& mom,
                                       const BlockDiagSPD& A1, const BlockDiagSPD& A_EA) {
  EquilibriumFactors eq;
  const int m = mesh.m(), n = mesh.n();
  Vector v = A_EA.solve(mom.L_eta);
  double vnorm = std::sqrt(A1.inner(v, v));
  double l0 = mom.L0.norm();
  if (vnorm == 0.0 || mom.L_eta.lpNorm<Eigen::Infinity>() == 0.0) {
    eq.degenerate = true;
    eq.F_eq = Matrix::Zero(m, n);
    eq.U_eq = Vector::Unit(m, 0);
    Vector e = Vector::Unit(n, 0);
    eq.E_eq = e / std::sqrt(A1.inner(e, e));
    eq.S_eq = 0.0;
    return eq;
  }
  eq.U_eq = mom.L0 / l0;
  eq.E_eq = v / vnorm;
  eq.S_eq = l0 * vnorm;
  eq.F_eq = mom.L0 * v.transpose();
  return eq;
}

ChiBounds chi_bounds(const Mesh& mesh, const EnergyField& chi) {
  ChiBounds cb{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for_eps_nodes(mesh, [&](int, int, double eps, double) {
    double c = chi(eps);
    cb.min = std::min(cb.min, c);
    cb.max = std::max(cb.max, c);
  });
  return cb;
}

double eps_weighted_norm(const Mesh& mesh, const EnergyField& g) {
  double s = 0.0;
  for_eps_nodes(mesh, [&](int, int, double eps, double w) {
    double v = g(eps);
    s += w * v * v * eps * eps;
  });
  return std::sqrt(mesh.mu_length() * s);
}

double eps_weighted_norm(const Mesh& mesh, const PhaseField& f) {
  const auto& rule = mesh.rule();
  double s = 0.0;
  for (int a = 0; a < mesh.n_mu(); ++a) {
    double h = mesh.mu_width(a), m0 = mesh.mu_edges()[a];
    for (int i = 0; i < mesh.quad_order(); ++i) {
      double mu = m0 + 0.5 * h * (rule.nodes[i] + 1.0);
      double wi = 0.5 * h * rule.weights[i];
      for_eps_nodes(mesh, [&](int, int, double eps, double w) {
        double v = f(mu, eps);
        s += wi * w * v * v * eps * eps;
      });
    }
  }
  return std::sqrt(s);
}

RelaxationSystem RelaxationSystem::build(const Mesh& mesh, EnergyField chi, EnergyField eta) {
  BlockDiagSPD A1 = assemble_weighted_mass(mesh);
  BlockDiagSPD A_EA = assemble_weighted_mass(mesh, chi);
  MomentVectors mom = assemble_moments(mesh, eta);
  EquilibriumFactors eq = compute_equilibrium(mesh, mom, A1, A_EA);
  ChiBounds cb = chi_bounds(mesh, chi);
  double ne = eps_weighted_norm(mesh, eta);
  return RelaxationSystem{mesh,          std::move(chi), std::move(eta), std::move(A1),
                          std::move(A_EA), std::move(mom), std::move(eq), cb, ne};
}

}  // namespace lrk
