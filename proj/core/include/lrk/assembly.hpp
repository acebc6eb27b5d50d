#pragma once

#include "lrk/block_diag.hpp"
#include "lrk/mesh.hpp"

namespace lrk {

// A_phi with entries int phi(eps) y_i y_j eps^2 over each eps-cell. phi defaults to 1.
BlockDiagSPD assemble_weighted_mass(const Mesh& mesh, const EnergyField& phi = nullptr);

struct MomentVectors {
  Vector L0;     // (1, X) over mu
  Vector L_eta;  // (eta, Y; eps^2) over eps
};

MomentVectors assemble_moments(const Mesh& mesh, const EnergyField& eta);

// L0 L_eta^T - F A_EA
Matrix eval_G(const Matrix& F, const MomentVectors& mom, const BlockDiagSPD& A_EA);
// G(F) E without forming G
Matrix eval_G_times(const Matrix& F, const Matrix& E, const MomentVectors& mom,
                    const BlockDiagSPD& A_EA);
// G(F)^T U without forming G
Matrix eval_GT_times(const Matrix& F, const Matrix& U, const MomentVectors& mom,
                     const BlockDiagSPD& A_EA);

struct EquilibriumFactors {
  Matrix F_eq;
  Vector U_eq;
  Vector E_eq;
  double S_eq = 0.0;
  bool degenerate = false;  // zero emission
};

EquilibriumFactors compute_equilibrium(const Mesh& mesh, const MomentVectors& mom,
                                       const BlockDiagSPD& A1, const BlockDiagSPD& A_EA);

struct ChiBounds {
  double min = 0.0;
  double max = 0.0;
  double ratio() const { return max / min; }
};

// extrema of chi over the eps quadrature nodes
ChiBounds chi_bounds(const Mesh& mesh, const EnergyField& chi);

// ||eps g||_{L2(Omega)} for eps-only g, by quadrature (includes the mu length)
double eps_weighted_norm(const Mesh& mesh, const EnergyField& g);
double eps_weighted_norm(const Mesh& mesh, const PhaseField& f);

// Everything the solvers need for one relaxation model on one mesh.
struct RelaxationSystem {
  Mesh mesh;
  EnergyField chi;
  EnergyField eta;
  BlockDiagSPD A1;
  BlockDiagSPD A_EA;
  MomentVectors mom;
  EquilibriumFactors eq;
  ChiBounds bounds;
  double norm_eps_eta = 0.0;

  static RelaxationSystem build(const Mesh& mesh, EnergyField chi, EnergyField eta);
};

}  // namespace lrk
