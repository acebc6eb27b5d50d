#include "lrk/problems.hpp"

#include <cmath>

namespace lrk::relax {

double chi(double eps) { return 4.0 + 0.5 * eps * eps; }
double f_eq(double eps) { return 1.0 / (eps * eps + 1.0); }
double eta(double eps) { return chi(eps) * f_eq(eps); }
double f0(double mu, double eps) { return f_eq(eps) + 1.0 / (mu * mu + eps * eps + 0.5); }
double exact(double mu, double eps, double t) {
  return f_eq(eps) + std::exp(-chi(eps) * t) / (mu * mu + eps * eps + 0.5);
}

RelaxationSystem system(int n_mu, int n_eps, int k, int quad_order) {
  return RelaxationSystem::build(Mesh::uniform(n_mu, n_eps, k, 1.0, quad_order), chi, eta);
}

}  // namespace lrk::relax
