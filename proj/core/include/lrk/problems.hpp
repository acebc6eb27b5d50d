#pragma once

#include "lrk/assembly.hpp"

namespace lrk::relax {

// chi = 4 + eps^2/2, f_eq = 1/(eps^2+1), eta = chi f_eq, eps in [0,1]
double chi(double eps);
double f_eq(double eps);
double eta(double eps);
double f0(double mu, double eps);
double exact(double mu, double eps, double t);

RelaxationSystem system(int n_mu, int n_eps, int k, int quad_order = 0);

}  // namespace lrk::relax
