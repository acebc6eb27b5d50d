#pragma once

#include <Eigen/Dense>
#include <functional>

namespace lrk {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// f(mu, eps)
using PhaseField = std::function<double(double, double)>;
// g(eps)
using EnergyField = std::function<double(double)>;
// f(mu, eps, t)
using TimeField = std::function<double(double, double, double)>;

}  // namespace lrk
