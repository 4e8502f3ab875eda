#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace fbsde {

using VectorField = std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)>;

//! Classical fourth-order Runge-Kutta; returns the state at every mesh node.
std::vector<Eigen::VectorXd> rk4_solve(const VectorField& field, const Eigen::VectorXd& y0,
                                       const std::vector<double>& mesh);

std::vector<double> uniform_mesh(double t0, double t1, std::size_t n_steps);

}  // namespace fbsde
