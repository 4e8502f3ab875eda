#include "fbsde/numerics/ode.hpp"

#include <stdexcept>

#include "fbsde/error.hpp"

namespace fbsde {

std::vector<Eigen::VectorXd> rk4_solve(const VectorField& field, const Eigen::VectorXd& y0,
                                       const std::vector<double>& mesh) {
  if (mesh.empty()) throw std::invalid_argument("rk4_solve: empty mesh");
  for (std::size_t i = 1; i < mesh.size(); ++i) {
    if (!(mesh[i] > mesh[i - 1])) throw std::invalid_argument("rk4_solve: mesh must be strictly increasing");
  }
  std::vector<Eigen::VectorXd> out;
  out.reserve(mesh.size());
  out.push_back(y0);
  Eigen::VectorXd y = y0;
  for (std::size_t i = 1; i < mesh.size(); ++i) {
    double t = mesh[i - 1];
    double h = mesh[i] - t;
    Eigen::VectorXd k1 = field(t, y);
    Eigen::VectorXd k2 = field(t + 0.5 * h, y + 0.5 * h * k1);
    Eigen::VectorXd k3 = field(t + 0.5 * h, y + 0.5 * h * k2);
    Eigen::VectorXd k4 = field(t + h, y + h * k3);
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!y.allFinite()) throw NumericalError("rk4_solve: non-finite state");
    out.push_back(y);
  }
  return out;
}

std::vector<double> uniform_mesh(double t0, double t1, std::size_t n_steps) {
  if (n_steps == 0) throw std::invalid_argument("uniform_mesh: need at least one step");
  std::vector<double> m(n_steps + 1);
  for (std::size_t i = 0; i <= n_steps; ++i) {
    m[i] = t0 + (t1 - t0) * static_cast<double>(i) / static_cast<double>(n_steps);
  }
  m.back() = t1;
  return m;
}

}  // namespace fbsde
