#pragma once

#include <vector>

#include "fbsde/pde_engine.hpp"

namespace fbsde::pde::detail {

// Three-point non-uniform difference weights and one theta-scheme step of
//   v_t + a v_x + b v_xx - c v + G = 0
// backward from level "old" (later time) to level "new" (earlier time).
class Stepper {
 public:
  explicit Stepper(const std::vector<double>& x);

  std::size_t size() const { return x_.size(); }

  //! rhs for the interior: v + (1-theta) dt (L v + G_old) + theta dt G_new
  void explicit_side(double theta, double dt, const Coefficients& old_c, const Coefficients& new_c,
                     const std::vector<double>& v_old, std::vector<double>& rhs) const;

  //! Solves (I - theta dt L_new) v = rhs with the edge conditions at t_new.
  std::vector<double> implicit_solve(double theta, double dt, const Coefficients& new_c, std::vector<double> rhs,
                                     const BoundaryCondition& lower, const BoundaryCondition& upper,
                                     double t_new) const;

 private:
  std::vector<double> x_;
  std::vector<double> d1m_, d1c_, d1p_, d2m_, d2c_, d2p_;
};

Coefficients blend(const Coefficients& a, const Coefficients& b, double w);  // (1-w) a + w b
void resize(Coefficients& c, std::size_t n);
void check_finite(const std::vector<double>& v, const char* what);

}  // namespace fbsde::pde::detail
