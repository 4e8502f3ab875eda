#pragma once

#include <functional>

#include <Eigen/Dense>

namespace fbsde {

// State vectors never exceed kMaxDim (the stacked (X0, X1, X2) system of a
// 2-d model is 6-d), so they live on the stack inside Monte Carlo loops.
inline constexpr int kMaxDim = 8;
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, kMaxDim, kMaxDim>;

using ScalarFn = std::function<double(double t, const Vec& x)>;
using VecFn = std::function<Vec(double t, const Vec& x)>;
using MatFn = std::function<Mat(double t, const Vec& x)>;
using DriverFn = std::function<double(double t, const Vec& x, double v, const Vec& z)>;
using DriftFeedbackFn = std::function<Vec(double t, const Vec& x, double v, const Vec& z)>;
using VolFeedbackFn = std::function<Mat(double t, const Vec& x, double v, const Vec& z)>;
using PayoffFn = std::function<double(const Vec& x)>;

/*!
 * FBSDE split into a linear part and epsilon-perturbations:
 *
 *   dX = (r + eps mu) dt + (sigma + eps eta) dW
 *   dV = (c V + theta.Z) dt - eps g dt + Z dW,   V_T = Phi(X_T)
 *
 * Empty g / mu / eta / theta callbacks mean "identically zero".
 */
struct ModelSpec {
  int d = 1;
  int r = 1;
  double T = 1.0;
  double eps = 1.0;

  ScalarFn c;
  VecFn drift;
  MatFn vol;
  DriverFn g;
  DriftFeedbackFn mu;
  VolFeedbackFn eta;
  VecFn theta;
  PayoffFn payoff;

  // Optional analytic partials of g in v and z; finite differences otherwise.
  DriverFn dg_dv;
  DriftFeedbackFn dg_dz;

  bool decoupled() const { return !mu && !eta; }

  //! Throws std::invalid_argument on missing mandatory callbacks or bad sizes.
  void validate() const;

  double eval_c(double t, const Vec& x) const { return c ? c(t, x) : 0.0; }
  double eval_g(double t, const Vec& x, double v, const Vec& z) const { return g ? g(t, x, v, z) : 0.0; }
  double eval_dg_dv(double t, const Vec& x, double v, const Vec& z) const;
  Vec eval_dg_dz(double t, const Vec& x, double v, const Vec& z) const;
  Vec eval_mu(double t, const Vec& x, double v, const Vec& z) const;
  Mat eval_eta(double t, const Vec& x, double v, const Vec& z) const;
};

inline Vec vec1(double x) {
  Vec v(1);
  v(0) = x;
  return v;
}
inline Mat mat1(double x) {
  Mat m(1, 1);
  m(0, 0) = x;
  return m;
}

//! One-dimensional geometric Brownian motion with constant discount.
ModelSpec gbm_model(double drift, double sigma, double discount, double T, PayoffFn payoff);

}  // namespace fbsde
