#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "fbsde/models/model_spec.hpp"
#include "fbsde/models/surface.hpp"

namespace fbsde::asym {

/*!
 * dX = gamma_0(X, delta) du + gamma_a(X, delta) dW^a with gamma_a(x, 0) = 0 for
 * a >= 1, so delta counts powers of volatility. All x- and delta-derivatives of
 * the coefficients are taken by central differences.
 */
struct DeltaSde {
  int d = 1;
  int r = 1;
  std::function<Vec(const Vec& x, double delta)> drift;  // gamma_0, d-vector
  std::function<Mat(const Vec& x, double delta)> vol;    // gamma_1..r as columns, d x r

  void validate() const;
};

/*!
 * Deterministic expansion objects for one anchor (t, x) on a uniform mesh of
 * [t, T]. Vectors are indexed by mesh node. The covariance of the Gaussian
 * part of D is C(u, s) = Y_u Q_{min(u,s)} Y_s^T with Q the cumulative
 * Ito-isometry kernel.
 */
struct ExpansionTables {
  double t = 0.0;
  Vec x;
  std::vector<double> mesh;
  std::vector<Vec> X0;    // delta = 0 path
  std::vector<Mat> Y;     // first variation along X0
  std::vector<Mat> Yinv;
  std::vector<Vec> Dbar;  // E[dX/d delta]
  std::vector<Mat> Q;
  std::vector<Vec> Ebar;  // E[d^2 X/d delta^2]
  std::vector<Mat> Hbar;  // E[dY/d delta]
  std::vector<Mat> X1;    // E[first delta-coefficient of D_t X_u], d x r
  std::vector<Mat> X2;    // E[second delta-derivative of D_t X_u], d x r

  std::size_t size() const { return mesh.size(); }
  Mat cov(std::size_t u, std::size_t s) const;
  //! E[D_u D_s^T]
  Mat second_moment(std::size_t u, std::size_t s) const;
};

inline constexpr std::size_t kDefaultNodes = 200;

//! Throws std::invalid_argument if gamma_a(., 0) != 0 on the delta = 0 path, NumericalError on blow-up.
ExpansionTables build_tables(const DeltaSde& sde, double t, const Vec& x, double T,
                             std::size_t nodes = kDefaultNodes);

//! c and its x-derivatives at one point.
struct CJet {
  double value = 0.0;
  Vec grad;
  Mat hess;
};

//! G and its x- and delta-derivatives at (x, delta = 0).
struct GJet {
  double value = 0.0;
  Vec grad;
  Mat hess;
  double d = 0.0;  // dG/d delta
  Vec grad_d;      // d^2 G/dx d delta
  double dd = 0.0;
};

struct Discount {
  std::function<double(double s, const Vec& x)> c;  // empty = 0
  std::function<CJet(double s, const Vec& x)> jet;  // optional analytic derivatives
  CJet eval(double s, const Vec& x) const;
};

struct Density {
  std::function<double(double u, const Vec& x, double delta)> G;
  std::function<GJet(double u, const Vec& x)> jet;  // optional analytic derivatives
  bool terminal = false;                           // G sits at u = T only (payoff), no time integral
  GJet eval(double u, const Vec& x) const;
};

//! V = c0 + delta c1 + delta^2 c2 / 2
struct VCoeffs {
  double c0 = 0.0, c1 = 0.0, c2 = 0.0;
  double at(double delta) const { return c0 + delta * c1 + 0.5 * delta * delta * c2; }
};

//! Z = delta c1 + delta^2 c2 / 2 per Brownian column (the delta^0 term vanishes).
struct ZCoeffs {
  Vec c1, c2;
  Vec at(double delta) const { return delta * c1 + 0.5 * delta * delta * c2; }
};

struct Expansion {
  VCoeffs V;
  ZCoeffs Z;
};

Expansion expand(const ExpansionTables& tab, const Discount& disc, const Density& dens);
VCoeffs v_expand(const ExpansionTables& tab, const Discount& disc, const Density& dens);
ZCoeffs z_expand(const ExpansionTables& tab, const Discount& disc, const Density& dens);

/*!
 * Order-i (i <= 2) correction of the epsilon recursion at (t, x) when X follows
 * the delta-SDE: order 0 expands the payoff, higher orders expand the source
 * built from the previous orders' delta-polynomials (composed, then truncated
 * at delta^2). The model supplies c, g and the payoff; its own drift/vol are
 * not used. Cost grows like nodes^(2 order), so order 2 wants a coarse mesh.
 * The source must be C^2 near the delta = 0 path: a driver kink sitting on
 * that path (e.g. v^+ at an at-the-money forward) has no second-order expansion.
 */
Expansion recursion_bridge(const ModelSpec& model, const DeltaSde& sde, int order, double t, const Vec& x,
                           std::size_t nodes = kDefaultNodes);

//! recursion_bridge on a (t, x) grid (d = r = 1), assembled at the given delta.
OrderResult bridge_surface(const ModelSpec& model, const DeltaSde& sde, int order, const std::vector<double>& t,
                           const std::vector<double>& x, double delta, std::size_t nodes = kDefaultNodes);

}  // namespace fbsde::asym
