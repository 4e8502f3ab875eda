#pragma once

#include <vector>

#include "fbsde/models/model_spec.hpp"
#include "fbsde/numerics/quadrature.hpp"

namespace fbsde::cva {

// Forward agreement S_T - K with bilateral default: discount mubar = r + lambda,
// extra intensity h charged while the contract value is positive.
struct CvaParams {
  double r = 0.02;
  double lambda = 0.01;
  double h = 0.03;
  double sigma = 0.2;
  double S0 = 100.0;
  double K = 100.0;
  double T = 1.0;

  double mubar() const { return r + lambda; }
  void validate() const;
};

struct ValueVol {
  double value = 0.0;
  double vol = 0.0;
};

ValueVol v0_z0(double t, double S, const CvaParams& p);

//! First order; `rule` is any Gauss-Legendre rule, re-mapped onto [t, T].
ValueVol v1_z1(double t, double S, const CvaParams& p, const QuadratureRule& rule);
ValueVol v1_z1(double t, double S, const CvaParams& p);  // 64 nodes

/*!
 * Second order: time_rule is re-mapped onto [t,T] (outer u) and [u,T]
 * (inner s); z_rule onto [-d2(u;t,S), max(-d2, 0) + 10].
 */
double v2(double t, double S, const CvaParams& p, const QuadratureRule& time_rule, const QuadratureRule& z_rule);
double v2(double t, double S, const CvaParams& p);  // 64 x 64 x 64

struct TermRow {
  double T = 0.0;
  double K = 0.0;
  double V0 = 0.0;
  double V1 = 0.0;
  double V2 = 0.0;
};

//! Rows at t = 0 with the strike reset to S0 e^{rT} for every maturity.
std::vector<TermRow> term_structure(const CvaParams& p, const std::vector<double>& maturities);

//! The contract as a generic one-factor FBSDE (g = -h v 1{v >= 0}).
ModelSpec make_model(const CvaParams& p);

}  // namespace fbsde::cva
