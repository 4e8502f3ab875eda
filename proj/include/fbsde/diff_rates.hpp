#pragma once

#include <cstddef>

#include "fbsde/models/model_spec.hpp"

namespace fbsde::diffrates {

// Long call K1, short two calls K2, hedged with lending rate r and borrowing rate R.
struct DiffRatesParams {
  double mu = 0.05;
  double sigma = 0.2;
  double r = 0.01;
  double R = 0.06;
  double T = 0.25;
  double S0 = 100.0;
  double K1 = 95.0;
  double K2 = 105.0;

  double theta() const { return (mu - r) / sigma; }
  void validate() const;
};

struct ValueVol {
  double value = 0.0;
  double vol = 0.0;
};

/*!
 * Node counts per dimension. With `split` the z-integrals are cut at the
 * kink of the (.)^+ term and at the strikes, each piece gets z_nodes
 * Legendre nodes on [-12, 12]; without it a single z_nodes Gauss-Hermite
 * rule is used.
 */
struct Rules {
  std::size_t time_nodes = 64;
  std::size_t z_nodes = 64;
  bool split = true;
};

double payoff(double S, const DiffRatesParams& p);

//! g(v, z) = (R - r)(z/sigma - v)^+ - theta z.
double driver(double v, double z, const DiffRatesParams& p);

ValueVol v0_z0(double t, double S, const DiffRatesParams& p);
ValueVol v1_z1(double t, double S, const DiffRatesParams& p, const Rules& rules = {});
double v2(double t, double S, const DiffRatesParams& p, const Rules& rules = {24, 24, true});

//! The portfolio as a generic decoupled FBSDE under the physical measure.
ModelSpec make_model(const DiffRatesParams& p);

}  // namespace fbsde::diffrates
