#pragma once

namespace fbsde {

struct D12 {
  double d1;
  double d2;
};

//! d1,2 = [ln(F/K) +- v^2/2] / v for total volatility v.
D12 d12(double forward, double strike, double total_vol);

/*!
 * Undiscounted call on the forward S e^{r(T-t)} with variance sigma^2 (u-t):
 *   C(u;t,S) = S e^{r(T-t)} N(d1) - K N(d2).
 * Degenerates to the intrinsic value when u == t or sigma == 0.
 */
double call_like(double u, double t, double S, double K, double r, double sigma, double T);

//! S exp((drift - sigma^2/2) dt + sigma sqrt(dt) z).
double gbm_push(double S, double drift, double sigma, double dt, double z);

//! Discounted Black-Scholes call and its delta (spot S, rate r, maturity tau).
double bs_call(double S, double K, double r, double sigma, double tau);
double bs_call_delta(double S, double K, double r, double sigma, double tau);

}  // namespace fbsde
