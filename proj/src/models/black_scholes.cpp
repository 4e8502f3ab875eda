#include "fbsde/models/black_scholes.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fbsde/numerics/special.hpp"

namespace fbsde {

D12 d12(double forward, double strike, double total_vol) {
  if (!(forward > 0.0) || !(strike > 0.0) || !(total_vol > 0.0)) {
    throw std::invalid_argument("d12: forward, strike and total_vol must be positive");
  }
  double d1 = (std::log(forward / strike) + 0.5 * total_vol * total_vol) / total_vol;
  return {d1, d1 - total_vol};
}

double call_like(double u, double t, double S, double K, double r, double sigma, double T) {
  if (u < t) throw std::invalid_argument("call_like: u < t");
  double F = S * std::exp(r * (T - t));
  double v = sigma * std::sqrt(u - t);
  if (!(v > 0.0)) return std::max(F - K, 0.0);
  auto d = d12(F, K, v);
  return F * norm_cdf(d.d1) - K * norm_cdf(d.d2);
}

double gbm_push(double S, double drift, double sigma, double dt, double z) {
  return S * std::exp((drift - 0.5 * sigma * sigma) * dt + sigma * std::sqrt(dt) * z);
}

double bs_call(double S, double K, double r, double sigma, double tau) {
  return std::exp(-r * tau) * call_like(tau, 0.0, S, K, r, sigma, tau);
}

double bs_call_delta(double S, double K, double r, double sigma, double tau) {
  double v = sigma * std::sqrt(tau);
  double F = S * std::exp(r * tau);
  if (!(v > 0.0)) return F > K ? 1.0 : 0.0;
  return norm_cdf(d12(F, K, v).d1);
}

}  // namespace fbsde
