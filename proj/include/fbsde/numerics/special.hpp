#pragma once

#include <cmath>
#include <numbers>

namespace fbsde {

inline double norm_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

// Standard normal CDF through erfc, which stays accurate in the far left tail
// where 1 + erf(x) would cancel.
inline double norm_cdf(double x) {
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

}  // namespace fbsde
