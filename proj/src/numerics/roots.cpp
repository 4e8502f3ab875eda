#include "fbsde/numerics/roots.hpp"

#include <cmath>
#include <stdexcept>

namespace fbsde {

double bisect_root(const std::function<double(double)>& f, double lo, double hi, double tol) {
  if (!(lo <= hi)) throw std::invalid_argument("bisect_root: lo > hi");
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if (std::signbit(flo) == std::signbit(fhi)) throw std::invalid_argument("bisect_root: interval does not bracket a root");
  while (hi - lo > tol) {
    double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    double fm = f(mid);
    if (fm == 0.0) return mid;
    if (std::signbit(fm) == std::signbit(flo)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace fbsde
