#include "fbsde/numerics/tridiagonal.hpp"

#include <cmath>
#include <stdexcept>

#include "fbsde/error.hpp"

namespace fbsde {

std::vector<double> solve_tridiagonal(const TridiagonalSystem& sys) {
  const std::size_t n = sys.diag.size();
  if (n == 0 || sys.rhs.size() != n || sys.sub.size() + 1 != n || sys.super.size() + 1 != n) {
    throw std::invalid_argument("solve_tridiagonal: inconsistent band lengths");
  }
  std::vector<double> c(n, 0.0), d(n, 0.0);
  double p = sys.diag[0];
  if (std::abs(p) < 1e-300) throw NumericalError("solve_tridiagonal: singular pivot");
  if (n > 1) c[0] = sys.super[0] / p;
  d[0] = sys.rhs[0] / p;
  for (std::size_t i = 1; i < n; ++i) {
    p = sys.diag[i] - sys.sub[i - 1] * c[i - 1];
    if (std::abs(p) < 1e-300) throw NumericalError("solve_tridiagonal: singular pivot");
    if (i + 1 < n) c[i] = sys.super[i] / p;
    d[i] = (sys.rhs[i] - sys.sub[i - 1] * d[i - 1]) / p;
  }
  std::vector<double> x(n);
  x[n - 1] = d[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) x[i] = d[i] - c[i] * x[i + 1];
  return x;
}

std::vector<double> tridiagonal_multiply(const TridiagonalSystem& sys, const std::vector<double>& x) {
  const std::size_t n = sys.diag.size();
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = sys.diag[i] * x[i];
    if (i > 0) s += sys.sub[i - 1] * x[i - 1];
    if (i + 1 < n) s += sys.super[i] * x[i + 1];
    y[i] = s;
  }
  return y;
}

}  // namespace fbsde
