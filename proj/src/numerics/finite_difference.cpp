#include "fbsde/numerics/finite_difference.hpp"

#include <algorithm>
#include <stdexcept>

namespace fbsde {

std::vector<double> fd_weights(double x0, const std::vector<double>& nodes, int m) {
  const int n = static_cast<int>(nodes.size()) - 1;
  if (n < m) throw std::invalid_argument("fd_weights: not enough nodes for derivative order");
  std::vector<std::vector<double>> c(nodes.size(), std::vector<double>(m + 1, 0.0));
  double c1 = 1.0;
  double c4 = nodes[0] - x0;
  c[0][0] = 1.0;
  for (int i = 1; i <= n; ++i) {
    int mn = std::min(i, m);
    double c2 = 1.0;
    double c5 = c4;
    c4 = nodes[i] - x0;
    for (int j = 0; j < i; ++j) {
      double c3 = nodes[i] - nodes[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) w[i] = c[i][m];
  return w;
}

std::vector<double> differentiate(const std::vector<double>& x, const std::vector<double>& f, int m) {
  const std::size_t n = x.size();
  if (f.size() != n) throw std::invalid_argument("differentiate: size mismatch");
  if (n < 5) throw std::invalid_argument("differentiate: need at least five nodes");
  std::vector<double> out(n);
  std::vector<double> xs(5);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t lo = i < 2 ? 0 : std::min(i - 2, n - 5);
    for (std::size_t k = 0; k < 5; ++k) xs[k] = x[lo + k];
    auto w = fd_weights(x[i], xs, m);
    double s = 0.0;
    for (std::size_t k = 0; k < 5; ++k) s += w[k] * f[lo + k];
    out[i] = s;
  }
  return out;
}

}  // namespace fbsde
