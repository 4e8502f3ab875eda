#include "fbsde/models/surface.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fbsde/numerics/tridiagonal.hpp"

namespace fbsde {
namespace {

void check_grid(const std::vector<double>& g, const char* what) {
  if (g.empty()) throw std::invalid_argument(std::string("Surface: empty ") + what + " grid");
  for (std::size_t i = 1; i < g.size(); ++i) {
    if (!(g[i] > g[i - 1])) throw std::invalid_argument(std::string("Surface: ") + what + " grid not increasing");
  }
}

// index i with g[i] <= v < g[i+1], clamped to [0, n-2]
std::size_t bracket(const std::vector<double>& g, double v) {
  if (g.size() < 2) return 0;
  auto it = std::upper_bound(g.begin(), g.end(), v);
  std::size_t i = it == g.begin() ? 0 : static_cast<std::size_t>(it - g.begin()) - 1;
  return std::min(i, g.size() - 2);
}

}  // namespace

Surface::Surface(std::vector<double> t, std::vector<double> x)
    : t_(std::move(t)), x_(std::move(x)), v_(t_.size() * x_.size(), 0.0) {
  check_grid(t_, "t");
  check_grid(x_, "x");
}

Surface::Surface(std::vector<double> t, std::vector<double> x, std::vector<double> values)
    : t_(std::move(t)), x_(std::move(x)), v_(std::move(values)) {
  check_grid(t_, "t");
  check_grid(x_, "x");
  if (v_.size() != t_.size() * x_.size()) throw std::invalid_argument("Surface: value count mismatch");
  finalize();
}

std::vector<double> Surface::slice(std::size_t it) const {
  return {v_.begin() + static_cast<std::ptrdiff_t>(it * x_.size()),
          v_.begin() + static_cast<std::ptrdiff_t>((it + 1) * x_.size())};
}

void Surface::set_slice(std::size_t it, const std::vector<double>& s) {
  if (s.size() != x_.size()) throw std::invalid_argument("Surface::set_slice: size mismatch");
  std::copy(s.begin(), s.end(), v_.begin() + static_cast<std::ptrdiff_t>(it * x_.size()));
  ready_ = false;
}

void Surface::finalize() {
  const std::size_t n = x_.size();
  m_.assign(v_.size(), 0.0);
  if (n >= 3) {
    // natural spline: interior rows h_{i-1} m_{i-1} + 2(h_{i-1}+h_i) m_i + h_i m_{i+1} = 6 (slope jump)
    TridiagonalSystem sys;
    sys.diag.resize(n - 2);
    sys.sub.resize(n - 3);
    sys.super.resize(n - 3);
    sys.rhs.resize(n - 2);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      double h0 = x_[i] - x_[i - 1], h1 = x_[i + 1] - x_[i];
      sys.diag[i - 1] = 2.0 * (h0 + h1);
      if (i >= 2) sys.sub[i - 2] = h0;
      if (i + 2 < n) sys.super[i - 1] = h1;
    }
    for (std::size_t it = 0; it < t_.size(); ++it) {
      const double* y = &v_[it * n];
      for (std::size_t i = 1; i + 1 < n; ++i) {
        double h0 = x_[i] - x_[i - 1], h1 = x_[i + 1] - x_[i];
        sys.rhs[i - 1] = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
      }
      auto m = solve_tridiagonal(sys);
      std::copy(m.begin(), m.end(), m_.begin() + static_cast<std::ptrdiff_t>(it * n + 1));
    }
  }
  ready_ = true;
}

double Surface::eval_slice(std::size_t it, double x, int deriv) const {
  const std::size_t n = x_.size();
  const double* y = &v_[it * n];
  const double* m = &m_[it * n];
  if (n == 1) return deriv ? 0.0 : y[0];
  auto slope_at = [&](std::size_t i, bool right_end) {
    std::size_t k = right_end ? i - 1 : i;
    double h = x_[k + 1] - x_[k];
    double s = (y[k + 1] - y[k]) / h;
    return right_end ? s + h * (2.0 * m[k + 1] + m[k]) / 6.0 : s - h * (2.0 * m[k] + m[k + 1]) / 6.0;
  };
  if (x < x_.front()) {
    double s = slope_at(0, false);
    return deriv ? s : y[0] + s * (x - x_.front());
  }
  if (x > x_.back()) {
    double s = slope_at(n - 1, true);
    return deriv ? s : y[n - 1] + s * (x - x_.back());
  }
  std::size_t i = bracket(x_, x);
  double h = x_[i + 1] - x_[i];
  double a = (x_[i + 1] - x) / h;
  double b = (x - x_[i]) / h;
  if (deriv == 0) {
    return a * y[i] + b * y[i + 1] + ((a * a * a - a) * m[i] + (b * b * b - b) * m[i + 1]) * h * h / 6.0;
  }
  return (y[i + 1] - y[i]) / h + ((1.0 - 3.0 * a * a) * m[i] + (3.0 * b * b - 1.0) * m[i + 1]) * h / 6.0;
}

double Surface::operator()(double t, double x) const {
  if (!ready_) throw std::logic_error("Surface: finalize() not called");
  if (t_.size() == 1) return eval_slice(0, x, 0);
  std::size_t j = bracket(t_, t);
  double w = std::clamp((t - t_[j]) / (t_[j + 1] - t_[j]), 0.0, 1.0);
  return (1.0 - w) * eval_slice(j, x, 0) + w * eval_slice(j + 1, x, 0);
}

double Surface::dx(double t, double x) const {
  if (!ready_) throw std::logic_error("Surface: finalize() not called");
  if (t_.size() == 1) return eval_slice(0, x, 1);
  std::size_t j = bracket(t_, t);
  double w = std::clamp((t - t_[j]) / (t_[j + 1] - t_[j]), 0.0, 1.0);
  return (1.0 - w) * eval_slice(j, x, 1) + w * eval_slice(j + 1, x, 1);
}

bool Surface::all_finite() const {
  return std::all_of(v_.begin(), v_.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace fbsde
