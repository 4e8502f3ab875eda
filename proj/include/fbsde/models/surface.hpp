#pragma once

#include <cstddef>
#include <vector>

namespace fbsde {

/*!
 * Values on a rectangular (t, x) grid, stored row-major (t outer). Queries
 * use a natural cubic spline in x on each time slice and linear blending in
 * t; outside the x-range the spline is continued linearly.
 */
class Surface {
 public:
  Surface() = default;
  Surface(std::vector<double> t, std::vector<double> x);
  Surface(std::vector<double> t, std::vector<double> x, std::vector<double> values);

  const std::vector<double>& t() const { return t_; }
  const std::vector<double>& x() const { return x_; }
  std::size_t nt() const { return t_.size(); }
  std::size_t nx() const { return x_.size(); }

  double& at(std::size_t it, std::size_t ix) { return v_[it * x_.size() + ix]; }
  double at(std::size_t it, std::size_t ix) const { return v_[it * x_.size() + ix]; }
  const std::vector<double>& values() const { return v_; }
  std::vector<double> slice(std::size_t it) const;
  void set_slice(std::size_t it, const std::vector<double>& s);

  //! Must be called after editing values through at()/set_slice().
  void finalize();

  double operator()(double t, double x) const;
  double dx(double t, double x) const;

  bool covers(double x) const { return !x_.empty() && x >= x_.front() && x <= x_.back(); }
  bool all_finite() const;

 private:
  double eval_slice(std::size_t it, double x, int deriv) const;

  std::vector<double> t_, x_, v_, m_;  // m_: spline second derivatives
  bool ready_ = false;
};

//! V^(i) and Z^(i) (scalar Brownian component) on a common grid.
struct OrderResult {
  int order = 0;
  Surface V;
  Surface Z;
};

}  // namespace fbsde
