#include "stepper.hpp"

#include <cmath>
#include <stdexcept>

#include "fbsde/error.hpp"
#include "fbsde/numerics/tridiagonal.hpp"

namespace fbsde::pde::detail {

Stepper::Stepper(const std::vector<double>& x) : x_(x) {
  std::size_t n = x.size();
  d1m_.assign(n, 0.0);
  d1c_.assign(n, 0.0);
  d1p_.assign(n, 0.0);
  d2m_.assign(n, 0.0);
  d2c_.assign(n, 0.0);
  d2p_.assign(n, 0.0);
  for (std::size_t j = 1; j + 1 < n; ++j) {
    double hm = x[j] - x[j - 1], hp = x[j + 1] - x[j], s = hm + hp;
    d1m_[j] = -hp / (hm * s);
    d1c_[j] = (hp - hm) / (hm * hp);
    d1p_[j] = hm / (hp * s);
    d2m_[j] = 2.0 / (hm * s);
    d2c_[j] = -2.0 / (hm * hp);
    d2p_[j] = 2.0 / (hp * s);
  }
}

void Stepper::explicit_side(double theta, double dt, const Coefficients& old_c, const Coefficients& new_c,
                            const std::vector<double>& v_old, std::vector<double>& rhs) const {
  std::size_t n = x_.size();
  rhs.assign(n, 0.0);
  double we = (1.0 - theta) * dt;
  for (std::size_t j = 1; j + 1 < n; ++j) {
    double r = v_old[j] + theta * dt * new_c.G[j];
    if (we != 0.0) {
      double a = old_c.a[j], b = old_c.b[j];
      double lv = (a * d1m_[j] + b * d2m_[j]) * v_old[j - 1] + (a * d1c_[j] + b * d2c_[j] - old_c.c[j]) * v_old[j] +
                  (a * d1p_[j] + b * d2p_[j]) * v_old[j + 1];
      r += we * (lv + old_c.G[j]);
    }
    rhs[j] = r;
  }
}

std::vector<double> Stepper::implicit_solve(double theta, double dt, const Coefficients& cf, std::vector<double> rhs,
                                            const BoundaryCondition& lower, const BoundaryCondition& upper,
                                            double t_new) const {
  std::size_t n = x_.size(), m = n - 2;
  TridiagonalSystem sys;
  sys.sub.assign(m - 1, 0.0);
  sys.diag.assign(m, 0.0);
  sys.super.assign(m - 1, 0.0);
  sys.rhs.assign(m, 0.0);
  double w = theta * dt;
  double lo_edge = 0.0, hi_edge = 0.0;  // coefficients multiplying v_0 and v_{n-1}
  for (std::size_t j = 1; j + 1 < n; ++j) {
    double a = cf.a[j], b = cf.b[j];
    double lo = -w * (a * d1m_[j] + b * d2m_[j]);
    double di = 1.0 - w * (a * d1c_[j] + b * d2c_[j] - cf.c[j]);
    double up = -w * (a * d1p_[j] + b * d2p_[j]);
    std::size_t k = j - 1;
    sys.diag[k] = di;
    sys.rhs[k] = rhs[j];
    if (k > 0) sys.sub[k - 1] = lo;
    else lo_edge = lo;
    if (k + 1 < m) sys.super[k] = up;
    else hi_edge = up;
  }
  double v_lo = 0.0, v_hi = 0.0;
  double rho_lo = (x_[1] - x_[0]) / (x_[2] - x_[1]);
  double rho_hi = (x_[n - 1] - x_[n - 2]) / (x_[n - 2] - x_[n - 3]);
  if (lower.kind == BoundaryCondition::Kind::Dirichlet) {
    v_lo = lower.value(t_new);
    sys.rhs[0] -= lo_edge * v_lo;
  } else {  // v_0 = (1 + rho) v_1 - rho v_2
    sys.diag[0] += lo_edge * (1.0 + rho_lo);
    if (m > 1) sys.super[0] += -lo_edge * rho_lo;
  }
  if (upper.kind == BoundaryCondition::Kind::Dirichlet) {
    v_hi = upper.value(t_new);
    sys.rhs[m - 1] -= hi_edge * v_hi;
  } else {
    sys.diag[m - 1] += hi_edge * (1.0 + rho_hi);
    if (m > 1) sys.sub[m - 2] += -hi_edge * rho_hi;
  }
  auto inner = solve_tridiagonal(sys);
  std::vector<double> v(n);
  for (std::size_t k = 0; k < m; ++k) v[k + 1] = inner[k];
  v[0] = lower.kind == BoundaryCondition::Kind::Dirichlet ? v_lo : (1.0 + rho_lo) * v[1] - rho_lo * v[2];
  v[n - 1] = upper.kind == BoundaryCondition::Kind::Dirichlet ? v_hi : (1.0 + rho_hi) * v[n - 2] - rho_hi * v[n - 3];
  return v;
}

Coefficients blend(const Coefficients& a, const Coefficients& b, double w) {
  Coefficients out;
  auto mix = [w](const std::vector<double>& p, const std::vector<double>& q) {
    std::vector<double> r(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) r[i] = (1.0 - w) * p[i] + w * q[i];
    return r;
  };
  out.a = mix(a.a, b.a);
  out.b = mix(a.b, b.b);
  out.c = mix(a.c, b.c);
  out.G = mix(a.G, b.G);
  return out;
}

void resize(Coefficients& c, std::size_t n) {
  c.a.assign(n, 0.0);
  c.b.assign(n, 0.0);
  c.c.assign(n, 0.0);
  c.G.assign(n, 0.0);
}

void check_finite(const std::vector<double>& v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) throw NumericalError(std::string(what) + ": non-finite value");
  }
}

}  // namespace fbsde::pde::detail
