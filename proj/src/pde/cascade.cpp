#include <cmath>
#include <stdexcept>

#include "fbsde/numerics/finite_difference.hpp"
#include "fbsde/pde_engine.hpp"
#include "stepper.hpp"

namespace fbsde::pde {
namespace {

void require_1d(const ModelSpec& m) {
  m.validate();
  if (m.d != 1 || m.r != 1) throw std::invalid_argument("pde cascade: one-dimensional models only (d = r = 1)");
}

// the cascade always imposes v_xx = 0 at both edges
PdeGrid cascade_grid(const PdeGrid& grid) {
  PdeGrid g = grid;
  g.lower = BoundaryCondition::linear();
  g.upper = BoundaryCondition::linear();
  return g;
}

double drift(const ModelSpec& m, double t, double x) { return m.drift(t, vec1(x))(0); }
double sigma(const ModelSpec& m, double t, double x) { return m.vol(t, vec1(x))(0, 0); }
double theta(const ModelSpec& m, double t, double x) { return m.theta ? m.theta(t, vec1(x))(0) : 0.0; }
double mu(const ModelSpec& m, double t, double x, double v, double z) {
  return m.mu ? m.mu(t, vec1(x), v, vec1(z))(0) : 0.0;
}
double eta(const ModelSpec& m, double t, double x, double v, double z) {
  return m.eta ? m.eta(t, vec1(x), v, vec1(z))(0, 0) : 0.0;
}

// d/ds f(v + s dv, z + s dz) at s = 0
template <class F>
double directional(F&& f, double v, double z, double dv, double dz) {
  double scale = std::abs(dv) + std::abs(dz);
  if (scale == 0.0) return 0.0;
  double s = fd_step(std::abs(v) + std::abs(z)) / scale;
  return (f(v + s * dv, z + s * dz) - f(v - s * dv, z - s * dz)) / (2.0 * s);
}

struct Derivs {
  std::vector<std::vector<double>> dx, dxx;  // per time slice
};

Derivs derivatives(const Surface& v) {
  Derivs d;
  for (std::size_t it = 0; it < v.nt(); ++it) {
    auto s = v.slice(it);
    d.dx.push_back(differentiate(v.x(), s, 1));
    d.dxx.push_back(differentiate(v.x(), s, 2));
  }
  return d;
}

Surface zero_terminal_solve(const ModelSpec& m, const PdeGrid& grid,
                            const std::function<double(std::size_t, std::size_t, double, double)>& source) {
  ParabolicOperator op{[&](std::size_t it, double t, Coefficients& out) {
    detail::resize(out, grid.x.size());
    for (std::size_t j = 0; j < grid.x.size(); ++j) {
      double x = grid.x[j], s = sigma(m, t, x);
      out.a[j] = drift(m, t, x) - theta(m, t, x) * s;
      out.b[j] = 0.5 * s * s;
      out.c[j] = m.eval_c(t, vec1(x));
      out.G[j] = source(it, j, t, x);
    }
  }};
  return solve_linear_parabolic(op, grid, [](double) { return 0.0; });
}

}  // namespace

OrderResult order0(const ModelSpec& m, const PdeGrid& grid_in) {
  require_1d(m);
  PdeGrid grid = cascade_grid(grid_in);
  ParabolicOperator op{[&](std::size_t, double t, Coefficients& out) {
    detail::resize(out, grid.x.size());
    for (std::size_t j = 0; j < grid.x.size(); ++j) {
      double x = grid.x[j], s = sigma(m, t, x);
      out.a[j] = drift(m, t, x) - theta(m, t, x) * s;
      out.b[j] = 0.5 * s * s;
      out.c[j] = m.eval_c(t, vec1(x));
    }
  }};
  OrderResult r;
  r.order = 0;
  r.V = solve_linear_parabolic(op, grid, [&](double x) { return m.payoff(vec1(x)); });
  r.Z = vol_surface(r.V, [&](std::size_t it, std::size_t ix) { return sigma(m, grid.t[it], grid.x[ix]); });
  return r;
}

std::vector<OrderResult> cascade_orders(const ModelSpec& m, const PdeGrid& grid_in, int order) {
  if (order < 0 || order > 2) throw std::invalid_argument("cascade_orders: explicit sources exist for orders 0..2");
  PdeGrid grid = cascade_grid(grid_in);
  std::vector<OrderResult> out;
  out.reserve(3);  // references into `out` are held across push_back
  out.push_back(order0(m, grid));
  if (order == 0) return out;

  const auto& v0 = out[0].V;
  const auto& z0 = out[0].Z;
  auto d0 = derivatives(v0);
  auto x_of = [&](std::size_t j) { return grid.x[j]; };
  // drift feedback with the linear-in-Z driver folded in: mu - theta eta
  auto mu_eff = [&](double t, double x, double v, double z) { return mu(m, t, x, v, z) - theta(m, t, x) * eta(m, t, x, v, z); };

  Surface v1 = zero_terminal_solve(m, grid, [&](std::size_t it, std::size_t j, double t, double x) {
    double v = v0.at(it, j), z = z0.at(it, j);
    return d0.dx[it][j] * mu_eff(t, x, v, z) + d0.dxx[it][j] * sigma(m, t, x) * eta(m, t, x, v, z) +
           m.eval_g(t, vec1(x), v, vec1(z));
  });
  OrderResult r1;
  r1.order = 1;
  r1.V = v1;
  auto d1 = derivatives(v1);
  r1.Z = Surface(grid.t, grid.x);
  for (std::size_t it = 0; it < grid.t.size(); ++it) {
    for (std::size_t j = 0; j < grid.x.size(); ++j) {
      double t = grid.t[it], x = x_of(j);
      r1.Z.at(it, j) = d1.dx[it][j] * sigma(m, t, x) + d0.dx[it][j] * eta(m, t, x, v0.at(it, j), z0.at(it, j));
    }
  }
  r1.Z.finalize();
  out.push_back(r1);
  if (order == 1) return out;

  const auto& z1 = out[1].Z;
  Surface v2 = zero_terminal_solve(m, grid, [&](std::size_t it, std::size_t j, double t, double x) {
    double v = v0.at(it, j), z = z0.at(it, j), dv = v1.at(it, j), dz = z1.at(it, j);
    double s = sigma(m, t, x), e = eta(m, t, x, v, z);
    double D_mu = directional([&](double a, double b) { return mu_eff(t, x, a, b); }, v, z, dv, dz);
    double D_eta = directional([&](double a, double b) { return eta(m, t, x, a, b); }, v, z, dv, dz);
    double D_g = m.eval_dg_dv(t, vec1(x), v, vec1(z)) * dv + m.eval_dg_dz(t, vec1(x), v, vec1(z))(0) * dz;
    return d1.dx[it][j] * mu_eff(t, x, v, z) + d0.dx[it][j] * D_mu + d1.dxx[it][j] * s * e +
           0.5 * d0.dxx[it][j] * e * e + d0.dxx[it][j] * s * D_eta + D_g;
  });
  OrderResult r2;
  r2.order = 2;
  r2.V = v2;
  auto d2 = derivatives(v2);
  r2.Z = Surface(grid.t, grid.x);
  for (std::size_t it = 0; it < grid.t.size(); ++it) {
    for (std::size_t j = 0; j < grid.x.size(); ++j) {
      double t = grid.t[it], x = x_of(j);
      double v = v0.at(it, j), z = z0.at(it, j);
      double D_eta = directional([&](double a, double b) { return eta(m, t, x, a, b); }, v, z, v1.at(it, j), z1.at(it, j));
      r2.Z.at(it, j) = d2.dx[it][j] * sigma(m, t, x) + d1.dx[it][j] * eta(m, t, x, v, z) + d0.dx[it][j] * D_eta;
    }
  }
  r2.Z.finalize();
  out.push_back(r2);
  return out;
}

OrderResult cascade_step(const ModelSpec& m, const OrderResult& prev, const PdeGrid& grid_in) {
  require_1d(m);
  PdeGrid grid = cascade_grid(grid_in);
  if (prev.V.t() != grid.t || prev.V.x() != grid.x || prev.Z.t() != grid.t || prev.Z.x() != grid.x) {
    throw std::invalid_argument("cascade_step: previous order lives on a different grid");
  }
  double eps = m.eps;
  auto gamma = [&](std::size_t it, std::size_t j) {
    double t = grid.t[it], x = grid.x[j];
    return sigma(m, t, x) + eps * eta(m, t, x, prev.V.at(it, j), prev.Z.at(it, j));
  };
  ParabolicOperator op{[&](std::size_t it, double t, Coefficients& out) {
    detail::resize(out, grid.x.size());
    for (std::size_t j = 0; j < grid.x.size(); ++j) {
      double x = grid.x[j], v = prev.V.at(it, j), z = prev.Z.at(it, j);
      double g = gamma(it, j);
      out.a[j] = drift(m, t, x) + eps * mu(m, t, x, v, z) - theta(m, t, x) * g;
      out.b[j] = 0.5 * g * g;
      out.c[j] = m.eval_c(t, vec1(x));
      out.G[j] = eps * m.eval_g(t, vec1(x), v, vec1(z));
    }
  }};
  OrderResult r;
  r.order = prev.order + 1;
  r.V = solve_linear_parabolic(op, grid, [&](double x) { return m.payoff(vec1(x)); });
  r.Z = vol_surface(r.V, gamma);
  return r;
}

std::vector<OrderResult> cascade_master(const ModelSpec& m, const PdeGrid& grid, int order) {
  if (order < 0) throw std::invalid_argument("cascade_master: negative order");
  std::vector<OrderResult> out;
  out.push_back(order0(m, grid));
  for (int i = 1; i <= order; ++i) out.push_back(cascade_step(m, out.back(), grid));
  return out;
}

}  // namespace fbsde::pde
