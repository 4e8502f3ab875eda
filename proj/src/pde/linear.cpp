#include <cmath>
#include <stdexcept>

#include "fbsde/error.hpp"
#include "fbsde/numerics/finite_difference.hpp"
#include "fbsde/numerics/format.hpp"
#include "fbsde/pde_engine.hpp"
#include "stepper.hpp"

namespace fbsde::pde {

void PdeGrid::validate() const {
  if (t.size() < 2) throw std::invalid_argument("PdeGrid: need at least two time nodes");
  if (x.size() < 5) throw std::invalid_argument("PdeGrid: need at least five space nodes");
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (!(t[i] > t[i - 1])) throw std::invalid_argument("PdeGrid: time nodes must increase");
  }
  for (std::size_t i = 1; i < x.size(); ++i) {
    if (!(x[i] > x[i - 1])) throw std::invalid_argument("PdeGrid: space nodes must increase");
  }
  for (const auto* bc : {&lower, &upper}) {
    if (bc->kind == BoundaryCondition::Kind::Dirichlet && !bc->value) {
      throw std::invalid_argument("PdeGrid: Dirichlet boundary without a value function");
    }
  }
}

std::vector<double> uniform_nodes(double lo, double hi, std::size_t n) {
  if (n < 1 || !(hi > lo)) throw std::invalid_argument("uniform_nodes: need hi > lo and n >= 1");
  std::vector<double> v(n + 1);
  for (std::size_t i = 0; i <= n; ++i) v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n);
  v[n] = hi;
  return v;
}

std::vector<double> log_nodes(double lo, double hi, std::size_t n) {
  if (!(lo > 0)) throw std::invalid_argument("log_nodes: lower end must be positive");
  auto u = uniform_nodes(std::log(lo), std::log(hi), n);
  for (auto& x : u) x = std::exp(x);
  u.front() = lo;
  u.back() = hi;
  return u;
}

PdeGrid make_grid(double lo, double hi, std::size_t nx, double T, std::size_t nt, bool log_space) {
  PdeGrid g;
  g.x = log_space ? log_nodes(lo, hi, nx) : uniform_nodes(lo, hi, nx);
  g.t = uniform_nodes(0.0, T, nt);
  return g;
}

ParabolicOperator make_operator(const PdeGrid& grid, PointFn a, PointFn b, PointFn c, PointFn G) {
  std::vector<double> x = grid.x;
  return {[x, a, b, c, G](std::size_t, double t, Coefficients& out) {
    detail::resize(out, x.size());
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (a) out.a[j] = a(t, x[j]);
      if (b) out.b[j] = b(t, x[j]);
      if (c) out.c[j] = c(t, x[j]);
      if (G) out.G[j] = G(t, x[j]);
    }
  }};
}

Surface solve_linear_parabolic(const ParabolicOperator& op, const PdeGrid& grid,
                               const std::function<double(double)>& terminal) {
  grid.validate();
  if (!op.coefficients) throw std::invalid_argument("solve_linear_parabolic: operator without coefficients");
  std::size_t nt = grid.t.size(), nx = grid.x.size();
  detail::Stepper stepper(grid.x);
  Surface out(grid.t, grid.x);
  std::vector<double> v(nx);
  for (std::size_t j = 0; j < nx; ++j) v[j] = terminal(grid.x[j]);
  detail::check_finite(v, "solve_linear_parabolic");
  out.set_slice(nt - 1, v);

  Coefficients c_old, c_new;
  op.coefficients(nt - 1, grid.t[nt - 1], c_old);
  std::vector<double> rhs;
  for (std::size_t it = nt - 1; it-- > 0;) {
    double t0 = grid.t[it], t1 = grid.t[it + 1], dt = t1 - t0;
    op.coefficients(it, t0, c_new);
    if (nt - 2 - it < 2) {  // Rannacher start: two implicit half steps
      auto c_mid = detail::blend(c_old, c_new, 0.5);
      double tm = 0.5 * (t0 + t1);
      stepper.explicit_side(1.0, 0.5 * dt, c_old, c_mid, v, rhs);
      v = stepper.implicit_solve(1.0, 0.5 * dt, c_mid, rhs, grid.lower, grid.upper, tm);
      stepper.explicit_side(1.0, 0.5 * dt, c_mid, c_new, v, rhs);
      v = stepper.implicit_solve(1.0, 0.5 * dt, c_new, rhs, grid.lower, grid.upper, t0);
    } else {
      stepper.explicit_side(0.5, dt, c_old, c_new, v, rhs);
      v = stepper.implicit_solve(0.5, dt, c_new, rhs, grid.lower, grid.upper, t0);
    }
    detail::check_finite(v, "solve_linear_parabolic");
    out.set_slice(it, v);
    std::swap(c_old, c_new);
  }
  out.finalize();
  return out;
}

Surface vol_surface(const Surface& v, const std::function<double(std::size_t, std::size_t)>& vol) {
  Surface z(v.t(), v.x());
  for (std::size_t it = 0; it < v.nt(); ++it) {
    auto dv = differentiate(v.x(), v.slice(it), 1);
    for (std::size_t ix = 0; ix < v.nx(); ++ix) z.at(it, ix) = dv[ix] * vol(it, ix);
  }
  z.finalize();
  return z;
}

std::string surface_csv(const Surface& s) {
  std::string out = "t,x,value\n";
  for (std::size_t it = 0; it < s.nt(); ++it) {
    for (std::size_t ix = 0; ix < s.nx(); ++ix) {
      out += format_double(s.t()[it]);
      out += ',';
      out += format_double(s.x()[ix]);
      out += ',';
      out += format_double(s.at(it, ix));
      out += '\n';
    }
  }
  return out;
}

}  // namespace fbsde::pde
