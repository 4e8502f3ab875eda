#include <algorithm>
#include <cmath>

#include "fbsde/error.hpp"
#include "fbsde/pde_engine.hpp"
#include "stepper.hpp"

namespace fbsde::pde {
namespace {

constexpr double kPicardTol = 1e-10;
constexpr int kPicardMax = 5;

void fill(const cva::CvaParams& p, const std::vector<double>& x, const std::vector<double>& v, Coefficients& out) {
  detail::resize(out, x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    out.a[j] = p.r * x[j];
    out.b[j] = 0.5 * p.sigma * p.sigma * x[j] * x[j];
    out.c[j] = p.mubar() + (v[j] >= 0.0 ? p.h : 0.0);
  }
}

}  // namespace

PdeGrid cva_grid(const cva::CvaParams& p, const CvaGridSpec& spec) {
  p.validate();
  double M = spec.upper_factor * p.S0, m = p.S0 / spec.lower_factor;
  if (!(M > p.K && m < p.K)) throw std::invalid_argument("cva_grid: need m < K < M");
  PdeGrid g = make_grid(m, M, spec.nx, p.T, spec.nt, true);
  double T = p.T, r = p.r, mub = p.mubar(), h = p.h, K = p.K;
  g.upper = BoundaryCondition::dirichlet([=](double t) { return std::exp(-(mub + h) * (T - t)) * (M * std::exp(r * (T - t)) - K); });
  g.lower = BoundaryCondition::dirichlet([=](double t) { return std::exp(-mub * (T - t)) * (m * std::exp(r * (T - t)) - K); });
  return g;
}

Surface solve_nonlinear_cva(const cva::CvaParams& p, const PdeGrid& grid) {
  p.validate();
  grid.validate();
  std::size_t nt = grid.t.size(), nx = grid.x.size();
  detail::Stepper stepper(grid.x);
  Surface out(grid.t, grid.x);
  std::vector<double> v(nx);
  for (std::size_t j = 0; j < nx; ++j) v[j] = grid.x[j] - p.K;
  out.set_slice(nt - 1, v);

  // one theta step with the implicit indicator refreshed until it settles
  Coefficients c_old, c_new;
  std::vector<double> rhs;
  auto step = [&](double theta, double dt, double t_new) {
    fill(p, grid.x, v, c_old);
    c_new = c_old;  // first guess: indicator of the previous level
    stepper.explicit_side(theta, dt, c_old, c_new, v, rhs);
    std::vector<double> guess = stepper.implicit_solve(theta, dt, c_new, rhs, grid.lower, grid.upper, t_new);
    for (int k = 0; k < kPicardMax; ++k) {
      fill(p, grid.x, guess, c_new);
      auto next = stepper.implicit_solve(theta, dt, c_new, rhs, grid.lower, grid.upper, t_new);
      double diff = 0.0;
      for (std::size_t j = 0; j < nx; ++j) diff = std::max(diff, std::abs(next[j] - guess[j]));
      guess = std::move(next);
      if (diff <= kPicardTol) {
        v = std::move(guess);
        return;
      }
    }
    throw NumericalError("solve_nonlinear_cva: Picard refresh did not converge");
  };

  for (std::size_t it = nt - 1; it-- > 0;) {
    double t0 = grid.t[it], t1 = grid.t[it + 1], dt = t1 - t0;
    if (nt - 2 - it < 2) {
      step(1.0, 0.5 * dt, 0.5 * (t0 + t1));
      step(1.0, 0.5 * dt, t0);
    } else {
      step(0.5, dt, t0);
    }
    detail::check_finite(v, "solve_nonlinear_cva");
    out.set_slice(it, v);
  }
  out.finalize();
  return out;
}

double nonlinear_cva_value(const cva::CvaParams& p, const CvaGridSpec& spec) {
  auto s = solve_nonlinear_cva(p, cva_grid(p, spec));
  return s(0.0, p.S0);
}

}  // namespace fbsde::pde
