#include <cmath>
#include <memory>
#include <stdexcept>

#include "fbsde/coupled.hpp"
#include "fbsde/error.hpp"
#include "fbsde/numerics/finite_difference.hpp"

namespace fbsde::coupled {
namespace {

// value/vol closures that own their surfaces
mc::OrderFunctions functions(std::shared_ptr<const OrderResult> r) {
  return {[r](double t, const Vec& x) { return r->V(t, x(0)); },
          [r](double t, const Vec& x) { return vec1(r->Z(t, x(0))); }};
}

void require_1d(const ModelSpec& m) {
  m.validate();
  if (m.d != 1 || m.r != 1) throw std::invalid_argument("recurse: one-dimensional models only (d = r = 1)");
}

// fraction of frozen paths from the middle of the grid that ever leave its x-range
double exit_fraction(const FrozenModel& fm, const pde::PdeGrid& grid, const McSettings& mc) {
  mc::PathSpec s;
  s.t = grid.t.front();
  s.x = vec1(grid.x[grid.x.size() / 2]);
  s.mesh = mc::euler_mesh(s.t, fm.model.T, mc.steps_per_unit);
  s.n_paths = mc.probe_paths;
  s.seed = mc.seed;
  s.first_stream = std::uint64_t{1} << 40;  // away from the estimator streams
  auto e = mc::simulate(fm.model, s);
  double lo = grid.x.front(), hi = grid.x.back();
  std::size_t out = 0;
  for (std::size_t p = 0; p < e.n_paths; ++p) {
    for (std::size_t k = 0; k < e.mesh.size(); ++k) {
      double x = e.x(p, k)(0);
      if (x < lo || x > hi) {
        ++out;
        break;
      }
    }
  }
  return static_cast<double>(out) / static_cast<double>(e.n_paths);
}

double payoff_slope(const ModelSpec& m, double x) {
  double h = fd_step(x);
  return (m.payoff(vec1(x + h)) - m.payoff(vec1(x - h))) / (2 * h);
}

struct McSurface {
  OrderResult r;
  Surface se;
};

McSurface mc_surface(const FrozenModel& fm, int order, const std::vector<double>& tn, const std::vector<double>& xn,
                     const McSettings& mc) {
  const ModelSpec& m = fm.model;
  McSurface out;
  out.r.order = order;
  out.r.V = Surface(tn, xn);
  out.r.Z = Surface(tn, xn);
  out.se = Surface(tn, xn);
  for (std::size_t it = 0; it < tn.size(); ++it) {
    double t = tn[it];
    for (std::size_t ix = 0; ix < xn.size(); ++ix) {
      Vec x = vec1(xn[ix]);
      if (m.T - t < 1e-12) {
        out.r.V.at(it, ix) = m.payoff(x);
        out.r.Z.at(it, ix) = payoff_slope(m, x(0)) * m.vol(t, x)(0, 0);
        continue;
      }
      mc::PathSpec s;
      s.t = t;
      s.x = x;
      s.mesh = mc::euler_mesh(t, m.T, mc.steps_per_unit);
      s.n_paths = mc.n_paths;
      s.seed = mc.seed;
      auto e = mc::evaluate(m, s, true, fm.source);
      out.r.V.at(it, ix) = e.V.value;
      out.r.Z.at(it, ix) = e.Z[0].value;
      out.se.at(it, ix) = e.V.se;
    }
  }
  out.r.V.finalize();
  out.r.Z.finalize();
  out.se.finalize();
  return out;
}

std::vector<double> mc_x_nodes(const pde::PdeGrid& g, std::size_t nx) {
  double lo = g.x.front(), hi = g.x.back();
  return lo > 0 ? pde::log_nodes(lo, hi, nx - 1) : pde::uniform_nodes(lo, hi, nx - 1);
}

// nullptr: the grid is not wide enough for the frozen dynamics
std::unique_ptr<Recursion> attempt(const ModelSpec& m, const pde::PdeGrid& grid, int order, Engine engine,
                                   const McSettings& mc) {
  auto out = std::make_unique<Recursion>();
  out->grid = grid;
  std::vector<double> tn, xn;
  if (engine == Engine::Mc) {
    tn = pde::uniform_nodes(grid.t.front(), grid.t.back(), mc.nt - 1);
    xn = mc_x_nodes(grid, mc.nx);
  }
  std::shared_ptr<const OrderResult> prev;
  for (int i = 0; i <= order; ++i) {
    FrozenModel fm = prev ? freeze(m, functions(prev)) : freeze(m);
    if (exit_fraction(fm, grid, mc) > mc.max_exit) return nullptr;
    OrderResult r;
    if (engine == Engine::Pde) {
      r = prev ? pde::cascade_step(m, *prev, grid) : pde::order0(m, grid);
    } else {
      auto s = mc_surface(fm, i, tn, xn, mc);
      r = std::move(s.r);
      out->V_se.push_back(std::move(s.se));
    }
    r.order = i;
    if (!r.V.all_finite() || !r.Z.all_finite()) throw NumericalError("recurse: non-finite surface");
    out->orders.push_back(r);
    prev = std::make_shared<const OrderResult>(std::move(r));
  }
  return out;
}

}  // namespace

FrozenModel freeze(const ModelSpec& base) {
  base.validate();
  FrozenModel f;
  f.model = base;
  f.model.g = {};
  f.model.mu = {};
  f.model.eta = {};
  f.model.dg_dv = {};
  f.model.dg_dz = {};
  return f;
}

FrozenModel freeze(const ModelSpec& base, const mc::OrderFunctions& prev) {
  FrozenModel f = freeze(base);
  double eps = base.eps;
  if (eps == 0.0) return f;
  if (base.mu) {
    f.model.drift = [base, prev, eps](double t, const Vec& x) {
      return Vec(base.drift(t, x) + eps * base.mu(t, x, prev.V(t, x), prev.Z(t, x)));
    };
  }
  if (base.eta) {
    f.model.vol = [base, prev, eps](double t, const Vec& x) {
      return Mat(base.vol(t, x) + eps * base.eta(t, x, prev.V(t, x), prev.Z(t, x)));
    };
  }
  if (base.g) {
    f.source = [base, prev, eps](double t, const Vec& x) { return eps * base.g(t, x, prev.V(t, x), prev.Z(t, x)); };
  }
  return f;
}

mc::McResult recursion_step_mc(const ModelSpec& base, const mc::OrderFunctions& prev, const mc::PathSpec& spec) {
  FrozenModel f = freeze(base, prev);
  return mc::evaluate(f.model, spec, true, f.source);
}

pde::PdeGrid widen(const pde::PdeGrid& g, double factor) {
  if (!(factor > 1.0)) throw std::invalid_argument("widen: factor must exceed 1");
  pde::PdeGrid w = g;
  double lo = g.x.front(), hi = g.x.back();
  std::size_t n = g.x.size() - 1;
  if (lo > 0) {
    double c = 0.5 * (std::log(lo) + std::log(hi)), half = 0.5 * factor * (std::log(hi) - std::log(lo));
    w.x = pde::log_nodes(std::exp(c - half), std::exp(c + half), n);
  } else {
    double c = 0.5 * (lo + hi), half = 0.5 * factor * (hi - lo);
    w.x = pde::uniform_nodes(c - half, c + half, n);
  }
  return w;
}

Recursion recurse(const ModelSpec& model, const pde::PdeGrid& grid, int order, Engine engine, const McSettings& mc) {
  require_1d(model);
  grid.validate();
  if (order < 0) throw std::invalid_argument("recurse: negative order");
  if (std::abs(grid.t.back() - model.T) > 1e-12) throw std::invalid_argument("recurse: grid must end at T");
  if (engine == Engine::Mc && (mc.nt < 2 || mc.nx < 4 || mc.n_paths < 1))
    throw std::invalid_argument("recurse: mc surface needs nt >= 2, nx >= 4 and paths");
  if (auto r = attempt(model, grid, order, engine, mc)) return std::move(*r);
  pde::PdeGrid wide = widen(grid);
  if (auto r = attempt(model, wide, order, engine, mc)) {
    r->widened = true;
    return std::move(*r);
  }
  throw NumericalError("recurse: frozen paths leave the grid even after widening it");
}

}  // namespace fbsde::coupled
