#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "fbsde/cva_forward.hpp"
#include "fbsde/models/model_spec.hpp"
#include "fbsde/models/surface.hpp"

namespace fbsde::pde {

//! Dirichlet pins the edge node to value(t); Linear imposes v_xx = 0 there.
struct BoundaryCondition {
  enum class Kind { Dirichlet, Linear };
  Kind kind = Kind::Linear;
  std::function<double(double t)> value;

  static BoundaryCondition dirichlet(std::function<double(double)> fn) { return {Kind::Dirichlet, std::move(fn)}; }
  static BoundaryCondition linear() { return {}; }
};

struct PdeGrid {
  std::vector<double> t;  // increasing, t.front() = start, t.back() = T
  std::vector<double> x;  // increasing, at least 5 nodes
  BoundaryCondition lower;
  BoundaryCondition upper;

  void validate() const;
};

std::vector<double> uniform_nodes(double lo, double hi, std::size_t n_intervals);
std::vector<double> log_nodes(double lo, double hi, std::size_t n_intervals);

//! Log-spaced space nodes on [lo, hi] and uniform time nodes on [0, T].
PdeGrid make_grid(double lo, double hi, std::size_t nx, double T, std::size_t nt, bool log_space = true);

//! Coefficients of  v_t + a v_x + b v_xx - c v + G = 0  on one time slice.
struct Coefficients {
  std::vector<double> a, b, c, G;
};

/*!
 * Fills the coefficients at time index `it` (t = grid.t[it]) for every space
 * node. Coefficients may depend on previously computed surfaces, hence the index.
 */
using CoefficientFn = std::function<void(std::size_t it, double t, Coefficients& out)>;

struct ParabolicOperator {
  CoefficientFn coefficients;
};

using PointFn = std::function<double(double t, double x)>;

//! Operator from pointwise callbacks; empty callbacks mean zero.
ParabolicOperator make_operator(const PdeGrid& grid, PointFn a, PointFn b, PointFn c, PointFn G);

/*!
 * Crank-Nicolson backward in time from the terminal slice, with the first two
 * steps replaced by four implicit half steps. Non-uniform three-point
 * differences in x.
 */
Surface solve_linear_parabolic(const ParabolicOperator& op, const PdeGrid& grid,
                               const std::function<double(double)>& terminal);

//! z = v_x * vol(t, x) on every slice, five-point differences.
Surface vol_surface(const Surface& v, const std::function<double(std::size_t it, std::size_t ix)>& vol);

// -- nonlinear CVA benchmark -------------------------------------------------

struct CvaGridSpec {
  std::size_t nx = 400;
  std::size_t nt = 2000;
  double upper_factor = 8.0;  // M = upper_factor * S0
  double lower_factor = 8.0;  // m = S0 / lower_factor
};

PdeGrid cva_grid(const cva::CvaParams& p, const CvaGridSpec& spec = {});

/*!
 * v_t + r S v_S + sigma^2 S^2 v_SS / 2 - (mubar + h 1{v >= 0}) v = 0, v(T) = S - K,
 * with the deep in/out-of-the-money closed forms pinned at the grid edges.
 * The indicator on the implicit side is refreshed by Picard iteration.
 */
Surface solve_nonlinear_cva(const cva::CvaParams& p, const PdeGrid& grid);
double nonlinear_cva_value(const cva::CvaParams& p, const CvaGridSpec& spec = {});

// -- perturbative cascade for one-dimensional models -------------------------

//! v^(0) with z^(0) = v_x sigma.
OrderResult order0(const ModelSpec& model, const PdeGrid& grid);

/*!
 * Explicit per-order sources G^(1), G^(2); returns the raw orders v^(0..order)
 * (not multiplied by powers of eps). order <= 2.
 */
std::vector<OrderResult> cascade_orders(const ModelSpec& model, const PdeGrid& grid, int order);

/*!
 * One step of the consolidated recursion: from the cumulative v^[i-1], z^[i-1]
 * solve (d_t + L^[i-1] - c) v^[i] + eps g(v^[i-1], z^[i-1]) = 0 and
 * z^[i] = v^[i]_x gamma(v^[i-1], z^[i-1]).
 */
OrderResult cascade_step(const ModelSpec& model, const OrderResult& prev, const PdeGrid& grid);

//! Cumulative v^[0..order] by repeated cascade_step.
std::vector<OrderResult> cascade_master(const ModelSpec& model, const PdeGrid& grid, int order);

//! CSV "t,x,value", row-major in t then x.
std::string surface_csv(const Surface& s);

}  // namespace fbsde::pde
