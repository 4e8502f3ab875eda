#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "fbsde/models/model_spec.hpp"
#include "fbsde/models/surface.hpp"

namespace fbsde::mc {

struct Estimate {
  double value = 0.0;
  double se = 0.0;  // standard error
};

//! V and Z (one entry per Brownian component) at the ensemble start.
struct McResult {
  Estimate V;
  std::vector<Estimate> Z;
};

//! Euler mesh on [t, T] with ceil(steps_per_unit (T - t)) steps (at least min_steps).
std::vector<double> euler_mesh(double t, double T, double steps_per_unit = 100.0, std::size_t min_steps = 1);

/*!
 * Where a batch of paths starts and which random numbers it uses. Path p
 * draws from stream first_stream + p; the normal for Brownian component a
 * on mesh step k uses index (step_offset + k) r + a, so a restart from an
 * intermediate mesh node can replay the same increments.
 */
struct PathSpec {
  double t = 0.0;
  Vec x;
  std::vector<double> mesh;  // starts at t
  std::size_t n_paths = 10000;
  std::uint64_t seed = 1;
  std::uint64_t first_stream = 0;
  std::uint64_t step_offset = 0;
};

//! Materialised paths; only for modest sizes (tests, diagnostics).
struct PathEnsemble {
  std::vector<double> mesh;
  std::size_t n_paths = 0;
  int d = 1;
  int r = 1;
  std::uint64_t seed = 0;
  std::vector<Vec> X;   // [path * mesh.size() + k]
  std::vector<Mat> Y;   // first variation Y_{t, t_k}
  std::vector<Vec> dW;  // [path * (mesh.size() - 1) + k]

  const Vec& x(std::size_t p, std::size_t k) const { return X[p * mesh.size() + k]; }
  const Mat& y(std::size_t p, std::size_t k) const { return Y[p * mesh.size() + k]; }
  const Vec& dw(std::size_t p, std::size_t k) const { return dW[p * (mesh.size() - 1) + k]; }
};

//! Euler-Maruyama for X and its first variation Y (finite-difference Jacobians).
PathEnsemble simulate(const ModelSpec& model, const PathSpec& spec);

//! Running source G(u, x) of the linear functional below.
using SourceFn = std::function<double(double u, const Vec& x)>;

/*!
 * V = E[ D(t,T) Phi(X_T) + int_t^T D(t,u) G(u, X_u) du ] with D = exp(-int c) (or the
 * stochastic discount E when the model has theta), and Z = E[ Malliavin derivative ]
 * by the chain rule through Y, plus theta V (E V is the martingale, not V).
 * The building block of every estimator here.
 */
McResult evaluate(const ModelSpec& model, const PathSpec& spec, bool terminal, const SourceFn& source);

//! A terminal payoff (empty: none) plus a running source (empty: none).
struct Functional {
  PayoffFn payoff;
  SourceFn source;
};

//! evaluate for several functionals on the same paths, one pass.
std::vector<McResult> evaluate_many(const ModelSpec& model, const PathSpec& spec, const std::vector<Functional>& fs);

//! Per-path stochastic discount exp(-int (c + |theta|^2/2) - int theta dW) over the full mesh.
std::vector<double> stochastic_discount(const ModelSpec& model, const PathSpec& spec);

//! Order-i value and vol as functions of (t, x), from any source (surfaces, closed forms).
struct OrderFunctions {
  std::function<double(double t, const Vec& x)> V;
  std::function<Vec(double t, const Vec& x)> Z;
};

OrderFunctions from_result(const OrderResult& r);

McResult order0(const ModelSpec& model, const PathSpec& spec);

/*!
 * Order i in {1, 2}: source g(V0, Z0) for i = 1 and dg/dv V1 + dg/dz . Z1 for i = 2,
 * all evaluated at (V0, Z0). prev holds orders 0 .. i-1.
 */
McResult order_i(const ModelSpec& model, const PathSpec& spec, const std::vector<OrderFunctions>& prev, int i);

//! Source of order i as a function of (u, x) (exposed for the coupled engine).
SourceFn order_source(const ModelSpec& model, const std::vector<OrderFunctions>& prev, int i);

struct SurfaceSpec {
  std::vector<double> t;  // node times, last may equal T
  std::vector<double> x;  // node states (d = 1)
  std::size_t n_paths = 4000;
  std::uint64_t seed = 1;
  double steps_per_unit = 100.0;
};

/*!
 * Order-i surfaces (d = r = 1) from restart ensembles launched at every grid
 * node; every node reuses the same streams, so neighbouring nodes share noise.
 */
OrderResult order_surface(const ModelSpec& model, const std::vector<OrderFunctions>& prev, int i,
                          const SurfaceSpec& grid);

struct RegressionSpec {
  std::size_t n_paths = 100000;  // total, split over batches
  std::size_t n_steps = 50;
  int basis_degree = 5;
  std::size_t n_batches = 20;
  std::uint64_t seed = 1;
  double x0 = 0.0;  // start state (d = 1)
};

struct RegressionResult {
  Estimate V0;
  std::vector<int> degrees_used;  // per time step of the first batch
};

/*!
 * Backward regression Monte Carlo for the full nonlinear driver
 * f = -c V - theta Z + eps g on decoupled one-dimensional models, with
 * pathwise (multi-step) responses and one Picard pass per step.
 */
RegressionResult regression_mc(const ModelSpec& model, const RegressionSpec& spec);

}  // namespace fbsde::mc
