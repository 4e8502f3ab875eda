#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "fbsde/decoupled_core.hpp"
#include "fbsde/models/model_spec.hpp"
#include "fbsde/models/surface.hpp"
#include "fbsde/pde_engine.hpp"

namespace fbsde::coupled {

/*!
 * The order-i problem with v^[i-1], z^[i-1] substituted into g, mu, eta:
 *   dX = (r + eps mu(v, z)) dt + (sigma + eps eta(v, z)) dW
 *   V = E[ D Phi(X_T) + int D eps g(v, z) du ]
 * `model` carries no feedbacks and no g, so it is decoupled and linear; the
 * frozen driver lives in `source`. With no previous order (or eps = 0) the
 * forward coefficients are exactly (r, sigma).
 */
struct FrozenModel {
  ModelSpec model;
  mc::SourceFn source;  // empty when there is nothing to add
};

FrozenModel freeze(const ModelSpec& base);  // order 0
FrozenModel freeze(const ModelSpec& base, const mc::OrderFunctions& prev);

//! One recursion step at a single start point by Monte Carlo.
mc::McResult recursion_step_mc(const ModelSpec& base, const mc::OrderFunctions& prev, const mc::PathSpec& spec);

enum class Engine { Pde, Mc };

struct McSettings {
  std::size_t nt = 5;    // surface nodes in t (uniform on the grid's time range)
  std::size_t nx = 25;   // surface nodes in x (spanning the grid's x range)
  std::size_t n_paths = 2000;
  std::uint64_t seed = 1;
  double steps_per_unit = 50.0;
  std::size_t probe_paths = 512;  // coverage probe from the middle of the grid
  double max_exit = 0.01;         // tolerated fraction of probe paths leaving the grid
};

struct Recursion {
  std::vector<OrderResult> orders;  // cumulative v^[0..order], z^[0..order]
  std::vector<Surface> V_se;        // mc engine: standard error of each V node
  pde::PdeGrid grid;                // the grid actually used
  bool widened = false;
};

/*!
 * v^[0], ..., v^[order] for a one-dimensional model. The pde engine solves
 * each frozen problem with the cascade step; the mc engine evaluates it at
 * every surface node with common random numbers across nodes and orders.
 * If frozen paths from the middle of the grid leave its x-range too often,
 * the range is widened once by 1.5 (log-range when positive) and the
 * recursion restarts; a second failure raises NumericalError.
 */
Recursion recurse(const ModelSpec& model, const pde::PdeGrid& grid, int order, Engine engine,
                  const McSettings& mc = {});

//! Widened copy of a grid: same node counts, range scaled by `factor` about its centre.
pde::PdeGrid widen(const pde::PdeGrid& grid, double factor = 1.5);

// -- second expansion: joint (X0, X1, X2) system ------------------------------

/*!
 * v^(0), z^(0), v^(1), z^(1) as functions of (t, x): the epsilon-coefficients
 * of the value and vol functions. They give V^(0)_t = v0(X0_t) and
 * V^(1)_t = v1(X0_t) + grad v0 . X1_t along the stacked paths.
 */
struct LowerOrders {
  mc::OrderFunctions f0, f1;
};

//! From the one-dimensional pde cascade (surfaces are owned by the closures).
LowerOrders four_step_orders(const ModelSpec& model, const pde::PdeGrid& grid);

/*!
 * State [X0, X1, X2] (3d components) driven by the model's Brownian motion,
 * discounted with c(X0); the k-th payoff and source give V^(k).
 */
struct StackedSystem {
  ModelSpec model;  // payoff = Phi^(0)
  std::array<PayoffFn, 3> payoff;
  std::array<mc::SourceFn, 3> source;  // source[0] is empty
};

StackedSystem stacked_system(const ModelSpec& model, const LowerOrders& lower);

struct OrdersAtStart {
  std::array<mc::Estimate, 3> V;
  std::array<std::vector<mc::Estimate>, 3> Z;
};

/*!
 * V^(k), Z^(k) (k = 0, 1, 2) at spec.t, spec.x by Monte Carlo on the stacked
 * system; Z by the chain rule through its first variation. All three orders
 * use the same paths. Models with theta are rejected.
 */
OrdersAtStart appendix_b_orders(const ModelSpec& model, const LowerOrders& lower, const mc::PathSpec& spec);

// -- consistency between the two expansions ----------------------------------

struct ConsistencyRow {
  double eps = 0.0;
  mc::Estimate delta1;  // |V^[1](eps) - (V0 + eps V1)|
  mc::Estimate delta2;  // |V^[2](eps) - (V0 + eps V1 + eps^2 V2)|
  double ratio1 = 0.0;  // delta(previous eps) / delta(eps); 0 on the first row
  double ratio2 = 0.0;
  std::string verdict1, verdict2;  // PASS, FAIL, exact, inconclusive, -
};

struct ConsistencySpec {
  std::vector<double> eps{1.0, 0.5, 0.25};  // decreasing, non-empty
  std::size_t n_batches = 20;               // residual standard errors from batch means
  double band1_lo = 3.0, band1_hi = 5.5;
  double band2_lo = 6.0, band2_hi = 11.0;
};

/*!
 * Residuals of the recursion against the stacked-system sums at one start
 * point, all on the same paths. V^[2] is driven by v0 + eps v1, which agrees
 * with v^[1] to O(eps^2) and so leaves the eps^2 coefficient unchanged.
 * A ratio is "inconclusive" when either residual is within two standard
 * errors of zero, and "exact" when both residuals vanish to rounding.
 */
std::vector<ConsistencyRow> b4_consistency(const ModelSpec& model, const LowerOrders& lower,
                                           const mc::PathSpec& spec, const ConsistencySpec& cs = {});

//! Whether no row carries FAIL.
bool consistent(const std::vector<ConsistencyRow>& rows);

}  // namespace fbsde::coupled
