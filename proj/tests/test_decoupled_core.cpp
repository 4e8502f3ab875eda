#include <cmath>
#include <stdexcept>

#include <gtest/gtest.h>

#include "fbsde/cva_forward.hpp"
#include "fbsde/decoupled_core.hpp"
#include "fbsde/diff_rates.hpp"
#include "fbsde/models/black_scholes.hpp"
#include "fbsde/numerics/parallel.hpp"
#include "fbsde/pde_engine.hpp"

using namespace fbsde;
using namespace fbsde::mc;

namespace {

PathSpec start(double t, double x, double T, std::size_t n, double steps_per_unit = 100.0) {
  PathSpec s;
  s.t = t;
  s.x = vec1(x);
  s.mesh = euler_mesh(t, T, steps_per_unit);
  s.n_paths = n;
  return s;
}

ModelSpec wiggly() {
  ModelSpec m;
  m.T = 1.0;
  m.drift = [](double, const Vec& x) { return vec1(0.3 * std::sin(x(0))); };
  m.vol = [](double, const Vec& x) { return mat1(0.4 + 0.1 * std::cos(x(0))); };
  m.c = [](double, const Vec&) { return 0.01; };
  m.payoff = [](const Vec& x) { return x(0) * x(0); };
  return m;
}

std::vector<OrderFunctions> cva_order0(const cva::CvaParams& p) {
  return {{[p](double t, const Vec& x) { return cva::v0_z0(t, x(0), p).value; },
           [p](double t, const Vec& x) { return vec1(cva::v0_z0(t, x(0), p).vol); }}};
}

}  // namespace

TEST(DecoupledCore, EulerMesh) {
  auto m = euler_mesh(0.0, 2.5);
  EXPECT_EQ(m.size(), 251u);
  EXPECT_DOUBLE_EQ(m.back(), 2.5);
  EXPECT_EQ(euler_mesh(0.0, 0.001).size(), 2u);
  EXPECT_THROW(euler_mesh(1.0, 1.0), std::invalid_argument);
}

TEST(DecoupledCore, ConstantPaths) {
  ModelSpec m;
  m.drift = [](double, const Vec&) { return vec1(0.0); };
  m.vol = [](double, const Vec&) { return mat1(0.0); };
  m.payoff = [](const Vec& x) { return x(0); };
  auto e = simulate(m, start(0.0, 3.0, 1.0, 16));
  for (std::size_t p = 0; p < e.n_paths; ++p) {
    for (std::size_t k = 0; k < e.mesh.size(); ++k) {
      EXPECT_EQ(e.x(p, k)(0), 3.0);
      EXPECT_EQ(e.y(p, k)(0, 0), 1.0);
    }
  }
}

TEST(DecoupledCore, GbmFirstVariationIsRelativeSpot) {
  auto m = gbm_model(0.02, 0.2, 0.0, 1.0, [](const Vec& x) { return x(0); });
  auto e = simulate(m, start(0.0, 100.0, 1.0, 64));
  for (std::size_t p = 0; p < e.n_paths; ++p) {
    EXPECT_EQ(e.y(p, 0)(0, 0), 1.0);
    for (std::size_t k = 1; k < e.mesh.size(); k += 10) EXPECT_NEAR(e.y(p, k)(0, 0), e.x(p, k)(0) / 100.0, 1e-8);
  }
}

TEST(DecoupledCore, GbmMoments) {
  auto m = gbm_model(0.02, 0.2, 0.0, 1.0, [](const Vec& x) { return x(0); });
  auto r = order0(m, start(0.0, 100.0, 1.0, 100000));
  EXPECT_NEAR(r.V.value, 100.0 * std::exp(0.02), 3 * r.V.se);
  EXPECT_NEAR(r.V.value, 102.02, 3 * r.V.se + 0.01);
  // Z = E[Y_{0,T}] sigma x0 for the identity payoff
  double ey = r.Z[0].value / 20.0, se = r.Z[0].se / 20.0;
  EXPECT_NEAR(ey, std::exp(0.02), 3 * se);
}

TEST(DecoupledCore, UnitPayoffConstantDiscount) {
  auto m = gbm_model(0.02, 0.2, 0.05, 2.0, [](const Vec&) { return 1.0; });
  auto r = order0(m, start(0.5, 100.0, 2.0, 1000));
  EXPECT_NEAR(r.V.value, std::exp(-0.05 * 1.5), 1e-12);
  EXPECT_NEAR(r.Z[0].value, 0.0, 1e-9);
}

TEST(DecoupledCore, CallDeltaFromMalliavinWeights) {
  double r = 0.03, sig = 0.25, K = 105.0;
  auto m = gbm_model(r, sig, r, 1.0, [K](const Vec& x) { return std::max(x(0) - K, 0.0); });
  auto res = order0(m, start(0.0, 100.0, 1.0, 100000));
  EXPECT_NEAR(res.V.value, bs_call(100.0, K, r, sig, 1.0), 3 * res.V.se + 0.02);
  EXPECT_NEAR(res.Z[0].value, sig * 100.0 * bs_call_delta(100.0, K, r, sig, 1.0), 3 * res.Z[0].se + 0.02);
}

TEST(DecoupledCore, CvaOrderZeroMatchesClosedForm) {
  cva::CvaParams p;
  auto m = cva::make_model(p);
  auto r = order0(m, start(0.0, p.S0, p.T, 20000));
  auto c = cva::v0_z0(0.0, p.S0, p);
  EXPECT_NEAR(r.V.value, c.value, 3 * r.V.se);
  EXPECT_NEAR(r.Z[0].value, c.vol, 3 * r.Z[0].se);
}

TEST(DecoupledCore, DiffRatesOrderZero) {
  diffrates::DiffRatesParams p;
  auto r = order0(diffrates::make_model(p), start(0.0, p.S0, p.T, 100000));
  EXPECT_NEAR(r.V.value, 2.7863, 3 * r.V.se);
  EXPECT_NEAR(r.Z[0].value, diffrates::v0_z0(0.0, p.S0, p).vol, 3 * r.Z[0].se);
}

TEST(DecoupledCore, CvaOrderOneMatchesQuadrature) {
  cva::CvaParams p;
  auto m = cva::make_model(p);
  auto r = order_i(m, start(0.0, p.S0, p.T, 20000), cva_order0(p), 1);
  auto c = cva::v1_z1(0.0, p.S0, p);
  EXPECT_NEAR(r.V.value, c.value, 3 * r.V.se);
  EXPECT_NEAR(r.Z[0].value, c.vol, 3 * r.Z[0].se);
}

TEST(DecoupledCore, ZeroDriverGivesZeroCorrections) {
  auto m = gbm_model(0.02, 0.2, 0.02, 1.0, [](const Vec& x) { return x(0); });
  auto prev = cva_order0(cva::CvaParams{});
  auto r = order_i(m, start(0.0, 100.0, 1.0, 512), prev, 1);
  EXPECT_EQ(r.V.value, 0.0);
  EXPECT_EQ(r.Z[0].value, 0.0);
}

TEST(DecoupledCore, OrderArgumentErrors) {
  cva::CvaParams p;
  auto m = cva::make_model(p);
  EXPECT_THROW(order_i(m, start(0.0, 100.0, 1.0, 16), {}, 1), std::invalid_argument);
  EXPECT_THROW(order_i(m, start(0.0, 100.0, 1.0, 16), cva_order0(p), 2), std::invalid_argument);
  EXPECT_THROW(order_i(m, start(0.0, 100.0, 1.0, 16), cva_order0(p), 3), std::invalid_argument);
  auto coupled = m;
  coupled.mu = [](double, const Vec&, double, const Vec&) { return vec1(0.0); };
  EXPECT_THROW(order0(coupled, start(0.0, 100.0, 1.0, 16)), std::invalid_argument);
  auto bad = start(0.0, 100.0, 1.0, 16);
  bad.mesh.front() = 0.1;
  EXPECT_THROW(order0(m, bad), std::invalid_argument);
}

TEST(DecoupledCore, DiscountWithoutThetaIsDeterministic) {
  auto m = gbm_model(0.0, 0.2, 0.02, 1.0, [](const Vec& x) { return x(0); });
  auto d = stochastic_discount(m, start(0.0, 100.0, 1.0, 200));
  for (double v : d) EXPECT_NEAR(v, std::exp(-0.02), 1e-14);
}

TEST(DecoupledCore, DiscountIsExponentialMartingale) {
  auto m = gbm_model(0.0, 0.2, 0.0, 1.0, [](const Vec& x) { return x(0); });
  m.theta = [](double, const Vec&) { return vec1(0.5); };
  auto d = stochastic_discount(m, start(0.0, 100.0, 1.0, 50000));
  double s = 0, s2 = 0;
  for (double v : d) {
    EXPECT_GT(v, 0.0);
    s += v;
    s2 += v * v;
  }
  double n = static_cast<double>(d.size()), mean = s / n, se = std::sqrt((s2 / n - mean * mean) / n);
  EXPECT_NEAR(mean, 1.0, 3 * se);
}

TEST(DecoupledCore, MeasureChangeEquivalence) {
  double r = 0.02, sig = 0.2, th = 0.3, K = 100.0;
  auto call = [K](const Vec& x) { return std::max(x(0) - K, 0.0); };
  auto with_theta = gbm_model(r, sig, r, 1.0, call);
  with_theta.theta = [th](double, const Vec&) { return vec1(th); };
  auto absorbed = gbm_model(r - sig * th, sig, r, 1.0, call);
  auto a = order0(with_theta, start(0.0, 100.0, 1.0, 100000));
  auto b = order0(absorbed, start(0.0, 100.0, 1.0, 100000));
  double se = std::hypot(a.V.se, b.V.se);
  EXPECT_NEAR(a.V.value, b.V.value, 3 * se);
  EXPECT_NEAR(a.Z[0].value, b.Z[0].value, 3 * std::hypot(a.Z[0].se, b.Z[0].se));
}

TEST(DecoupledCore, FirstVariationFlowProperty) {
  auto m = wiggly();
  auto full = start(0.0, 0.7, 1.0, 32);
  auto e = simulate(m, full);
  std::size_t k = 40;
  for (std::size_t p = 0; p < e.n_paths; ++p) {
    PathSpec re;
    re.t = e.mesh[k];
    re.x = e.x(p, k);
    re.mesh.assign(e.mesh.begin() + static_cast<std::ptrdiff_t>(k), e.mesh.end());
    re.n_paths = 1;
    re.first_stream = p;
    re.step_offset = k;
    auto tail = simulate(m, re);
    std::size_t last = tail.mesh.size() - 1;
    EXPECT_NEAR(tail.x(0, last)(0), e.x(p, e.mesh.size() - 1)(0), 1e-12);
    double product = tail.y(0, last)(0, 0) * e.y(p, k)(0, 0);
    EXPECT_NEAR(product, e.y(p, e.mesh.size() - 1)(0, 0), 1e-6);
  }
}

TEST(DecoupledCore, SeedDeterminismAcrossThreadCounts) {
  cva::CvaParams p;
  auto m = cva::make_model(p);
  auto s = start(0.0, p.S0, p.T, 3000);
  std::size_t saved = thread_count();
  set_thread_count(1);
  auto a = order_i(m, s, cva_order0(p), 1);
  set_thread_count(4);
  auto b = order_i(m, s, cva_order0(p), 1);
  set_thread_count(saved);
  EXPECT_EQ(a.V.value, b.V.value);
  EXPECT_EQ(a.V.se, b.V.se);
  EXPECT_EQ(a.Z[0].value, b.Z[0].value);
  auto other = s;
  other.seed = 2;
  EXPECT_NE(order0(m, other).V.value, order0(m, s).V.value);
}

TEST(DecoupledCore, OrderSurfacesFromRestartEnsembles) {
  cva::CvaParams p;
  auto m = cva::make_model(p);
  SurfaceSpec g;
  g.t = {0.0, 0.5, 1.0};
  g.x = {80.0, 100.0, 120.0};
  g.n_paths = 4000;
  auto s0 = order_surface(m, {}, 0, g);
  auto s1 = order_surface(m, cva_order0(p), 1, g);
  for (std::size_t ix = 0; ix < g.x.size(); ++ix) {
    EXPECT_DOUBLE_EQ(s0.V.at(2, ix), g.x[ix] - p.K);
    EXPECT_EQ(s1.V.at(2, ix), 0.0);
    EXPECT_NEAR(s0.Z.at(2, ix), p.sigma * g.x[ix], 1e-6);
  }
  for (std::size_t it = 0; it < 2; ++it) {
    for (std::size_t ix = 0; ix < g.x.size(); ++ix) {
      auto c = cva::v1_z1(g.t[it], g.x[ix], p);
      EXPECT_NEAR(s1.V.at(it, ix), c.value, 0.01 + 0.05 * std::abs(c.value));
    }
  }
  // common random numbers: the same stream set at every node makes the surface smooth in x
  auto f = from_result(s1);
  EXPECT_NEAR(f.V(0.0, vec1(100.0)), s1.V.at(0, 1), 1e-12);
}

TEST(DecoupledCore, RegressionLinearCaseIsBlackScholes) {
  double r = 0.03, sig = 0.2, K = 100.0;
  auto m = gbm_model(r, sig, r, 1.0, [K](const Vec& x) { return std::max(x(0) - K, 0.0); });
  RegressionSpec s;
  s.x0 = 100.0;
  auto res = regression_mc(m, s);
  EXPECT_NEAR(res.V0.value, bs_call(100.0, K, r, sig, 1.0), 3 * res.V0.se + 0.02);
  EXPECT_EQ(res.degrees_used.front(), 0);
  EXPECT_EQ(res.degrees_used.back(), 5);
}

TEST(DecoupledCore, RegressionDiffRatesBenchmark) {
  diffrates::DiffRatesParams p;
  RegressionSpec s;
  s.x0 = p.S0;
  s.n_paths = 1000000;
  auto res = regression_mc(diffrates::make_model(p), s);
  EXPECT_GE(res.V0.value, 2.93);
  EXPECT_LE(res.V0.value, 2.97);
  EXPECT_LE(res.V0.se, 0.02);
}

TEST(DecoupledCore, RegressionCvaMatchesPde) {
  cva::CvaParams p;
  p.K = p.S0 * std::exp(p.r * p.T);
  RegressionSpec s;
  s.x0 = p.S0;
  auto res = regression_mc(cva::make_model(p), s);
  double pde = pde::nonlinear_cva_value(p, {});
  EXPECT_NEAR(res.V0.value, pde, 3 * res.V0.se);
}

TEST(DecoupledCore, RegressionArgumentErrors) {
  auto m = gbm_model(0.0, 0.2, 0.0, 1.0, [](const Vec& x) { return x(0); });
  RegressionSpec s;
  s.x0 = 1.0;
  s.basis_degree = 0;
  EXPECT_THROW(regression_mc(m, s), std::invalid_argument);
  s.basis_degree = 3;
  s.n_batches = 10;
  EXPECT_THROW(regression_mc(m, s), std::invalid_argument);
}

TEST(DecoupledCore, RegressionDegreeReductionOnAtomicStates) {
  // one diffusive step, then the state is snapped onto {0, 2}: only a line can be fitted
  double dt = 0.25;
  ModelSpec m;
  m.T = 1.0;
  m.drift = [dt](double t, const Vec& x) { return vec1(t < 0.5 * dt ? 0.0 : ((x(0) > 1 ? 2.0 : 0.0) - x(0)) / dt); };
  m.vol = [dt](double t, const Vec&) { return mat1(t < 0.5 * dt ? 1.0 : 0.0); };
  m.payoff = [](const Vec& x) { return x(0); };
  RegressionSpec s;
  s.x0 = 1.0;
  s.n_paths = 20000;
  s.n_steps = 4;
  auto res = regression_mc(m, s);
  EXPECT_NEAR(res.V0.value, 1.0, 3 * res.V0.se + 1e-12);
  EXPECT_EQ(res.degrees_used[0], 0);
  EXPECT_EQ(res.degrees_used[1], 5);
  EXPECT_LE(res.degrees_used[2], 1);
  EXPECT_LE(res.degrees_used[3], 1);
}
