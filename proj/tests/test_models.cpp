#include <gtest/gtest.h>

#include <cmath>

#include "fbsde/error.hpp"
#include "fbsde/models/black_scholes.hpp"
#include "fbsde/models/config.hpp"
#include "fbsde/models/model_spec.hpp"
#include "fbsde/models/surface.hpp"
#include "fbsde/numerics/quadrature.hpp"
#include "fbsde/numerics/special.hpp"

namespace fbsde {
namespace {

TEST(D12, Examples) {
  auto a = d12(100, 100, 0.2);
  EXPECT_NEAR(a.d1, 0.1, 1e-15);
  EXPECT_NEAR(a.d2, -0.1, 1e-15);
  double F = 100 * std::exp(0.02);
  EXPECT_NEAR(d12(F, F, 0.2).d1, 0.1, 1e-15);
  // mpmath, 30 digits
  auto b = d12(100 * std::exp(0.05 * 0.25), 95, 0.2 * std::sqrt(0.25));
  EXPECT_NEAR(b.d1, 0.687932943875505, 1e-13);
  EXPECT_NEAR(b.d2, 0.587932943875505, 1e-13);
  EXPECT_NEAR(b.d1 - b.d2, 0.1, 1e-15);
  EXPECT_THROW(d12(0, 1, 1), std::invalid_argument);
  EXPECT_THROW(d12(1, -1, 1), std::invalid_argument);
  EXPECT_THROW(d12(1, 1, 0), std::invalid_argument);
}

TEST(CallLike, LimitsAndValue) {
  // u == t and sigma == 0 both collapse to the intrinsic forward value
  EXPECT_NEAR(call_like(0.3, 0.3, 110, 100, 0.02, 0.2, 1.0), 110 * std::exp(0.02 * 0.7) - 100, 1e-12);
  EXPECT_EQ(call_like(0.3, 0.3, 90, 100, 0.02, 0.2, 1.0), 0.0);
  EXPECT_NEAR(call_like(1.0, 0.0, 110, 100, 0.02, 0.0, 1.0), 110 * std::exp(0.02) - 100, 1e-12);
  EXPECT_NEAR(call_like(1.0, 0.0, 100, 100 * std::exp(0.02), 0.02, 0.2, 1.0), 8.126482592078509, 1e-11);
  EXPECT_THROW(call_like(0.1, 0.2, 100, 100, 0.02, 0.2, 1.0), std::invalid_argument);
}

TEST(CallLike, ParitySweep) {
  for (double S : {60.0, 95.0, 100.0, 130.0})
    for (double u : {0.1, 0.5, 1.0})
      for (double K : {80.0, 101.0, 140.0}) {
        double F = S * std::exp(0.03 * (1.0 - 0.0));
        double v = 0.25 * std::sqrt(u);
        auto d = d12(F, K, v);
        double put = K * norm_cdf(-d.d2) - F * norm_cdf(-d.d1);
        EXPECT_NEAR(call_like(u, 0.0, S, K, 0.03, 0.25, 1.0) - (F - K), put, 1e-12 * (1 + F));
      }
}

TEST(GbmPush, Examples) {
  EXPECT_EQ(gbm_push(100, 0.02, 0.2, 0.0, 1.3), 100.0);
  EXPECT_NEAR(gbm_push(100, 0.02, 0.2, 1.0, 0.0), 100.0, 1e-12);
  EXPECT_NEAR(gbm_push(100, 0.05, 0.2, 0.25, 1.0), 111.349086074654, 1e-10);
}

TEST(GbmPush, HermiteMean) {
  auto rule = gauss_hermite_normal(40);
  double m = rule.integrate([](double z) { return gbm_push(100, 0.05, 0.3, 2.0, z); });
  EXPECT_NEAR(m, 100 * std::exp(0.1), 1e-9);
}

TEST(BlackScholes, ReferencePrice) {
  EXPECT_NEAR(bs_call(100, 100, 0.02, 0.2, 1.0), 8.916037278572537, 1e-11);
  double h = 1e-4;
  double fd = (bs_call(100 + h, 100, 0.02, 0.2, 1.0) - bs_call(100 - h, 100, 0.02, 0.2, 1.0)) / (2 * h);
  EXPECT_NEAR(bs_call_delta(100, 100, 0.02, 0.2, 1.0), fd, 1e-8);
}

TEST(ModelSpec, ValidationAndDefaults) {
  ModelSpec m = gbm_model(0.02, 0.2, 0.03, 1.0, [](const Vec& x) { return x(0); });
  EXPECT_NO_THROW(m.validate());
  EXPECT_TRUE(m.decoupled());
  Vec x = vec1(100), z = vec1(3);
  EXPECT_EQ(m.eval_g(0, x, 1, z), 0.0);
  EXPECT_EQ(m.eval_mu(0, x, 1, z)(0), 0.0);
  EXPECT_EQ(m.eval_eta(0, x, 1, z)(0, 0), 0.0);
  m.g = [](double, const Vec&, double v, const Vec& z) { return 3 * v * v + z(0); };
  EXPECT_NEAR(m.eval_dg_dv(0, x, 2, z), 12.0, 1e-8);
  EXPECT_NEAR(m.eval_dg_dz(0, x, 2, z)(0), 1.0, 1e-8);
  ModelSpec bad = m;
  bad.payoff = nullptr;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = m;
  bad.T = 0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(Surface, ReproducesLinearAndCubicInterior) {
  std::vector<double> t{0.0, 0.5, 1.0}, x;
  for (int i = 0; i <= 30; ++i) x.push_back(std::exp(2.0 + 0.1 * i));
  Surface lin(t, x);
  for (std::size_t j = 0; j < t.size(); ++j)
    for (std::size_t i = 0; i < x.size(); ++i) lin.at(j, i) = (1 + t[j]) * x[i] - 5;
  lin.finalize();
  for (double q : {8.0, 20.0, 55.5, 140.0}) {
    EXPECT_NEAR(lin(0.25, q), 1.25 * q - 5, 1e-9);
    EXPECT_NEAR(lin.dx(0.75, q), 1.75, 1e-9);
  }
  // linear continuation outside the grid
  EXPECT_NEAR(lin(1.0, 1.0), 2.0 - 5, 1e-9);
  EXPECT_NEAR(lin(1.0, 1000.0), 2000.0 - 5, 1e-6);

  Surface smooth(t, x);
  for (std::size_t j = 0; j < t.size(); ++j)
    for (std::size_t i = 0; i < x.size(); ++i) smooth.at(j, i) = std::sin(x[i] / 20.0);
  smooth.finalize();
  EXPECT_NEAR(smooth(0.3, 40.0), std::sin(2.0), 2e-4);
  EXPECT_NEAR(smooth.dx(0.3, 40.0), std::cos(2.0) / 20.0, 2e-4);
  EXPECT_TRUE(smooth.covers(40.0));
  EXPECT_FALSE(smooth.covers(1.0));
  EXPECT_TRUE(smooth.all_finite());
}

TEST(ParamFile, ParsesAndRejects) {
  auto pf = ParamFile::parse("# comment\nr = 0.02\n\nsigma=0.2  # trailing\n", model_keys());
  EXPECT_EQ(pf.get("r", 0), 0.02);
  EXPECT_EQ(pf.get("sigma", 0), 0.2);
  EXPECT_EQ(pf.get("h", 0.03), 0.03);
  try {
    ParamFile::parse("r=0.02\nvolatility=0.2\n", model_keys());
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "volatility");
  }
  try {
    ParamFile::parse("sigma=abc\n", model_keys());
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "sigma");
  }
  EXPECT_THROW(ParamFile::parse("r\n", model_keys()), ConfigError);
  EXPECT_THROW(ParamFile::parse("r=1\nr=2\n", model_keys()), ConfigError);
  EXPECT_THROW(ParamFile::parse("T=nan\n", model_keys()), ConfigError);
}

}  // namespace
}  // namespace fbsde
