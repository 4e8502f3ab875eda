#include <cmath>

#include <gtest/gtest.h>

#include "fbsde/cva_forward.hpp"

using namespace fbsde;
using namespace fbsde::cva;

namespace {

CvaParams atm(double T) {
  CvaParams p;
  p.T = T;
  p.K = p.S0 * std::exp(p.r * T);
  return p;
}

}  // namespace

TEST(CvaForward, OrderZeroClosedForm) {
  auto p = atm(1.0);
  EXPECT_NEAR(v0_z0(0.0, 100.0, p).value, 0.0, 1e-12);
  EXPECT_NEAR(v0_z0(1.0, 120.0, p).value, 120.0 - p.K, 1e-12);
  auto p5 = atm(5.0);
  EXPECT_NEAR(v0_z0(0.0, 100.0, p5).vol, std::exp(-0.05) * 20.0, 1e-12);
  EXPECT_NEAR(std::exp(-0.05) * 20.0, 19.0246, 1e-4);
}

TEST(CvaForward, OrderZeroLinearInSpot) {
  auto p = atm(3.0);
  double a = v0_z0(0.5, 80.0, p).value, b = v0_z0(0.5, 100.0, p).value, c = v0_z0(0.5, 120.0, p).value;
  EXPECT_NEAR(b - a, c - b, 1e-12);
  EXPECT_GT(v0_z0(0.5, 80.0, p).vol, 0.0);
}

TEST(CvaForward, OrderOneDegenerateCases) {
  auto p = atm(1.0);
  p.h = 0.0;
  auto r0 = v1_z1(0.0, 100.0, p);
  EXPECT_EQ(r0.value, 0.0);
  EXPECT_EQ(r0.vol, 0.0);
  auto q = atm(1.0);
  auto rT = v1_z1(1.0, 100.0, q);
  EXPECT_EQ(rT.value, 0.0);
  EXPECT_EQ(rT.vol, 0.0);
}

TEST(CvaForward, OrderOneAgainstOracles) {
  // adaptive-quadrature oracle; 2e6-path MC gives -0.157740 +- 1.95e-4.
  // ATM the integrand goes like sqrt(u - t), which caps 64-node Legendre near 1e-6 relative.
  constexpr double rel = 1e-6;
  auto r1 = v1_z1(0.0, 100.0, atm(1.0));
  EXPECT_NEAR(r1.value, -0.1578312753768463, rel * 0.158);
  EXPECT_NEAR(r1.value, -0.15773983384967924, 3 * 1.947047127633748e-4);
  EXPECT_NEAR(r1.vol, -0.3127980776624352, rel * 0.313);
  auto r5 = v1_z1(0.0, 100.0, atm(5.0));
  EXPECT_NEAR(r5.value, -1.688671048183387, rel * 1.69);
  EXPECT_NEAR(r5.vol, -1.5957112415694086, rel * 1.6);
  // away from the money the integrand is smooth and the rule converges
  auto p = atm(1.0);
  p.K = 90.0;
  auto a = v1_z1(0.0, 100.0, p), b = v1_z1(0.0, 100.0, p, gauss_legendre(256, -1, 1));
  EXPECT_NEAR(a.value, b.value, 1e-12);
}

TEST(CvaForward, OrderOneNonPositive) {
  for (double S : {50.0, 90.0, 100.0, 130.0, 250.0}) {
    for (double t : {0.0, 0.4, 0.9}) EXPECT_LE(v1_z1(t, S, atm(1.0)).value, 0.0);
  }
}

TEST(CvaForward, OrderTwoDegenerateCases) {
  auto p = atm(2.0);
  p.h = 0.0;
  EXPECT_EQ(v2(0.0, 100.0, p), 0.0);
  EXPECT_EQ(v2(2.0, 100.0, atm(2.0)), 0.0);
}

TEST(CvaForward, OrderTwoAgainstOracles) {
  // 200^3 Legendre oracle; nested MC (2e6 paths) gives 0.1266275 +- 1.48e-4 at T=5
  EXPECT_NEAR(v2(0.0, 100.0, atm(1.0)), 0.002367469176061512, 1e-8);
  double v5 = v2(0.0, 100.0, atm(5.0));
  EXPECT_NEAR(v5, 0.12665033105265108, 1e-7);
  EXPECT_NEAR(v5, 0.12662749750658, 3 * 1.4840293914497493e-4);
  EXPECT_NEAR(v2(0.0, 100.0, atm(10.0)), 0.6781310627834211, 1e-6);
}

TEST(CvaForward, OrderTwoScalesAsHSquared) {
  auto p = atm(4.0);
  auto q = p;
  q.h = 2 * p.h;
  EXPECT_NEAR(v2(0.0, 100.0, p) / v2(0.0, 100.0, q), 0.25, 1e-14);
}

TEST(CvaForward, OrderTwoNonNegative) {
  for (double S : {40.0, 100.0, 180.0}) EXPECT_GE(v2(0.2, S, atm(2.0)), 0.0);
}

TEST(CvaForward, TermStructureRows) {
  auto p = atm(1.0);
  p.h = 0.0;
  auto rows = term_structure(p, {1.0});
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].T, 1.0);
  EXPECT_NEAR(rows[0].K, 102.0201, 1e-4);
  EXPECT_NEAR(rows[0].V0, 0.0, 1e-12);
  EXPECT_EQ(rows[0].V1, 0.0);
  EXPECT_EQ(rows[0].V2, 0.0);

  auto full = term_structure(atm(1.0), {1, 2, 3, 5, 10});
  for (const auto& r : full) {
    EXPECT_NEAR(r.K, 100.0 * std::exp(0.02 * r.T), 1e-10);
    EXPECT_LT(r.V1, 0.0);
    EXPECT_GT(r.V2, 0.0);
  }
  EXPECT_THROW(term_structure(p, {2.0, 1.0}), std::invalid_argument);
  EXPECT_THROW(term_structure(p, {0.0}), std::invalid_argument);
}

TEST(CvaForward, ModelFactory) {
  auto m = make_model(atm(1.0));
  EXPECT_NO_THROW(m.validate());
  EXPECT_TRUE(m.decoupled());
  Vec x = vec1(100.0), z = vec1(1.0);
  EXPECT_DOUBLE_EQ(m.eval_g(0.0, x, 2.0, z), -0.06);
  EXPECT_DOUBLE_EQ(m.eval_g(0.0, x, -2.0, z), 0.0);
  EXPECT_NEAR(m.payoff(vec1(110.0)), 110.0 - 100.0 * std::exp(0.02), 1e-12);
  EXPECT_DOUBLE_EQ(m.eval_c(0.0, x), 0.03);
}
