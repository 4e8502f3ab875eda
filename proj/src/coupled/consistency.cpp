#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "fbsde/coupled.hpp"

namespace fbsde::coupled {
namespace {

mc::Estimate batch_estimate(const std::vector<double>& r) {
  double n = static_cast<double>(r.size()), mean = 0.0, ss = 0.0;
  for (double v : r) mean += v;
  mean /= n;
  for (double v : r) ss += (v - mean) * (v - mean);
  return {std::abs(mean), std::sqrt(ss / (n - 1) / n)};
}

// residual vanished to rounding relative to the value scale
bool is_exact(const mc::Estimate& e, double scale) { return e.value <= 1e-12 * scale && e.se <= 1e-12 * scale; }

struct Verdict {
  double ratio = 0.0;
  std::string text;
};

Verdict judge(const mc::Estimate& prev, const mc::Estimate& cur, double scale, double lo, double hi, bool first) {
  if (is_exact(cur, scale)) return {0.0, "exact"};
  if (first) return {0.0, "-"};
  if (is_exact(prev, scale)) return {0.0, "FAIL"};
  double ratio = prev.value / cur.value;
  if (cur.value < 2 * cur.se || prev.value < 2 * prev.se) return {ratio, "inconclusive"};
  return {ratio, ratio >= lo && ratio <= hi ? "PASS" : "FAIL"};
}

}  // namespace

std::vector<ConsistencyRow> b4_consistency(const ModelSpec& model, const LowerOrders& lower, const mc::PathSpec& spec,
                                           const ConsistencySpec& cs) {
  const auto& eps = cs.eps;
  if (eps.empty()) throw std::invalid_argument("b4_consistency: no eps values");
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!(eps[i] >= 0.0) || (i > 0 && !(eps[i] < eps[i - 1])))
      throw std::invalid_argument("b4_consistency: eps values must be non-negative and decreasing");
  }
  if (cs.n_batches < 2) throw std::invalid_argument("b4_consistency: need at least two batches");
  std::size_t per = spec.n_paths / cs.n_batches;
  if (per < 1) throw std::invalid_argument("b4_consistency: fewer paths than batches");

  std::size_t ne = eps.size(), nb = cs.n_batches;
  std::vector<std::vector<double>> r1(ne, std::vector<double>(nb)), r2 = r1;
  double scale = 0.0;
  for (std::size_t b = 0; b < nb; ++b) {
    mc::PathSpec bs = spec;
    bs.n_paths = per;
    bs.first_stream = spec.first_stream + b * per;
    OrdersAtStart a = appendix_b_orders(model, lower, bs);
    double a0 = a.V[0].value, a1 = a.V[1].value, a2 = a.V[2].value;
    scale = std::max(scale, 1.0 + std::abs(a0));
    for (std::size_t i = 0; i < ne; ++i) {
      double e = eps[i];
      ModelSpec me = model;
      me.eps = e;
      double w1 = recursion_step_mc(me, lower.f0, bs).V.value;
      mc::OrderFunctions prev{
          [&lower, e](double t, const Vec& x) { return lower.f0.V(t, x) + e * lower.f1.V(t, x); },
          [&lower, e](double t, const Vec& x) { return Vec(lower.f0.Z(t, x) + e * lower.f1.Z(t, x)); }};
      double w2 = recursion_step_mc(me, prev, bs).V.value;
      r1[i][b] = w1 - (a0 + e * a1);
      r2[i][b] = w2 - (a0 + e * a1 + e * e * a2);
    }
  }

  std::vector<ConsistencyRow> rows(ne);
  for (std::size_t i = 0; i < ne; ++i) {
    ConsistencyRow& row = rows[i];
    row.eps = eps[i];
    row.delta1 = batch_estimate(r1[i]);
    row.delta2 = batch_estimate(r2[i]);
    const ConsistencyRow& prev = rows[i > 0 ? i - 1 : 0];
    auto v1 = judge(prev.delta1, row.delta1, scale, cs.band1_lo, cs.band1_hi, i == 0);
    auto v2 = judge(prev.delta2, row.delta2, scale, cs.band2_lo, cs.band2_hi, i == 0);
    row.ratio1 = v1.ratio;
    row.verdict1 = v1.text;
    row.ratio2 = v2.ratio;
    row.verdict2 = v2.text;
  }
  return rows;
}

bool consistent(const std::vector<ConsistencyRow>& rows) {
  for (const auto& r : rows) {
    if (r.verdict1 == "FAIL" || r.verdict2 == "FAIL") return false;
  }
  return true;
}

}  // namespace fbsde::coupled
