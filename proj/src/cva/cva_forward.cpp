#include "fbsde/cva_forward.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fbsde/models/black_scholes.hpp"
#include "fbsde/numerics/parallel.hpp"
#include "fbsde/numerics/special.hpp"

namespace fbsde::cva {
namespace {

// below this the normal tail is irrelevant at double precision
constexpr double kZFloor = -12.0;
constexpr double kZSpan = 10.0;

void check_time(double t, const CvaParams& p) {
  if (t < 0.0 || t > p.T) throw std::invalid_argument("cva: t outside [0, T]");
}

}  // namespace

void CvaParams::validate() const {
  if (!(r > 0 && lambda > 0 && h >= 0 && sigma > 0 && S0 > 0 && T > 0 && K > 0)) {
    throw std::invalid_argument("CvaParams: r, lambda, sigma, S0, T, K must be positive and h >= 0");
  }
}

ValueVol v0_z0(double t, double S, const CvaParams& p) {
  check_time(t, p);
  double tau = p.T - t;
  return {std::exp(-p.mubar() * tau) * (S * std::exp(p.r * tau) - p.K), std::exp(-p.lambda * tau) * p.sigma * S};
}

ValueVol v1_z1(double t, double S, const CvaParams& p, const QuadratureRule& rule) {
  check_time(t, p);
  if (p.h == 0.0 || t == p.T) return {};
  auto q = rule.mapped(t, p.T);
  double F = S * std::exp(p.r * (p.T - t));
  double ic = 0.0, in = 0.0;
  for (std::size_t k = 0; k < q.size(); ++k) {
    double u = q.nodes[k];
    ic += q.weights[k] * call_like(u, t, S, p.K, p.r, p.sigma, p.T);
    double v = p.sigma * std::sqrt(u - t);
    in += q.weights[k] * (v > 0 ? norm_cdf(d12(F, p.K, v).d1) : (F > p.K ? 1.0 : 0.0));
  }
  double tau = p.T - t;
  return {-std::exp(-p.mubar() * tau) * p.h * ic, -std::exp(-p.lambda * tau) * p.h * p.sigma * S * in};
}

ValueVol v1_z1(double t, double S, const CvaParams& p) { return v1_z1(t, S, p, gauss_legendre(64, -1, 1)); }

double v2(double t, double S, const CvaParams& p, const QuadratureRule& time_rule, const QuadratureRule& z_rule) {
  check_time(t, p);
  if (p.h == 0.0 || t == p.T) return 0.0;
  auto qu = time_rule.mapped(t, p.T);
  std::vector<double> partial(qu.size(), 0.0);
  parallel_for(qu.size(), [&](std::size_t k) {
    double u = qu.nodes[k];
    double vol = p.sigma * std::sqrt(u - t);
    double F = S * std::exp(p.r * (p.T - t));
    // V0(u, S_u) >= 0  <=>  z >= -d2(u;t,S)
    double lo = -d12(F, p.K, vol).d2;
    if (lo > -kZFloor) return;  // indicator region carries no mass
    lo = std::max(lo, kZFloor);
    double hi = std::max(lo, 0.0) + kZSpan;
    auto qz = z_rule.mapped(lo, hi);
    auto qs = time_rule.mapped(u, p.T);
    double acc = 0.0;
    for (std::size_t j = 0; j < qz.size(); ++j) {
      double z = qz.nodes[j];
      double Su = gbm_push(S, p.r, p.sigma, u - t, z);
      double inner = 0.0;
      for (std::size_t i = 0; i < qs.size(); ++i) inner += qs.weights[i] * call_like(qs.nodes[i], u, Su, p.K, p.r, p.sigma, p.T);
      acc += qz.weights[j] * norm_pdf(z) * inner;
    }
    partial[k] = qu.weights[k] * acc;
  });
  double sum = 0.0;
  for (double v : partial) sum += v;
  return std::exp(-p.mubar() * (p.T - t)) * p.h * p.h * sum;
}

double v2(double t, double S, const CvaParams& p) {
  auto rule = gauss_legendre(64, -1, 1);
  return v2(t, S, p, rule, rule);
}

std::vector<TermRow> term_structure(const CvaParams& p, const std::vector<double>& maturities) {
  std::vector<TermRow> rows;
  double prev = 0.0;
  for (double T : maturities) {
    if (!(T > prev)) throw std::invalid_argument("term_structure: maturities must be positive and increasing");
    prev = T;
    CvaParams q = p;
    q.T = T;
    q.K = p.S0 * std::exp(p.r * T);
    TermRow row;
    row.T = T;
    row.K = q.K;
    row.V0 = v0_z0(0.0, p.S0, q).value;
    row.V1 = v1_z1(0.0, p.S0, q).value;
    row.V2 = v2(0.0, p.S0, q);
    rows.push_back(row);
  }
  return rows;
}

ModelSpec make_model(const CvaParams& p) {
  double K = p.K, h = p.h;
  ModelSpec m = gbm_model(p.r, p.sigma, p.mubar(), p.T, [K](const Vec& x) { return x(0) - K; });
  m.g = [h](double, const Vec&, double v, const Vec&) { return v >= 0.0 ? -h * v : 0.0; };
  m.dg_dv = [h](double, const Vec&, double v, const Vec&) { return v >= 0.0 ? -h : 0.0; };
  m.dg_dz = [](double, const Vec&, double, const Vec& z) { return Vec(Vec::Zero(z.size())); };
  return m;
}

}  // namespace fbsde::cva
