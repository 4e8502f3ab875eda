#include "fbsde/diff_rates.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "fbsde/models/black_scholes.hpp"
#include "fbsde/numerics/parallel.hpp"
#include "fbsde/numerics/quadrature.hpp"
#include "fbsde/numerics/roots.hpp"
#include "fbsde/numerics/special.hpp"

namespace fbsde::diffrates {
namespace {

constexpr double kZMax = 10.0;
// fixed cuts keep every Legendre piece short relative to the Gaussian scale
constexpr std::array<double, 7> kBaseCuts{-kZMax, -5.0, -2.5, 0.0, 2.5, 5.0, kZMax};

// Order-zero data at (S, tau): g(V0, Z0) undiscounted and the sign-carrying
// K1 N(d2(K1)) - 2 K2 N(d2(K2)) (a positive multiple of Z0/sigma - V0).
struct Kernel {
  double kink;
  double g;
};

Kernel kernel(double S, double tau, const DiffRatesParams& p) {
  double F = S * std::exp(p.mu * tau);
  double vol = p.sigma * std::sqrt(tau);
  auto a = d12(F, p.K1, vol), b = d12(F, p.K2, vol);
  double kink = p.K1 * norm_cdf(a.d2) - 2 * p.K2 * norm_cdf(b.d2);
  double spread = norm_cdf(a.d1) - 2 * norm_cdf(b.d1);
  return {kink, (p.R - p.r) * std::max(kink, 0.0) - (p.mu - p.r) * F * spread};
}

double push(double S, double h, double z, const DiffRatesParams& p) { return gbm_push(S, p.mu, p.sigma, h, z); }

double z_of(double target, double S, double h, const DiffRatesParams& p) {
  double z = (std::log(target / S) - (p.mu - 0.5 * p.sigma * p.sigma) * h) / (p.sigma * std::sqrt(h));
  return std::clamp(z, -kZMax, kZMax);
}

// z where the kink expression of S_{t+h}(S, z) at remaining time tau changes sign
double kink_root(double S, double h, double tau, const DiffRatesParams& p) {
  auto f = [&](double z) { return kernel(push(S, h, z, p), tau, p).kink; };
  double flo = f(-kZMax), fhi = f(kZMax);
  if (flo >= 0 && fhi >= 0) return kZMax;
  if (flo < 0 && fhi < 0) return -kZMax;
  return bisect_root(f, -kZMax, kZMax, 1e-13);
}

// sorted breakpoints: the base cuts plus `extra` (already clamped to the range)
template <std::size_t N>
std::array<double, kBaseCuts.size() + N> with_cuts(const std::array<double, N>& extra) {
  std::array<double, kBaseCuts.size() + N> cuts{};
  std::copy(kBaseCuts.begin(), kBaseCuts.end(), cuts.begin());
  std::copy(extra.begin(), extra.end(), cuts.begin() + kBaseCuts.size());
  std::sort(cuts.begin(), cuts.end());
  return cuts;
}

// (E[f(z)], E[z f(z)]) over z ~ N(0,1), Legendre `ref` on each piece between cuts
template <class C, class F>
std::pair<double, double> split_moments(const QuadratureRule& ref, const C& cuts, F&& f) {
  double ev = 0.0, ez = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    double lo = cuts[k], hi = cuts[k + 1];
    if (hi - lo < 1e-14) continue;
    double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
    for (std::size_t i = 0; i < ref.size(); ++i) {
      double z = mid + half * ref.nodes[i];
      double wv = half * ref.weights[i] * norm_pdf(z) * f(z);
      ev += wv;
      ez += z * wv;
    }
  }
  return {ev, ez};
}

struct Quad {
  Rules rules;
  QuadratureRule time;  // on [-1, 1]
  QuadratureRule z;     // Legendre on [-1, 1] or Hermite-normal

  explicit Quad(const Rules& r)
      : rules(r),
        time(gauss_legendre(r.time_nodes, -1, 1)),
        z(r.split ? gauss_legendre(r.z_nodes, -1, 1) : gauss_hermite_normal(r.z_nodes)) {}

  // (E[f(z)], E[z f(z)]) for the kernel at S_{t+h}(S, z), split at kink and strikes
  template <class F>
  std::pair<double, double> expect2(double S, double h, double tau, const DiffRatesParams& p, F&& f) const {
    if (!rules.split) {
      double ev = 0.0, ez = 0.0;
      for (std::size_t i = 0; i < z.size(); ++i) {
        double v = f(z.nodes[i]);
        ev += z.weights[i] * v;
        ez += z.weights[i] * z.nodes[i] * v;
      }
      return {ev, ez};
    }
    auto cuts = with_cuts(std::array<double, 3>{kink_root(S, h, tau, p), z_of(p.K1, S, h, p), z_of(p.K2, S, h, p)});
    return split_moments(z, cuts, f);
  }
};

// u = t + (T - t)(3w^2 - 2w^3): the kernels carry sqrt(u - t) and sqrt(T - u)
// endpoint behaviour, which this map makes smooth in w
struct TimeNode {
  double u;
  double w;
};

TimeNode time_node(double t, double T, const QuadratureRule& ref, std::size_t k) {
  double w = 0.5 * (ref.nodes[k] + 1.0);
  return {t + (T - t) * w * w * (3.0 - 2.0 * w), 0.5 * ref.weights[k] * 6.0 * (T - t) * w * (1.0 - w)};
}

// Undiscounted time integrals of E[g] and E[sigma S dg/dS] over [t, T]. The
// latter uses sigma S d/dS E[g(S_u)] = E[z g(S_u)] / sqrt(u - t), which avoids the
// strike-concentrated density terms of the differentiated kernel.
ValueVol first_order_integrals(double t, double S, const DiffRatesParams& p, const Quad& q) {
  ValueVol acc;
  for (std::size_t k = 0; k < q.time.size(); ++k) {
    auto [u, w] = time_node(t, p.T, q.time, k);
    double h = u - t, tau = p.T - u;
    auto [ev, ez] = q.expect2(S, h, tau, p, [&](double z) { return kernel(push(S, h, z, p), tau, p).g; });
    acc.value += w * ev;
    acc.vol += w * ez / std::sqrt(h);
  }
  return acc;
}

void check_time(double t, const DiffRatesParams& p) {
  if (t < 0.0 || t > p.T) throw std::invalid_argument("diffrates: t outside [0, T]");
}

}  // namespace

void DiffRatesParams::validate() const {
  if (!(R >= r && sigma > 0 && K2 > K1 && K1 > 0 && T > 0 && S0 > 0)) {
    throw std::invalid_argument("DiffRatesParams: need R >= r, sigma > 0, K2 > K1 > 0, T > 0, S0 > 0");
  }
}

double payoff(double S, const DiffRatesParams& p) {
  return std::max(S - p.K1, 0.0) - 2.0 * std::max(S - p.K2, 0.0);
}

double driver(double v, double z, const DiffRatesParams& p) {
  return (p.R - p.r) * std::max(z / p.sigma - v, 0.0) - p.theta() * z;
}

ValueVol v0_z0(double t, double S, const DiffRatesParams& p) {
  check_time(t, p);
  double tau = p.T - t;
  if (tau == 0.0) {
    double delta = (S > p.K1 ? 1.0 : 0.0) - 2.0 * (S > p.K2 ? 1.0 : 0.0);
    return {payoff(S, p), p.sigma * S * delta};
  }
  double F = S * std::exp(p.mu * tau), vol = p.sigma * std::sqrt(tau);
  auto a = d12(F, p.K1, vol), b = d12(F, p.K2, vol);
  double disc = std::exp(-p.r * tau);
  double value = disc * (F * norm_cdf(a.d1) - p.K1 * norm_cdf(a.d2) - 2 * (F * norm_cdf(b.d1) - p.K2 * norm_cdf(b.d2)));
  double vol_term = disc * p.sigma * F * (norm_cdf(a.d1) - 2 * norm_cdf(b.d1));
  return {value, vol_term};
}

ValueVol v1_z1(double t, double S, const DiffRatesParams& p, const Rules& rules) {
  check_time(t, p);
  if (t == p.T) return {};
  Quad q(rules);
  std::vector<ValueVol> slot(q.time.size());
  parallel_for(q.time.size(), [&](std::size_t k) {
    auto [u, w] = time_node(t, p.T, q.time, k);
    double h = u - t, tau = p.T - u;
    auto [ev, ez] = q.expect2(S, h, tau, p, [&](double z) { return kernel(push(S, h, z, p), tau, p).g; });
    slot[k].value = w * ev;
    slot[k].vol = w * ez / std::sqrt(h);
  });
  double disc = std::exp(-p.r * (p.T - t));
  ValueVol out;
  for (const auto& s : slot) {
    out.value += s.value;
    out.vol += s.vol;
  }
  return {disc * out.value, disc * out.vol};
}

double v2(double t, double S, const DiffRatesParams& p, const Rules& rules) {
  check_time(t, p);
  if (t == p.T) return 0.0;
  // V2 = e^{-r(T-t)} int_t^T du E[ dg/dv(u) I_v(u, S_u) + dg/dz(u) I_z(u, S_u) ],
  // I_v, I_z the undiscounted first-order integrals started at (u, S_u)
  Quad q(rules);
  double theta = p.theta(), spread = p.R - p.r;
  std::vector<double> slot(q.time.size(), 0.0);
  parallel_for(q.time.size(), [&](std::size_t k) {
    auto [u, w] = time_node(t, p.T, q.time, k);
    double h = u - t, tau = p.T - u;
    auto outer = [&](double z) {
      double Su = push(S, h, z, p);
      bool on = kernel(Su, tau, p).kink >= 0;
      auto inner = first_order_integrals(u, Su, p, q);
      double dgdv = on ? -spread : 0.0;
      double dgdz = (on ? spread / p.sigma : 0.0) - theta;
      return dgdv * inner.value + dgdz * inner.vol;
    };
    double e = rules.split ? split_moments(q.z, with_cuts(std::array<double, 1>{kink_root(S, h, tau, p)}), outer).first
                           : q.z.integrate(outer);
    slot[k] = w * e;
  });
  double sum = 0.0;
  for (double s : slot) sum += s;
  return std::exp(-p.r * (p.T - t)) * sum;
}

ModelSpec make_model(const DiffRatesParams& p) {
  DiffRatesParams q = p;
  ModelSpec m = gbm_model(p.mu, p.sigma, p.r, p.T, [q](const Vec& x) { return payoff(x(0), q); });
  m.g = [q](double, const Vec&, double v, const Vec& z) { return driver(v, z(0), q); };
  m.dg_dv = [q](double, const Vec&, double v, const Vec& z) { return z(0) / q.sigma - v >= 0 ? -(q.R - q.r) : 0.0; };
  m.dg_dz = [q](double, const Vec&, double v, const Vec& z) {
    return vec1((z(0) / q.sigma - v >= 0 ? (q.R - q.r) / q.sigma : 0.0) - q.theta());
  };
  return m;
}

}  // namespace fbsde::diffrates
