#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

#include "fbsde/coupled.hpp"

namespace fbsde::coupled {
namespace {

// Directional differences. The probe points depend only on the direction, so
// the results are exactly homogeneous in |dx| (degree 1 and 2): the Walker's
// Jacobians of the stacked coefficients stay clean in the X1, X2 blocks.
constexpr double kDir1 = 1e-4;
constexpr double kDir2 = 1e-3;

double scale_of(const Vec& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

template <class F>
auto dir1(F&& f, const Vec& x, const Vec& dx) {
  double n = scale_of(dx);
  using R = decltype(f(x));
  if (n == 0.0) return R(0.0 * f(x));
  double s = kDir1 * (1.0 + scale_of(x)) / n;
  return R((f(Vec(x + s * dx)) - f(Vec(x - s * dx))) / (2 * s));
}

template <class F>
auto dir2(F&& f, const Vec& x, const Vec& dx) {
  double n = scale_of(dx);
  using R = decltype(f(x));
  R f0 = f(x);
  if (n == 0.0) return R(0.0 * f0);
  double s = kDir2 * (1.0 + scale_of(x)) / n;
  return R((f(Vec(x + s * dx)) - 2 * f0 + f(Vec(x - s * dx))) / (s * s));
}

// d/ds f(x + s dx, v + s dv, z + s dz) at s = 0
template <class F>
auto joint_dir(F&& f, const Vec& x, double v, const Vec& z, const Vec& dx, double dv, const Vec& dz) {
  double n = std::max({scale_of(dx), std::abs(dv), scale_of(dz)});
  using R = decltype(f(x, v, z));
  if (n == 0.0) return R(0.0 * f(x, v, z));
  double s = kDir1 * (1.0 + std::max({scale_of(x), std::abs(v), scale_of(z)})) / n;
  return R((f(Vec(x + s * dx), v + s * dv, Vec(z + s * dz)) - f(Vec(x - s * dx), v - s * dv, Vec(z - s * dz))) /
           (2 * s));
}

// Everything the stacked coefficients need at one (t, state).
struct Point {
  Vec x0, x1, x2;
  double v0, v1;
  Vec z0, z1;
};

struct Shared {
  ModelSpec m;
  LowerOrders lower;

  Point at(double t, const Vec& s) const {
    int d = m.d;
    Point p{s.segment(0, d), s.segment(d, d), s.segment(2 * d, d), 0.0, 0.0, Vec(), Vec()};
    const auto& f0 = lower.f0;
    const auto& f1 = lower.f1;
    p.v0 = f0.V(t, p.x0);
    p.z0 = f0.Z(t, p.x0);
    p.v1 = f1.V(t, p.x0) + dir1([&](const Vec& y) { return f0.V(t, y); }, p.x0, p.x1);
    p.z1 = f1.Z(t, p.x0) + dir1([&](const Vec& y) { return f0.Z(t, y); }, p.x0, p.x1);
    return p;
  }
};

Vec stack3(const Vec& a, const Vec& b, const Vec& c) {
  Vec s(a.size() * 3);
  s << a, b, c;
  return s;
}

Mat stack3(const Mat& a, const Mat& b, const Mat& c) {
  Mat s(a.rows() * 3, a.cols());
  s << a, b, c;
  return s;
}

}  // namespace

LowerOrders four_step_orders(const ModelSpec& model, const pde::PdeGrid& grid) {
  auto orders = pde::cascade_orders(model, grid, 1);
  auto r0 = std::make_shared<const OrderResult>(orders[0]);
  auto r1 = std::make_shared<const OrderResult>(orders[1]);
  auto fn = [](std::shared_ptr<const OrderResult> r) {
    return mc::OrderFunctions{[r](double t, const Vec& x) { return r->V(t, x(0)); },
                              [r](double t, const Vec& x) { return vec1(r->Z(t, x(0))); }};
  };
  return {fn(r0), fn(r1)};
}

StackedSystem stacked_system(const ModelSpec& model, const LowerOrders& lower) {
  model.validate();
  if (model.theta) throw std::invalid_argument("stacked_system: absorb theta into the drift first");
  if (3 * model.d > kMaxDim) throw std::invalid_argument("stacked_system: 3 d exceeds the state size limit");
  if (!lower.f0.V || !lower.f0.Z || !lower.f1.V || !lower.f1.Z)
    throw std::invalid_argument("stacked_system: orders 0 and 1 are required");
  auto sh = std::make_shared<const Shared>(Shared{model, lower});
  int d = model.d;

  StackedSystem s;
  ModelSpec& m = s.model;
  m.d = 3 * d;
  m.r = model.r;
  m.T = model.T;
  m.eps = model.eps;
  if (model.c) m.c = [sh, d](double t, const Vec& x) { return sh->m.c(t, Vec(x.head(d))); };

  m.drift = [sh](double t, const Vec& x) {
    const ModelSpec& b = sh->m;
    Point p = sh->at(t, x);
    auto r = [&](const Vec& y) { return b.drift(t, y); };
    auto mu = [&](const Vec& y, double v, const Vec& z) { return b.eval_mu(t, y, v, z); };
    Vec b0 = r(p.x0);
    Vec b1 = dir1(r, p.x0, p.x1) + mu(p.x0, p.v0, p.z0);
    Vec b2 = dir1(r, p.x0, p.x2) + 0.5 * dir2(r, p.x0, p.x1) + joint_dir(mu, p.x0, p.v0, p.z0, p.x1, p.v1, p.z1);
    return stack3(b0, b1, b2);
  };
  m.vol = [sh](double t, const Vec& x) {
    const ModelSpec& b = sh->m;
    Point p = sh->at(t, x);
    auto sig = [&](const Vec& y) { return b.vol(t, y); };
    auto eta = [&](const Vec& y, double v, const Vec& z) { return b.eval_eta(t, y, v, z); };
    Mat g0 = sig(p.x0);
    Mat g1 = eta(p.x0, p.v0, p.z0) + dir1(sig, p.x0, p.x1);
    Mat g2 = dir1(sig, p.x0, p.x2) + 0.5 * dir2(sig, p.x0, p.x1) + joint_dir(eta, p.x0, p.v0, p.z0, p.x1, p.v1, p.z1);
    return stack3(g0, g1, g2);
  };

  auto phi = [sh](const Vec& y) { return sh->m.payoff(y); };
  s.payoff[0] = [phi, d](const Vec& x) { return phi(x.head(d)); };
  s.payoff[1] = [phi, d](const Vec& x) { return dir1(phi, x.head(d), x.segment(d, d)); };
  s.payoff[2] = [phi, d](const Vec& x) {
    Vec x0 = x.head(d);
    return dir1(phi, x0, x.segment(2 * d, d)) + 0.5 * dir2(phi, x0, x.segment(d, d));
  };
  m.payoff = s.payoff[0];

  s.source[1] = [sh](double t, const Vec& x) {
    const ModelSpec& b = sh->m;
    Point p = sh->at(t, x);
    auto c = [&](const Vec& y) { return b.eval_c(t, y); };
    return b.eval_g(t, p.x0, p.v0, p.z0) - dir1(c, p.x0, p.x1) * p.v0;
  };
  s.source[2] = [sh](double t, const Vec& x) {
    const ModelSpec& b = sh->m;
    Point p = sh->at(t, x);
    auto c = [&](const Vec& y) { return b.eval_c(t, y); };
    double dg = 0.0;
    if (b.g) {
      dg = dir1([&](const Vec& y) { return b.g(t, y, p.v0, p.z0); }, p.x0, p.x1) +
           b.eval_dg_dv(t, p.x0, p.v0, p.z0) * p.v1 + b.eval_dg_dz(t, p.x0, p.v0, p.z0).dot(p.z1);
    }
    double dc1 = dir1(c, p.x0, p.x1);
    double dc2 = dir1(c, p.x0, p.x2) + 0.5 * dir2(c, p.x0, p.x1);
    return dg - dc2 * p.v0 - dc1 * p.v1;
  };
  return s;
}

OrdersAtStart appendix_b_orders(const ModelSpec& model, const LowerOrders& lower, const mc::PathSpec& spec) {
  StackedSystem sys = stacked_system(model, lower);
  if (spec.x.size() != model.d) throw std::invalid_argument("appendix_b_orders: start state has the wrong dimension");
  mc::PathSpec s = spec;
  s.x = stack3(spec.x, Vec(Vec::Zero(model.d)), Vec(Vec::Zero(model.d)));
  std::vector<mc::Functional> fs;
  for (int k = 0; k < 3; ++k) fs.push_back({sys.payoff[k], sys.source[k]});
  auto r = mc::evaluate_many(sys.model, s, fs);
  OrdersAtStart out;
  for (int k = 0; k < 3; ++k) {
    out.V[k] = r[k].V;
    out.Z[k] = r[k].Z;
  }
  return out;
}

}  // namespace fbsde::coupled
