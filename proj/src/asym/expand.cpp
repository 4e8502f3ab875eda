#include <cmath>
#include <stdexcept>
#include <tuple>
#include <utility>

#include "fbsde/asymptotic.hpp"
#include "fbsde/numerics/finite_difference.hpp"

namespace fbsde::asym {
namespace {

constexpr double kStepX = 1e-4;
// G is smooth in delta (polynomials composed with the driver), while driver
// partials taken by differences carry ~1e-12 noise: a wide five-point stencil
// keeps that noise out of d^2/d delta^2.
constexpr double kStepDelta = 1e-2;

// first and second delta-derivatives at 0 from G(-2h), G(-h), G(0), G(h), G(2h)
template <class F>
std::pair<double, double> delta_derivs(F&& f, double f0) {
  double h = kStepDelta;
  double p1 = f(h), m1 = f(-h), p2 = f(2 * h), m2 = f(-2 * h);
  return {(8 * (p1 - m1) - (p2 - m2)) / (12 * h), (16 * (p1 + m1) - (p2 + m2) - 30 * f0) / (12 * h * h)};
}

}  // namespace

CJet Discount::eval(double s, const Vec& x) const {
  if (jet) return jet(s, x);
  int d = static_cast<int>(x.size());
  CJet j{0.0, Vec::Zero(d), Mat::Zero(d, d)};
  if (!c) return j;
  j.value = c(s, x);
  Vec y = x;
  for (int m = 0; m < d; ++m) {
    double hm = fd_step(x(m), kStepX);
    y(m) = x(m) + hm;
    double up = c(s, y);
    y(m) = x(m) - hm;
    double dn = c(s, y);
    y(m) = x(m);
    j.grad(m) = (up - dn) / (2 * hm);
    j.hess(m, m) = (up - 2 * j.value + dn) / (hm * hm);
    for (int n = m + 1; n < d; ++n) {
      double hn = fd_step(x(n), kStepX);
      auto at = [&](double a, double b) {
        Vec z = x;
        z(m) += a * hm;
        z(n) += b * hn;
        return c(s, z);
      };
      j.hess(m, n) = j.hess(n, m) = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4 * hm * hn);
    }
  }
  return j;
}

GJet Density::eval(double u, const Vec& x) const {
  if (jet) return jet(u, x);
  if (!G) throw std::invalid_argument("Density: G is required");
  int d = static_cast<int>(x.size());
  GJet j{0.0, Vec::Zero(d), Mat::Zero(d, d), 0.0, Vec::Zero(d), 0.0};
  j.value = G(u, x, 0.0);
  std::tie(j.d, j.dd) = delta_derivs([&](double e) { return G(u, x, e); }, j.value);
  Vec y = x;
  for (int m = 0; m < d; ++m) {
    double hm = fd_step(x(m), kStepX);
    y(m) = x(m) + hm;
    double up = G(u, y, 0.0);
    double up_d = delta_derivs([&](double e) { return G(u, y, e); }, up).first;
    y(m) = x(m) - hm;
    double dn = G(u, y, 0.0);
    double dn_d = delta_derivs([&](double e) { return G(u, y, e); }, dn).first;
    y(m) = x(m);
    j.grad(m) = (up - dn) / (2 * hm);
    j.hess(m, m) = (up - 2 * j.value + dn) / (hm * hm);
    j.grad_d(m) = (up_d - dn_d) / (2 * hm);
    for (int n = m + 1; n < d; ++n) {
      double hn = fd_step(x(n), kStepX);
      auto at = [&](double a, double b) {
        Vec z = x;
        z(m) += a * hm;
        z(n) += b * hn;
        return G(u, z, 0.0);
      };
      j.hess(m, n) = j.hess(n, m) = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4 * hm * hn);
    }
  }
  return j;
}

Expansion expand(const ExpansionTables& tab, const Discount& disc, const Density& dens) {
  std::size_t n = tab.size();
  if (n == 0) throw std::invalid_argument("expand: empty tables");
  int d = static_cast<int>(tab.x.size());
  int r = static_cast<int>(tab.X1.front().cols());

  // running integrals over s in [t, u]
  double logD = 0.0, Ic1 = 0.0, Icc2 = 0.0, Icd = 0.0;
  Vec P = Vec::Zero(d), Ix1 = Vec::Zero(r), Ix2 = Vec::Zero(r);
  struct Integrands {
    double c, ic1, icc2, icd;
    Vec p, ix1, ix2;
  } prev{};

  Expansion out;
  out.Z.c1 = Vec::Zero(r);
  out.Z.c2 = Vec::Zero(r);
  double r0_prev = 0, r1_prev = 0, r2_prev = 0;
  Vec z1_prev, z2_prev;

  for (std::size_t k = 0; k < n; ++k) {
    double u = tab.mesh[k];
    const Vec& X0 = tab.X0[k];
    const Vec& Db = tab.Dbar[k];
    CJet cj = disc.eval(u, X0);
    Vec b = tab.Y[k].transpose() * cj.grad;
    Mat DD = tab.second_moment(k, k);
    Integrands cur{cj.value,
                   cj.grad.dot(Db),
                   P.dot(b),
                   (cj.hess.array() * DD.array()).sum() + cj.grad.dot(tab.Ebar[k]),
                   tab.Q[k] * b,
                   tab.X1[k].transpose() * cj.grad,
                   tab.X2[k].transpose() * cj.grad + 2 * tab.X1[k].transpose() * (cj.hess * Db)};
    if (k > 0) {
      double h = 0.5 * (u - tab.mesh[k - 1]);
      logD -= h * (prev.c + cur.c);
      Ic1 += h * (prev.ic1 + cur.ic1);
      Icd += h * (prev.icd + cur.icd);
      P += h * (prev.p + cur.p);
      cur.icc2 = P.dot(b);  // P now includes s = u
      Icc2 += h * (prev.icc2 + cur.icc2);
      Ix1 += h * (prev.ix1 + cur.ix1);
      Ix2 += h * (prev.ix2 + cur.ix2);
    }
    prev = cur;

    bool active = !dens.terminal || k + 1 == n;
    if (!active) continue;
    GJet g = dens.eval(u, X0);
    double D = std::exp(logD);
    double Icc = Ic1 * Ic1 + 2 * Icc2;
    double cross = Ic1 * Db.dot(g.grad) + P.dot(tab.Y[k].transpose() * g.grad);
    double r0 = D * g.value;
    double r1 = D * (g.grad.dot(Db) + g.d - g.value * Ic1);
    double r2 = D * ((g.hess.array() * DD.array()).sum() + 2 * g.grad_d.dot(Db) + g.grad.dot(tab.Ebar[k]) + g.dd +
                     g.value * Icc - 2 * cross - 2 * g.d * Ic1 - g.value * Icd);
    Vec z1 = D * (tab.X1[k].transpose() * g.grad - g.value * Ix1);
    Vec z2 = -2 * Ic1 * z1 +
             D * (tab.X2[k].transpose() * g.grad + 2 * tab.X1[k].transpose() * (g.hess * Db) +
                  2 * tab.X1[k].transpose() * g.grad_d - 2 * (g.d + g.grad.dot(Db)) * Ix1 - g.value * Ix2);

    if (dens.terminal) {
      out.V = {r0, r1, r2};
      out.Z.c1 = z1;
      out.Z.c2 = z2;
    } else {
      if (k > 0) {
        double h = 0.5 * (u - tab.mesh[k - 1]);
        out.V.c0 += h * (r0_prev + r0);
        out.V.c1 += h * (r1_prev + r1);
        out.V.c2 += h * (r2_prev + r2);
        out.Z.c1 += h * (z1_prev + z1);
        out.Z.c2 += h * (z2_prev + z2);
      }
      r0_prev = r0;
      r1_prev = r1;
      r2_prev = r2;
      z1_prev = z1;
      z2_prev = z2;
    }
  }
  return out;
}

VCoeffs v_expand(const ExpansionTables& tab, const Discount& disc, const Density& dens) {
  return expand(tab, disc, dens).V;
}

ZCoeffs z_expand(const ExpansionTables& tab, const Discount& disc, const Density& dens) {
  return expand(tab, disc, dens).Z;
}

}  // namespace fbsde::asym
