#include <cmath>
#include <stdexcept>

#include "fbsde/asymptotic.hpp"
#include "fbsde/error.hpp"
#include "fbsde/numerics/finite_difference.hpp"
#include "fbsde/numerics/ode.hpp"

namespace fbsde::asym {
namespace {

constexpr double kStep1 = 1e-5;  // first derivatives
constexpr double kStep2 = 1e-4;  // second and mixed derivatives
constexpr double kDeltaStep = 1e-4;

struct GammaDerivs {
  Mat J0;                  // d gamma_0 / dx
  std::vector<Mat> H0;     // H0[l](m, n) = d^2 gamma_0^l / dx_m dx_n
  Vec d0, dd0;             // d/d delta, d^2/d delta^2 of gamma_0
  Mat Jd0;                 // (l, m) = d^2 gamma_0^l / dx_m d delta
  Mat B;                   // d gamma_a / d delta, d x r
};

Mat drift_jacobian(const DeltaSde& s, const Vec& x) {
  Mat J(s.d, s.d);
  Vec xp = x;
  for (int j = 0; j < s.d; ++j) {
    double h = fd_step(x(j), kStep1);
    xp(j) = x(j) + h;
    Vec up = s.drift(xp, 0.0);
    xp(j) = x(j) - h;
    Vec dn = s.drift(xp, 0.0);
    xp(j) = x(j);
    J.col(j) = (up - dn) / (2 * h);
  }
  return J;
}

GammaDerivs derivs(const DeltaSde& s, const Vec& x) {
  int d = s.d;
  GammaDerivs g;
  g.J0 = drift_jacobian(s, x);
  g.H0.assign(d, Mat::Zero(d, d));
  Vec f0 = s.drift(x, 0.0);
  Vec xp = x;
  for (int m = 0; m < d; ++m) {
    double hm = fd_step(x(m), kStep2);
    xp(m) = x(m) + hm;
    Vec up = s.drift(xp, 0.0);
    xp(m) = x(m) - hm;
    Vec dn = s.drift(xp, 0.0);
    xp(m) = x(m);
    for (int l = 0; l < d; ++l) g.H0[l](m, m) = (up(l) - 2 * f0(l) + dn(l)) / (hm * hm);
    for (int n = m + 1; n < d; ++n) {
      double hn = fd_step(x(n), kStep2);
      auto at = [&](double sm, double sn) {
        Vec y = x;
        y(m) += sm * hm;
        y(n) += sn * hn;
        return s.drift(y, 0.0);
      };
      Vec mixed = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4 * hm * hn);
      for (int l = 0; l < d; ++l) g.H0[l](m, n) = g.H0[l](n, m) = mixed(l);
    }
  }
  double hd = kDeltaStep;
  Vec fp = s.drift(x, hd), fm = s.drift(x, -hd);
  g.d0 = (fp - fm) / (2 * hd);
  g.dd0 = (fp - 2 * f0 + fm) / (hd * hd);
  g.Jd0.resize(d, d);
  for (int m = 0; m < d; ++m) {
    double hm = fd_step(x(m), kStep2);
    xp(m) = x(m) + hm;
    Vec a = s.drift(xp, hd) - s.drift(xp, -hd);
    xp(m) = x(m) - hm;
    Vec b = s.drift(xp, hd) - s.drift(xp, -hd);
    xp(m) = x(m);
    g.Jd0.col(m) = (a - b) / (4 * hm * hd);
  }
  double h1 = kStep1;
  g.B = (s.vol(x, h1) - s.vol(x, -h1)) / (2 * h1);
  return g;
}

void check_vol_vanishes(const DeltaSde& s, const Vec& x) {
  Mat v = s.vol(x, 0.0);
  double scale = 1.0 + x.cwiseAbs().maxCoeff();
  if (v.cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw std::invalid_argument("DeltaSde: diffusion must vanish at delta = 0");
}

}  // namespace

void DeltaSde::validate() const {
  if (d < 1 || r < 1 || d > kMaxDim || r > kMaxDim) throw std::invalid_argument("DeltaSde: bad dimensions");
  if (!drift || !vol) throw std::invalid_argument("DeltaSde: drift and vol are required");
}

Mat ExpansionTables::cov(std::size_t u, std::size_t s) const {
  // one evaluation order for both (u, s) and (s, u), so the symmetry is exact
  if (u > s) return cov(s, u).transpose();
  return Y[u] * Q[u] * Y[s].transpose();
}

Mat ExpansionTables::second_moment(std::size_t u, std::size_t s) const {
  return Dbar[u] * Dbar[s].transpose() + cov(u, s);
}

ExpansionTables build_tables(const DeltaSde& sde, double t, const Vec& x, double T, std::size_t nodes) {
  sde.validate();
  if (x.size() != sde.d) throw std::invalid_argument("build_tables: anchor has the wrong dimension");
  if (T < t) throw std::invalid_argument("build_tables: need T >= t");
  if (nodes < 2) throw std::invalid_argument("build_tables: need at least two nodes");
  int d = sde.d;
  ExpansionTables tab;
  tab.t = t;
  tab.x = x;
  tab.mesh = T > t ? uniform_mesh(t, T, nodes - 1) : std::vector<double>{t};
  std::size_t n = tab.mesh.size();

  // X0, Y and Y^{-1} together
  int dd = d * d;
  VectorField field = [&](double, const Eigen::VectorXd& s) {
    Vec x0 = s.head(d);
    Mat J = drift_jacobian(sde, x0);
    Eigen::Map<const Eigen::MatrixXd> Ym(s.data() + d, d, d);
    Eigen::Map<const Eigen::MatrixXd> Yi(s.data() + d + dd, d, d);
    Eigen::VectorXd out(d + 2 * dd);
    out.head(d) = sde.drift(x0, 0.0);
    Eigen::Map<Eigen::MatrixXd>(out.data() + d, d, d) = J * Ym;
    Eigen::Map<Eigen::MatrixXd>(out.data() + d + dd, d, d) = -Yi * J;
    return out;
  };
  Eigen::VectorXd s0(d + 2 * dd);
  s0.head(d) = x;
  Eigen::Map<Eigen::MatrixXd>(s0.data() + d, d, d).setIdentity();
  Eigen::Map<Eigen::MatrixXd>(s0.data() + d + dd, d, d).setIdentity();
  auto sol = n > 1 ? rk4_solve(field, s0, tab.mesh) : std::vector<Eigen::VectorXd>{s0};

  tab.X0.resize(n);
  tab.Y.resize(n);
  tab.Yinv.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    if (!sol[k].allFinite()) throw NumericalError("build_tables: delta = 0 flow blew up");
    tab.X0[k] = sol[k].head(d);
    tab.Y[k] = Eigen::Map<const Eigen::MatrixXd>(sol[k].data() + d, d, d);
    tab.Yinv[k] = Eigen::Map<const Eigen::MatrixXd>(sol[k].data() + d + dd, d, d);
    double dev = (tab.Y[k] * tab.Yinv[k] - Mat::Identity(d, d)).cwiseAbs().maxCoeff();
    if (dev > 1e-8) throw NumericalError("build_tables: Y Y^{-1} drifted from the identity");
  }

  tab.Dbar.assign(n, Vec::Zero(d));
  tab.Q.assign(n, Mat::Zero(d, d));
  tab.Ebar.assign(n, Vec::Zero(d));
  tab.Hbar.assign(n, Mat::Zero(d, d));
  tab.X1.resize(n);
  tab.X2.resize(n);

  // running integrals of Y^{-1}(...) for D, E, H; trapezoid on the mesh
  Vec iD = Vec::Zero(d), iE = Vec::Zero(d);
  Mat iH = Mat::Zero(d, d), iQ = Mat::Zero(d, d);
  Vec fD_prev, fE_prev;
  Mat fH_prev, fQ_prev;
  for (std::size_t k = 0; k < n; ++k) {
    check_vol_vanishes(sde, tab.X0[k]);
    GammaDerivs g = derivs(sde, tab.X0[k]);
    const Mat& Yi = tab.Yinv[k];
    Vec fD = Yi * g.d0;
    Mat YB = Yi * g.B;
    Mat fQ = YB * YB.transpose();
    double h = k > 0 ? tab.mesh[k] - tab.mesh[k - 1] : 0.0;
    if (k > 0) {
      iD += 0.5 * h * (fD_prev + fD);
      iQ += 0.5 * h * (fQ_prev + fQ);
    }
    tab.Dbar[k] = tab.Y[k] * iD;
    tab.Q[k] = 0.5 * (iQ + iQ.transpose());
    const Vec& Db = tab.Dbar[k];

    Mat DD = tab.second_moment(k, k);
    Vec src(d);
    Mat M(d, d);
    for (int l = 0; l < d; ++l) {
      src(l) = (g.H0[l].array() * DD.array()).sum();
      M.row(l) = (g.H0[l] * Db).transpose();
    }
    src += 2 * g.Jd0 * Db + g.dd0;
    M += g.Jd0;
    Vec fE = Yi * src;
    Mat fH = Yi * M * tab.Y[k];
    if (k > 0) {
      iE += 0.5 * h * (fE_prev + fE);
      iH += 0.5 * h * (fH_prev + fH);
    }
    tab.Ebar[k] = tab.Y[k] * iE;
    tab.Hbar[k] = tab.Y[k] * iH;
    fD_prev = fD;
    fQ_prev = fQ;
    fE_prev = fE;
    fH_prev = fH;
  }

  // Malliavin-derivative coefficients use the delta-derivatives at the anchor
  double h1 = kStep1, h2 = kStep2;
  Mat B = (sde.vol(x, h1) - sde.vol(x, -h1)) / (2 * h1);
  Mat B2 = (sde.vol(x, h2) - 2 * sde.vol(x, 0.0) + sde.vol(x, -h2)) / (h2 * h2);
  for (std::size_t k = 0; k < n; ++k) {
    tab.X1[k] = tab.Y[k] * B;
    tab.X2[k] = tab.Y[k] * B2 + 2 * tab.Hbar[k] * B;
  }
  return tab;
}

}  // namespace fbsde::asym
