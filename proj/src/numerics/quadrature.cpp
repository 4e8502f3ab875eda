#include "fbsde/numerics/quadrature.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace fbsde {
namespace {

// Legendre nodes by Newton iteration on P_n from the Chebyshev-like guess.
void legendre(std::size_t n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (std::size_t k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / static_cast<double>(k);
        p0 = p1;
        p1 = p2;
      }
      dp = static_cast<double>(n) * (z * p1 - p0) / (z * z - 1.0);
      double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    // recompute derivative at the converged node
    double p0 = 1.0, p1 = z;
    for (std::size_t k = 2; k <= n; ++k) {
      double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / static_cast<double>(k);
      p0 = p1;
      p1 = p2;
    }
    dp = static_cast<double>(n) * (z * p1 - p0) / (z * z - 1.0);
    x[i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  std::reverse(x.begin(), x.end());
  std::reverse(w.begin(), w.end());
}

// Probabilists' Hermite: Golub-Welsch for starting values, Newton polish on
// the orthonormal recurrence, Christoffel weights 1 / sum p_k^2.
void hermite_normal(std::size_t n, std::vector<double>& x, std::vector<double>& w) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t k = 1; k < n; ++k) {
    J(k - 1, k) = J(k, k - 1) = std::sqrt(static_cast<double>(k));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J, Eigen::EigenvaluesOnly);
  x.resize(n);
  w.resize(n);
  // p_n, p_n' and sum_{k<n} p_k^2 of the orthonormal family at z
  auto eval = [n](double z, double& p, double& dp, double& sum) {
    double pm = 0.0, dpm = 0.0;
    p = 1.0;
    dp = 0.0;
    sum = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
      double sk = std::sqrt(static_cast<double>(k));
      double sk1 = std::sqrt(static_cast<double>(k + 1));
      double pn = (z * p - sk * pm) / sk1;
      double dpn = (p + z * dp - sk * dpm) / sk1;
      pm = p;
      p = pn;
      dpm = dp;
      dp = dpn;
      if (k + 1 < n) sum += p * p;
    }
  };
  for (std::size_t i = 0; i < n; ++i) {
    double z = es.eigenvalues()(static_cast<Eigen::Index>(i));
    double p, dp, sum;
    for (int it = 0; it < 20; ++it) {
      eval(z, p, dp, sum);
      double dz = p / dp;
      z -= dz;
      if (std::abs(dz) < 1e-15 * (1.0 + std::abs(z))) break;
    }
    eval(z, p, dp, sum);
    x[i] = z;
    w[i] = 1.0 / sum;
  }
}

}  // namespace

QuadratureRule gauss_rules(std::size_t n, QuadKind kind, double a, double b) {
  if (n == 0) throw std::invalid_argument("gauss_rules: node count must be positive");
  QuadratureRule rule;
  rule.kind = kind;
  if (kind == QuadKind::Legendre) {
    if (!(a < b)) throw std::invalid_argument("gauss_rules: need a < b");
    legendre(n, rule.nodes, rule.weights);
    rule.a = -1.0;
    rule.b = 1.0;
    return rule.mapped(a, b);
  }
  hermite_normal(n, rule.nodes, rule.weights);
  rule.a = -std::numeric_limits<double>::infinity();
  rule.b = std::numeric_limits<double>::infinity();
  return rule;
}

QuadratureRule QuadratureRule::mapped(double lo, double hi) const {
  if (kind != QuadKind::Legendre) throw std::invalid_argument("mapped: only Legendre rules have a finite interval");
  QuadratureRule out;
  out.kind = kind;
  out.a = lo;
  out.b = hi;
  double s = (hi - lo) / (b - a);
  out.nodes.resize(nodes.size());
  out.weights.resize(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    out.nodes[i] = lo + (nodes[i] - a) * s;
    out.weights[i] = weights[i] * s;
  }
  return out;
}

std::vector<double> trapezoid_weights(const std::vector<double>& mesh) {
  std::vector<double> w(mesh.size(), 0.0);
  for (std::size_t i = 1; i < mesh.size(); ++i) {
    double h = 0.5 * (mesh[i] - mesh[i - 1]);
    w[i - 1] += h;
    w[i] += h;
  }
  return w;
}

}  // namespace fbsde
