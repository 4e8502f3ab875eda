#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace fbsde {

enum class QuadKind { Legendre, HermiteNormal };

/*!
 * Fixed Gauss rule. Legendre rules live on [a,b] with weights summing to
 * b-a; HermiteNormal rules integrate against the standard normal density,
 * so their weights sum to one.
 */
struct QuadratureRule {
  QuadKind kind = QuadKind::Legendre;
  double a = -1.0;
  double b = 1.0;
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }

  template <class F>
  double integrate(F&& f) const {
    double s = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) s += weights[i] * f(nodes[i]);
    return s;
  }

  //! Same rule transported affinely onto [lo, hi] (Legendre only).
  QuadratureRule mapped(double lo, double hi) const;
};

QuadratureRule gauss_rules(std::size_t n, QuadKind kind, double a = -1.0, double b = 1.0);

inline QuadratureRule gauss_legendre(std::size_t n, double a, double b) {
  return gauss_rules(n, QuadKind::Legendre, a, b);
}
inline QuadratureRule gauss_hermite_normal(std::size_t n) {
  return gauss_rules(n, QuadKind::HermiteNormal);
}

//! Trapezoid weights on an arbitrary increasing mesh.
std::vector<double> trapezoid_weights(const std::vector<double>& mesh);

}  // namespace fbsde
