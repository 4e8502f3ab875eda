#pragma once

#include <vector>

namespace fbsde {

//! Fornberg weights for the m-th derivative at x0 from the given nodes.
std::vector<double> fd_weights(double x0, const std::vector<double>& nodes, int m);

//! Derivative of tabulated data on a (possibly non-uniform) grid using
//! five-point stencils: centred inside, one-sided at the two edge pairs.
std::vector<double> differentiate(const std::vector<double>& x, const std::vector<double>& f, int m = 1);

inline double fd_step(double x, double rel = 1e-5) { return rel * (1.0 + (x < 0 ? -x : x)); }

}  // namespace fbsde
