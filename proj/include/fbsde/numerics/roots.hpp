#pragma once

#include <functional>

namespace fbsde {

//! Bisection on a sign change; stops once the bracket is narrower than tol.
double bisect_root(const std::function<double(double)>& f, double lo, double hi, double tol = 1e-12);

}  // namespace fbsde
