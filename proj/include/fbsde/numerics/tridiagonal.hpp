#pragma once

#include <vector>

namespace fbsde {

// Row i reads  sub[i-1]*x[i-1] + diag[i]*x[i] + super[i]*x[i+1] = rhs[i].
struct TridiagonalSystem {
  std::vector<double> sub;    // n-1
  std::vector<double> diag;   // n
  std::vector<double> super;  // n-1
  std::vector<double> rhs;    // n
};

std::vector<double> solve_tridiagonal(const TridiagonalSystem& sys);

//! A*x for the banded matrix of `sys` (rhs ignored).
std::vector<double> tridiagonal_multiply(const TridiagonalSystem& sys, const std::vector<double>& x);

}  // namespace fbsde
