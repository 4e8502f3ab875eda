#pragma once

#include <vector>

#include "fbsde/decoupled_core.hpp"
#include "fbsde/numerics/rng.hpp"

namespace fbsde::mc::detail {

struct State {
  Vec x;
  Mat y;
  Vec dw;  // increment of the step just taken
};

void check_spec(const ModelSpec& m, const PathSpec& s);

// One Euler step at a time for path p; scratch Jacobians make it single-threaded
// per instance.
class Walker {
 public:
  Walker(const ModelSpec& m, const PathSpec& s);
  void step(std::size_t p, std::size_t k, State& st, bool with_y) const;

 private:
  void jacobians(double t, const Vec& x, Mat& j0, std::vector<Mat>& ja) const;
  const ModelSpec& m_;
  const PathSpec& s_;
  mutable Mat j0_;
  mutable std::vector<Mat> ja_;
};

}  // namespace fbsde::mc::detail
