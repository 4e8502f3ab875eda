#include "paths.hpp"

#include <cmath>
#include <stdexcept>

#include "fbsde/error.hpp"
#include "fbsde/numerics/finite_difference.hpp"

namespace fbsde::mc {

std::vector<double> euler_mesh(double t, double T, double steps_per_unit, std::size_t min_steps) {
  if (!(T > t)) throw std::invalid_argument("euler_mesh: need T > t");
  if (!(steps_per_unit > 0)) throw std::invalid_argument("euler_mesh: steps_per_unit must be positive");
  auto n = static_cast<std::size_t>(std::ceil(steps_per_unit * (T - t) - 1e-9));
  n = std::max(n, std::max<std::size_t>(min_steps, 1));
  std::vector<double> mesh(n + 1);
  for (std::size_t k = 0; k <= n; ++k) mesh[k] = t + (T - t) * static_cast<double>(k) / static_cast<double>(n);
  mesh[n] = T;
  return mesh;
}

namespace detail {

void check_spec(const ModelSpec& m, const PathSpec& s) {
  m.validate();
  if (s.mesh.size() < 2) throw std::invalid_argument("PathSpec: mesh needs at least two nodes");
  if (s.mesh.front() != s.t) throw std::invalid_argument("PathSpec: mesh must start at t");
  for (std::size_t k = 1; k < s.mesh.size(); ++k) {
    if (!(s.mesh[k] > s.mesh[k - 1])) throw std::invalid_argument("PathSpec: mesh must increase");
  }
  if (s.x.size() != m.d) throw std::invalid_argument("PathSpec: start state has the wrong dimension");
  if (s.n_paths < 1) throw std::invalid_argument("PathSpec: need at least one path");
}

Walker::Walker(const ModelSpec& m, const PathSpec& s) : m_(m), s_(s) {}

void Walker::jacobians(double t, const Vec& x, Mat& j0, std::vector<Mat>& ja) const {
  int d = m_.d, r = m_.r;
  j0.setZero(d, d);
  ja.assign(r, Mat::Zero(d, d));
  Vec xp = x;
  for (int j = 0; j < d; ++j) {
    double h = fd_step(x(j));
    xp(j) = x(j) + h;
    Vec fu = m_.drift(t, xp);
    Mat gu = m_.vol(t, xp);
    xp(j) = x(j) - h;
    Vec fd = m_.drift(t, xp);
    Mat gd = m_.vol(t, xp);
    xp(j) = x(j);
    j0.col(j) = (fu - fd) / (2 * h);
    for (int a = 0; a < r; ++a) ja[a].col(j) = (gu.col(a) - gd.col(a)) / (2 * h);
  }
}

void Walker::step(std::size_t p, std::size_t k, State& st, bool with_y) const {
  double t = s_.mesh[k], dt = s_.mesh[k + 1] - t, sq = std::sqrt(dt);
  RngStream rng(s_.seed, s_.first_stream + p);
  int r = m_.r;
  st.dw.resize(r);
  for (int a = 0; a < r; ++a) st.dw(a) = sq * rng.normal((s_.step_offset + k) * static_cast<std::uint64_t>(r) + a);
  Vec drift = m_.drift(t, st.x);
  Mat vol = m_.vol(t, st.x);
  if (with_y) {
    jacobians(t, st.x, j0_, ja_);
    Mat dy = j0_ * st.y * dt;
    for (int a = 0; a < r; ++a) dy += ja_[a] * st.y * st.dw(a);
    st.y += dy;
  }
  st.x += drift * dt + vol * st.dw;
  for (Eigen::Index i = 0; i < st.x.size(); ++i) {
    if (!std::isfinite(st.x(i))) throw NumericalError("simulate: non-finite state");
  }
}

}  // namespace detail

PathEnsemble simulate(const ModelSpec& model, const PathSpec& spec) {
  detail::check_spec(model, spec);
  PathEnsemble e;
  e.mesh = spec.mesh;
  e.n_paths = spec.n_paths;
  e.d = model.d;
  e.r = model.r;
  e.seed = spec.seed;
  std::size_t nk = spec.mesh.size();
  e.X.resize(spec.n_paths * nk);
  e.Y.resize(spec.n_paths * nk);
  e.dW.resize(spec.n_paths * (nk - 1));
  detail::Walker w(model, spec);
  for (std::size_t p = 0; p < spec.n_paths; ++p) {
    detail::State st{spec.x, Mat::Identity(model.d, model.d), Vec::Zero(model.r)};
    e.X[p * nk] = st.x;
    e.Y[p * nk] = st.y;
    for (std::size_t k = 0; k + 1 < nk; ++k) {
      w.step(p, k, st, true);
      e.X[p * nk + k + 1] = st.x;
      e.Y[p * nk + k + 1] = st.y;
      e.dW[p * (nk - 1) + k] = st.dw;
    }
  }
  return e;
}

}  // namespace fbsde::mc
