#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "fbsde/decoupled_core.hpp"
#include "fbsde/numerics/parallel.hpp"
#include "paths.hpp"

namespace fbsde::mc {
namespace {

constexpr double kMaxCondition = 1e12;

// Least-squares projection onto polynomials of the standardised (log) state.
class Projector {
 public:
  Projector(const std::vector<double>& x, int degree) {
    bool positive = std::all_of(x.begin(), x.end(), [](double v) { return v > 0; });
    std::size_t n = x.size();
    Eigen::VectorXd u(n);
    for (std::size_t i = 0; i < n; ++i) u(i) = positive ? std::log(x[i]) : x[i];
    double mean = u.mean();
    double sd = std::sqrt((u.array() - mean).square().sum() / static_cast<double>(n));
    if (!(sd > 1e-12 * (1 + std::abs(mean)))) degree = 0;
    else u = (u.array() - mean) / sd;

    for (; degree >= 0; --degree) {
      basis_.resize(n, degree + 1);
      basis_.col(0).setOnes();
      for (int j = 1; j <= degree; ++j) basis_.col(j) = basis_.col(j - 1).cwiseProduct(u);
      gram_ = basis_.transpose() * basis_;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram_, Eigen::EigenvaluesOnly);
      double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
      if (degree == 0 || (lo > 0 && hi / lo <= kMaxCondition)) break;
    }
    degree_ = degree;
    ldlt_.compute(gram_);
  }

  int degree() const { return degree_; }

  Eigen::VectorXd fit(const Eigen::VectorXd& y) const {
    Eigen::VectorXd beta = ldlt_.solve(basis_.transpose() * y);
    return basis_ * beta;
  }

 private:
  Eigen::MatrixXd basis_, gram_;
  Eigen::LDLT<Eigen::MatrixXd> ldlt_;
  int degree_ = 0;
};

struct BatchOut {
  double v0;
  std::vector<int> degrees;
};

BatchOut run_batch(const ModelSpec& m, const RegressionSpec& spec, const std::vector<double>& mesh, std::size_t batch,
                   std::size_t n) {
  PathSpec ps;
  ps.t = 0.0;
  ps.x = vec1(spec.x0);
  ps.mesh = mesh;
  ps.n_paths = n;
  ps.seed = spec.seed;
  ps.first_stream = batch * n;
  detail::Walker w(m, ps);

  std::size_t ns = mesh.size() - 1;
  std::vector<std::vector<double>> x(ns + 1, std::vector<double>(n));
  std::vector<std::vector<double>> dw(ns, std::vector<double>(n));
  for (std::size_t p = 0; p < n; ++p) {
    detail::State st{ps.x, Mat::Identity(1, 1), Vec::Zero(1)};
    x[0][p] = st.x(0);
    for (std::size_t k = 0; k < ns; ++k) {
      w.step(p, k, st, false);
      x[k + 1][p] = st.x(0);
      dw[k][p] = st.dw(0);
    }
  }

  auto driver = [&m](double t, double xv, double v, double z) {
    Vec xx = vec1(xv), zz = vec1(z);
    double f = -m.eval_c(t, xx) * v + m.eps * m.eval_g(t, xx, v, zz);
    if (m.theta) f -= m.theta(t, xx)(0) * z;
    return f;
  };

  // resp: pathwise multi-step response Phi(X_T) + sum_{j > k} f_j dt
  Eigen::VectorXd resp(n);
  for (std::size_t p = 0; p < n; ++p) resp(p) = m.payoff(vec1(x[ns][p]));
  BatchOut out;
  out.degrees.resize(ns);
  Eigen::VectorXd zr(n), vr(n);
  for (std::size_t k = ns; k-- > 0;) {
    double t = mesh[k], dt = mesh[k + 1] - t;
    Projector proj(x[k], spec.basis_degree);
    out.degrees[k] = proj.degree();
    double centre = resp.mean();
    for (std::size_t p = 0; p < n; ++p) zr(p) = (resp(p) - centre) * dw[k][p] / dt;
    Eigen::VectorXd zhat = proj.fit(zr);
    Eigen::VectorXd vhat = proj.fit(resp);
    for (int pass = 0; pass < 2; ++pass) {  // explicit guess, then one Picard step
      for (std::size_t p = 0; p < n; ++p) vr(p) = resp(p) + driver(t, x[k][p], vhat(p), zhat(p)) * dt;
      vhat = proj.fit(vr);
    }
    for (std::size_t p = 0; p < n; ++p) resp(p) += driver(t, x[k][p], vhat(p), zhat(p)) * dt;
  }
  out.v0 = resp.mean();
  return out;
}

}  // namespace

RegressionResult regression_mc(const ModelSpec& model, const RegressionSpec& spec) {
  model.validate();
  if (!model.decoupled()) throw std::invalid_argument("regression_mc: decoupled models only");
  if (model.d != 1 || model.r != 1) throw std::invalid_argument("regression_mc: d = r = 1 only");
  if (spec.basis_degree < 1) throw std::invalid_argument("regression_mc: basis_degree must be >= 1");
  if (spec.n_steps < 1) throw std::invalid_argument("regression_mc: n_steps must be >= 1");
  if (spec.n_batches < 20) throw std::invalid_argument("regression_mc: need at least 20 batches");
  std::size_t n = spec.n_paths / spec.n_batches;
  if (n < static_cast<std::size_t>(4 * (spec.basis_degree + 1)))
    throw std::invalid_argument("regression_mc: too few paths per batch for the basis");

  std::vector<double> mesh = euler_mesh(0.0, model.T, static_cast<double>(spec.n_steps) / model.T, spec.n_steps);
  std::vector<BatchOut> batches(spec.n_batches);
  parallel_for(spec.n_batches, [&](std::size_t b) { batches[b] = run_batch(model, spec, mesh, b, n); });

  double s = 0, s2 = 0, nb = static_cast<double>(spec.n_batches);
  for (const auto& b : batches) {
    s += b.v0;
    s2 += b.v0 * b.v0;
  }
  double mean = s / nb;
  double var = std::max(0.0, (s2 - nb * mean * mean) / (nb - 1));
  return {{mean, std::sqrt(var / nb)}, batches.front().degrees};
}

}  // namespace fbsde::mc
