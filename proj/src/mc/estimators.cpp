#include <cmath>
#include <stdexcept>

#include "fbsde/decoupled_core.hpp"
#include "fbsde/numerics/finite_difference.hpp"
#include "fbsde/numerics/parallel.hpp"
#include "paths.hpp"

namespace fbsde::mc {
namespace {

// fixed chunking keeps the reduction order independent of the thread count
constexpr std::size_t kChunk = 256;

// c + |theta|^2 / 2, the drift of minus the log discount
double discount_rate(const ModelSpec& m, double t, const Vec& x) {
  double c = m.eval_c(t, x);
  if (m.theta) c += 0.5 * m.theta(t, x).squaredNorm();
  return c;
}

template <class F>
Vec gradient(F&& f, const Vec& x) {
  Vec g(x.size());
  Vec xp = x;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    double h = fd_step(x(j));
    xp(j) = x(j) + h;
    double up = f(xp);
    xp(j) = x(j) - h;
    double dn = f(xp);
    xp(j) = x(j);
    g(j) = (up - dn) / (2 * h);
  }
  return g;
}

struct Sums {
  double v = 0, v2 = 0;
  std::vector<double> z, z2;
};

// Per-path functional and its Malliavin derivative.
struct PathValue {
  double value = 0.0;
  Vec dvalue;
};

// Per-path values of several functionals on one path; also reports the final discount.
struct PathOut {
  std::vector<PathValue> f;
  double discount;
};

PathOut run_path(const ModelSpec& m, const PathSpec& s, const detail::Walker& w, std::size_t p,
                 const std::vector<Functional>& fs, bool need_z) {
  int r = m.r;
  std::size_t nk = s.mesh.size(), nf = fs.size();
  detail::State st{s.x, Mat::Identity(m.d, m.d), Vec::Zero(r)};
  Mat g0 = m.vol(s.t, s.x);  // D_t X_u = Y_{t,u} gamma(t, X_t)
  auto rate = [&](double t, const Vec& x) { return discount_rate(m, t, x); };

  double logd = 0.0;
  Vec dlogd = Vec::Zero(r);
  if (m.theta) dlogd = -m.theta(s.t, s.x);
  struct Acc {
    double acc = 0.0, gval = 0.0;
    Vec dacc, dg;
  };
  std::vector<Acc> a(nf);
  for (auto& ai : a) {
    ai.dacc = Vec::Zero(r);
    ai.dg = Vec::Zero(r);
  }

  auto node = [&](const SourceFn& source, double t, const Vec& x, const Mat& dx, double& gval, Vec& dg) {
    gval = source(t, x);
    if (need_z) dg = dx.transpose() * gradient([&](const Vec& y) { return source(t, y); }, x);
  };

  double t = s.t;
  Mat dx = st.y * g0;
  double crate = rate(t, st.x);
  Vec dcrate = Vec::Zero(r);
  for (std::size_t i = 0; i < nf; ++i) {
    if (fs[i].source) node(fs[i].source, t, st.x, dx, a[i].gval, a[i].dg);
  }
  if (need_z) dcrate = dx.transpose() * gradient([&](const Vec& y) { return rate(t, y); }, st.x);

  for (std::size_t k = 0; k + 1 < nk; ++k) {
    double dt = s.mesh[k + 1] - s.mesh[k];
    Vec x_prev = st.x;
    Mat dx_prev = dx;
    w.step(p, k, st, need_z);
    double t1 = s.mesh[k + 1];
    dx = st.y * g0;
    double crate1 = rate(t1, st.x);
    Vec dcrate1 = Vec::Zero(r);
    if (need_z) dcrate1 = dx.transpose() * gradient([&](const Vec& y) { return rate(t1, y); }, st.x);

    double logd1 = logd - 0.5 * (crate + crate1) * dt;
    Vec dlogd1 = dlogd;
    if (need_z) dlogd1 -= 0.5 * (dcrate + dcrate1) * dt;
    if (m.theta) {
      Vec th = m.theta(s.mesh[k], x_prev);
      logd1 -= th.dot(st.dw);
      if (need_z) {
        for (int b = 0; b < r; ++b) {
          Vec grad = gradient([&](const Vec& y) { return m.theta(s.mesh[k], y)(b); }, x_prev);
          dlogd1 -= (dx_prev.transpose() * grad) * st.dw(b);
        }
      }
    }

    for (std::size_t i = 0; i < nf; ++i) {
      if (!fs[i].source) continue;
      Acc& ai = a[i];
      double gval1;
      Vec dg1 = Vec::Zero(r);
      node(fs[i].source, t1, st.x, dx, gval1, dg1);
      double d0 = std::exp(logd), d1 = std::exp(logd1);
      ai.acc += 0.5 * dt * (d0 * ai.gval + d1 * gval1);
      if (need_z) ai.dacc += 0.5 * dt * (d0 * (ai.dg + ai.gval * dlogd) + d1 * (dg1 + gval1 * dlogd1));
      ai.gval = gval1;
      ai.dg = dg1;
    }
    logd = logd1;
    dlogd = dlogd1;
    crate = crate1;
    dcrate = dcrate1;
    t = t1;
  }
  double disc = std::exp(logd);
  PathOut out{std::vector<PathValue>(nf), disc};
  for (std::size_t i = 0; i < nf; ++i) {
    Acc& ai = a[i];
    if (fs[i].payoff) {
      const PayoffFn& payoff = fs[i].payoff;
      double phi = payoff(st.x);
      ai.acc += disc * phi;
      if (need_z) {
        Vec grad = gradient([&](const Vec& y) { return payoff(y); }, st.x);
        ai.dacc += disc * (dx.transpose() * grad + phi * dlogd);
      }
    }
    // d(E V) = E (Z - theta V) dW, so the Clark-Ocone integrand misses theta V
    if (m.theta && need_z) ai.dacc += m.theta(s.t, s.x) * ai.acc;
    out.f[i] = {ai.acc, ai.dacc};
  }
  return out;
}

McResult reduce(const std::vector<Sums>& chunks, std::size_t n, int r) {
  Sums tot;
  tot.z.assign(r, 0.0);
  tot.z2.assign(r, 0.0);
  for (const auto& c : chunks) {
    tot.v += c.v;
    tot.v2 += c.v2;
    for (int a = 0; a < r; ++a) {
      tot.z[a] += c.z[a];
      tot.z2[a] += c.z2[a];
    }
  }
  double nn = static_cast<double>(n);
  auto est = [nn](double s, double s2) {
    double mean = s / nn;
    double var = nn > 1 ? std::max(0.0, (s2 - nn * mean * mean) / (nn - 1)) : 0.0;
    return Estimate{mean, std::sqrt(var / nn)};
  };
  McResult out;
  out.V = est(tot.v, tot.v2);
  for (int a = 0; a < r; ++a) out.Z.push_back(est(tot.z[a], tot.z2[a]));
  return out;
}

void require_decoupled(const ModelSpec& m) {
  if (!m.decoupled()) throw std::invalid_argument("decoupled_core: model has mu/eta feedbacks; use the coupled engine");
}

}  // namespace

std::vector<McResult> evaluate_many(const ModelSpec& model, const PathSpec& spec, const std::vector<Functional>& fs) {
  detail::check_spec(model, spec);
  std::size_t n_chunks = (spec.n_paths + kChunk - 1) / kChunk, nf = fs.size();
  std::vector<std::vector<Sums>> chunks(nf, std::vector<Sums>(n_chunks));
  parallel_for(n_chunks, [&](std::size_t c) {
    detail::Walker w(model, spec);
    std::vector<Sums> s(nf);
    for (auto& si : s) {
      si.z.assign(model.r, 0.0);
      si.z2.assign(model.r, 0.0);
    }
    std::size_t end = std::min(spec.n_paths, (c + 1) * kChunk);
    for (std::size_t p = c * kChunk; p < end; ++p) {
      auto o = run_path(model, spec, w, p, fs, true);
      for (std::size_t i = 0; i < nf; ++i) {
        const PathValue& f = o.f[i];
        s[i].v += f.value;
        s[i].v2 += f.value * f.value;
        for (int a = 0; a < model.r; ++a) {
          s[i].z[a] += f.dvalue(a);
          s[i].z2[a] += f.dvalue(a) * f.dvalue(a);
        }
      }
    }
    for (std::size_t i = 0; i < nf; ++i) chunks[i][c] = std::move(s[i]);
  });
  std::vector<McResult> out;
  for (std::size_t i = 0; i < nf; ++i) out.push_back(reduce(chunks[i], spec.n_paths, model.r));
  return out;
}

McResult evaluate(const ModelSpec& model, const PathSpec& spec, bool terminal, const SourceFn& source) {
  return evaluate_many(model, spec, {Functional{terminal ? model.payoff : PayoffFn{}, source}}).front();
}

std::vector<double> stochastic_discount(const ModelSpec& model, const PathSpec& spec) {
  detail::check_spec(model, spec);
  std::vector<double> out(spec.n_paths);
  std::size_t n_chunks = (spec.n_paths + kChunk - 1) / kChunk;
  parallel_for(n_chunks, [&](std::size_t c) {
    detail::Walker w(model, spec);
    std::size_t end = std::min(spec.n_paths, (c + 1) * kChunk);
    for (std::size_t p = c * kChunk; p < end; ++p) out[p] = run_path(model, spec, w, p, {}, false).discount;
  });
  return out;
}

OrderFunctions from_result(const OrderResult& r) {
  const Surface* v = &r.V;
  const Surface* z = &r.Z;
  return {[v](double t, const Vec& x) { return (*v)(t, x(0)); }, [z](double t, const Vec& x) { return vec1((*z)(t, x(0))); }};
}

McResult order0(const ModelSpec& model, const PathSpec& spec) {
  require_decoupled(model);
  return evaluate(model, spec, true, {});
}

SourceFn order_source(const ModelSpec& m, const std::vector<OrderFunctions>& prev, int i) {
  if (i < 1 || i > 2) throw std::invalid_argument("order_source: orders 1 and 2 only");
  if (static_cast<int>(prev.size()) < i) throw std::invalid_argument("order_source: missing previous orders");
  if (!m.g) return [](double, const Vec&) { return 0.0; };
  if (i == 1) {
    return [&m, p0 = prev[0]](double u, const Vec& x) { return m.eval_g(u, x, p0.V(u, x), p0.Z(u, x)); };
  }
  return [&m, p0 = prev[0], p1 = prev[1]](double u, const Vec& x) {
    double v0 = p0.V(u, x);
    Vec z0 = p0.Z(u, x);
    return m.eval_dg_dv(u, x, v0, z0) * p1.V(u, x) + m.eval_dg_dz(u, x, v0, z0).dot(p1.Z(u, x));
  };
}

McResult order_i(const ModelSpec& model, const PathSpec& spec, const std::vector<OrderFunctions>& prev, int i) {
  require_decoupled(model);
  if (i == 0) return order0(model, spec);
  return evaluate(model, spec, false, order_source(model, prev, i));
}

OrderResult order_surface(const ModelSpec& model, const std::vector<OrderFunctions>& prev, int i,
                          const SurfaceSpec& grid) {
  require_decoupled(model);
  if (model.d != 1 || model.r != 1) throw std::invalid_argument("order_surface: surfaces need d = r = 1");
  if (grid.t.empty() || grid.x.size() < 2) throw std::invalid_argument("order_surface: grid too small");
  if (grid.t.back() > model.T) throw std::invalid_argument("order_surface: grid extends beyond T");
  SourceFn src = i == 0 ? SourceFn{} : order_source(model, prev, i);
  OrderResult out;
  out.order = i;
  out.V = Surface(grid.t, grid.x);
  out.Z = Surface(grid.t, grid.x);
  for (std::size_t it = 0; it < grid.t.size(); ++it) {
    double t = grid.t[it];
    for (std::size_t ix = 0; ix < grid.x.size(); ++ix) {
      Vec x = vec1(grid.x[ix]);
      if (model.T - t < 1e-12) {
        double h = fd_step(x(0));
        double slope = (model.payoff(vec1(x(0) + h)) - model.payoff(vec1(x(0) - h))) / (2 * h);
        out.V.at(it, ix) = i == 0 ? model.payoff(x) : 0.0;
        out.Z.at(it, ix) = i == 0 ? slope * model.vol(t, x)(0, 0) : 0.0;
        continue;
      }
      PathSpec s;
      s.t = t;
      s.x = x;
      s.mesh = euler_mesh(t, model.T, grid.steps_per_unit);
      s.n_paths = grid.n_paths;
      s.seed = grid.seed;
      auto r = evaluate(model, s, i == 0, src);
      out.V.at(it, ix) = r.V.value;
      out.Z.at(it, ix) = r.Z[0].value;
    }
  }
  out.V.finalize();
  out.Z.finalize();
  return out;
}

}  // namespace fbsde::mc
