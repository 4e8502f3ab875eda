#include <stdexcept>

#include "fbsde/asymptotic.hpp"
#include "fbsde/numerics/parallel.hpp"

namespace fbsde::asym {
namespace {

// Expansions of the lower orders at the few (u, y) points a finite-difference
// stencil visits; the stencil reuses each point for several delta values.
class LowerOrders {
 public:
  LowerOrders(const ModelSpec& m, const DeltaSde& s, int order, std::size_t nodes)
      : m_(m), s_(s), order_(order), nodes_(nodes) {}

  const std::vector<Expansion>& at(double u, const Vec& y) {
    for (const auto& e : cache_) {
      if (e.u == u && e.y == y) return e.orders;
    }
    Entry e{u, y, {}};
    for (int j = 0; j < order_; ++j) e.orders.push_back(recursion_bridge(m_, s_, j, u, y, nodes_));
    if (cache_.size() >= kSlots) cache_.erase(cache_.begin());
    cache_.push_back(std::move(e));
    return cache_.back().orders;
  }

 private:
  static constexpr std::size_t kSlots = 16;
  struct Entry {
    double u;
    Vec y;
    std::vector<Expansion> orders;
  };
  const ModelSpec& m_;
  const DeltaSde& s_;
  int order_;
  std::size_t nodes_;
  std::vector<Entry> cache_;
};

void check_model(const ModelSpec& m, const DeltaSde& s) {
  m.validate();
  s.validate();
  if (!m.decoupled()) throw std::invalid_argument("recursion_bridge: model must be decoupled");
  if (m.theta) throw std::invalid_argument("recursion_bridge: absorb theta into the drift first");
  if (m.d != s.d || m.r != s.r) throw std::invalid_argument("recursion_bridge: model and delta-SDE dimensions differ");
}

}  // namespace

Expansion recursion_bridge(const ModelSpec& model, const DeltaSde& sde, int order, double t, const Vec& x,
                           std::size_t nodes) {
  check_model(model, sde);
  if (order < 0 || order > 2) throw std::invalid_argument("recursion_bridge: orders 0, 1, 2 only");
  if (t > model.T) throw std::invalid_argument("recursion_bridge: t beyond maturity");
  Discount disc{model.c, {}};
  ExpansionTables tab = build_tables(sde, t, x, model.T, nodes);
  if (order == 0) {
    Density dens{[&model](double, const Vec& y, double) { return model.payoff(y); }, {}, true};
    return expand(tab, disc, dens);
  }
  if (!model.g) {
    Expansion zero;
    zero.Z.c1 = Vec::Zero(sde.r);
    zero.Z.c2 = Vec::Zero(sde.r);
    return zero;
  }
  LowerOrders lower(model, sde, order, nodes);
  Density dens;
  if (order == 1) {
    dens.G = [&](double u, const Vec& y, double delta) {
      const auto& p = lower.at(u, y);
      return model.eval_g(u, y, p[0].V.at(delta), p[0].Z.at(delta));
    };
  } else {
    dens.G = [&](double u, const Vec& y, double delta) {
      const auto& p = lower.at(u, y);
      double v0 = p[0].V.at(delta);
      Vec z0 = p[0].Z.at(delta);
      return model.eval_dg_dv(u, y, v0, z0) * p[1].V.at(delta) + model.eval_dg_dz(u, y, v0, z0).dot(p[1].Z.at(delta));
    };
  }
  return expand(tab, disc, dens);
}

OrderResult bridge_surface(const ModelSpec& model, const DeltaSde& sde, int order, const std::vector<double>& t,
                           const std::vector<double>& x, double delta, std::size_t nodes) {
  if (sde.d != 1 || sde.r != 1) throw std::invalid_argument("bridge_surface: d = r = 1 only");
  if (t.empty() || x.size() < 2) throw std::invalid_argument("bridge_surface: grid too small");
  OrderResult out;
  out.order = order;
  out.V = Surface(t, x);
  out.Z = Surface(t, x);
  std::size_t nx = x.size();
  std::vector<Expansion> cells(t.size() * nx);
  parallel_for(cells.size(), [&](std::size_t i) {
    cells[i] = recursion_bridge(model, sde, order, t[i / nx], vec1(x[i % nx]), nodes);
  });
  for (std::size_t i = 0; i < cells.size(); ++i) {
    out.V.at(i / nx, i % nx) = cells[i].V.at(delta);
    out.Z.at(i / nx, i % nx) = cells[i].Z.at(delta)(0);
  }
  out.V.finalize();
  out.Z.finalize();
  return out;
}

}  // namespace fbsde::asym
