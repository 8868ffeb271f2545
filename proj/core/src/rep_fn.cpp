#include "fitzflow/rep_fn.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace fitzflow {

namespace {

constexpr double kEqTol = 1e-6;

// Lattice iteration over a box, density nodes per axis.
template <typename F>
void for_lattice(const Box& box, int density, F&& fn) {
  int d = box.dim();
  std::vector<int> idx(d, 0);
  while (true) {
    Vec v(d);
    for (int i = 0; i < d; ++i)
      v[i] = box.lo[i] + idx[i] * (box.hi[i] - box.lo[i]) / (density - 1);
    fn(v);
    int ax = 0;
    while (ax < d && ++idx[ax] == density) idx[ax++] = 0;
    if (ax == d) break;
  }
}

double lattice_cell(const Box& box, int density) {
  double c = 0.0;
  for (int i = 0; i < box.dim(); ++i)
    c = std::max(c, (box.hi[i] - box.lo[i]) / (density - 1));
  return c;
}

}  // namespace

RepFn::RepFn(int dim, RepRepr repr) : dim_(dim), repr_(std::move(repr)) {
  if (dim_ <= 0) throw std::invalid_argument("RepFn: dim must be positive");
  if (const auto* f = std::get_if<FitzOfGraph>(&repr_)) {
    if (f->graph.pairs.empty())
      throw std::invalid_argument("FitzOfGraph: empty graph");
  } else if (const auto* b = std::get_if<FbForm>(&repr_)) {
    if (!(b->b > 0)) throw std::invalid_argument("FbForm: b > 0 required");
  }
}

ExtReal RepFn::eval(const Vec& v, const Vec& vstar) const {
  if (v.size() != dim_ || vstar.size() != dim_)
    throw std::invalid_argument("RepFn::eval: dimension mismatch");
  return std::visit(
      [&](const auto& r) -> ExtReal {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, FitzOfGraph>) {
          double best = -std::numeric_limits<double>::infinity();
          for (const auto& [v0, w0] : r.graph.pairs)
            best = std::max(best, vstar.dot(v0) - w0.dot(v0 - v));
          return ExtReal(best);
        } else if constexpr (std::is_same_v<T, FenchelOfPotential>) {
          return r.phi.eval(v) + r.phistar.eval(vstar);
        } else if constexpr (std::is_same_v<T, FbForm>) {
          return ExtReal(r.b * (v.squaredNorm() + vstar.squaredNorm()));
        } else if constexpr (std::is_same_v<T, FitzIdentityForm>) {
          return ExtReal(0.25 * (v + vstar).squaredNorm());
        } else if constexpr (std::is_same_v<T, LinearOpRep>) {
          Vec Av = r.A * v;
          double tol = 1e-9 * (1.0 + Av.norm() + vstar.norm());
          if ((vstar - Av).lpNorm<Eigen::Infinity>() > tol)
            return ExtReal::infinity();
          return ExtReal(Av.dot(v));
        } else if constexpr (std::is_same_v<T, InfConvRep>) {
          Vec Av = r.A * v;
          ExtReal g1 = r.g1->eval(v, vstar - Av);
          return g1 + ExtReal(Av.dot(v));
        } else {  // DualTransported
          double best = -std::numeric_limits<double>::infinity();
          const Box& b = r.box;
          for_lattice(b, r.density, [&](const Vec& v0) {
            for_lattice(b, r.density, [&](const Vec& w0) {
              ExtReal g = r.g->eval(v0, w0);
              if (g.is_inf()) return;
              best = std::max(best, vstar.dot(v0) + w0.dot(v) - g.value());
            });
          });
          return ExtReal(best);
        }
      },
      repr_);
}

ExtReal RepFn::eval1(double v, double vstar) const {
  Vec a(1), b(1);
  a[0] = v;
  b[0] = vstar;
  return eval(a, b);
}

std::pair<Vec, Vec> RepFn::subgrad(const Vec& v, const Vec& vstar) const {
  return std::visit(
      [&](const auto& r) -> std::pair<Vec, Vec> {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, FitzOfGraph>) {
          double best = -std::numeric_limits<double>::infinity();
          const std::pair<Vec, Vec>* arg = nullptr;
          for (const auto& p : r.graph.pairs) {
            double val = vstar.dot(p.first) - p.second.dot(p.first - v);
            if (val > best) {
              best = val;
              arg = &p;
            }
          }
          return {arg->second, arg->first};
        } else if constexpr (std::is_same_v<T, FenchelOfPotential>) {
          return {r.phi.subgradient(v), r.phistar.subgradient(vstar)};
        } else if constexpr (std::is_same_v<T, FbForm>) {
          return {2.0 * r.b * v, 2.0 * r.b * vstar};
        } else if constexpr (std::is_same_v<T, FitzIdentityForm>) {
          Vec s = 0.5 * (v + vstar);
          return {s, s};
        } else if constexpr (std::is_same_v<T, LinearOpRep>) {
          throw std::domain_error("subgrad: indicator-type representative");
        } else if constexpr (std::is_same_v<T, InfConvRep>) {
          auto [gv, gw] = r.g1->subgrad(v, vstar - r.A * v);
          Vec dv = gv - r.A.transpose() * gw + (r.A + r.A.transpose()) * v;
          return {dv, gw};
        } else {  // DualTransported
          double best = -std::numeric_limits<double>::infinity();
          Vec av, aw;
          for_lattice(r.box, r.density, [&](const Vec& v0) {
            for_lattice(r.box, r.density, [&](const Vec& w0) {
              ExtReal g = r.g->eval(v0, w0);
              if (g.is_inf()) return;
              double val = vstar.dot(v0) + w0.dot(v) - g.value();
              if (val > best) {
                best = val;
                av = w0;
                aw = v0;
              }
            });
          });
          return {av, aw};
        }
      },
      repr_);
}

bool RepFn::smooth() const {
  return std::visit(
      [&](const auto& r) -> bool {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, FbForm> ||
                      std::is_same_v<T, FitzIdentityForm>) {
          return true;
        } else if constexpr (std::is_same_v<T, FenchelOfPotential>) {
          return r.phi.smooth() && r.phistar.smooth();
        } else if constexpr (std::is_same_v<T, InfConvRep>) {
          return r.g1->smooth();
        } else {
          return false;
        }
      },
      repr_);
}

ExtReal RepFn::null_gap(const Vec& v, const Vec& vstar) const {
  ExtReal g = eval(v, vstar);
  if (g.is_inf()) return ExtReal::infinity();
  return ExtReal(g.value() - v.dot(vstar));
}

std::pair<double, double> RepFn::membership_diagnostics(const Box& box,
                                                        int nprobes,
                                                        unsigned seed) const {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  auto draw = [&]() {
    Vec v(dim_);
    for (int i = 0; i < dim_; ++i)
      v[i] = box.lo[i] + uni(rng) * (box.hi[i] - box.lo[i]);
    return v;
  };
  double min_margin = std::numeric_limits<double>::infinity();
  double worst_conv = 0.0;
  for (int k = 0; k < nprobes; ++k) {
    Vec v = draw(), w = draw();
    ExtReal g = eval(v, w);
    if (!g.is_inf())
      min_margin = std::min(min_margin, g.value() - v.dot(w));
    // midpoint convexity against a second random point
    Vec v2 = draw(), w2 = draw();
    ExtReal g2 = eval(v2, w2);
    ExtReal gm = eval(0.5 * (v + v2), 0.5 * (w + w2));
    if (!g.is_inf() && !g2.is_inf() && !gm.is_inf()) {
      double deficit = gm.value() - 0.5 * (g.value() + g2.value());
      worst_conv = std::max(worst_conv, deficit);
    }
  }
  return {min_margin, worst_conv};
}

RepFn RepFn::fitzpatrick_of(GraphSample graph) {
  int d = (int)graph.pairs.front().first.size();
  return RepFn(d, FitzOfGraph{std::move(graph)});
}
RepFn RepFn::fenchel_of(const ConvexFn& phi) {
  return RepFn(phi.dim(), FenchelOfPotential{phi, phi.conjugate()});
}
RepFn RepFn::fb(double b, int dim) { return RepFn(dim, FbForm{b}); }
RepFn RepFn::fitz_identity(int dim) { return RepFn(dim, FitzIdentityForm{}); }
RepFn RepFn::linear_op_rep(const Mat& A) {
  return RepFn((int)A.rows(), LinearOpRep{A});
}

RepresentationReport represents_check(const RepFn& g, const MonotoneOp& op,
                                      const Box& box, int density) {
  if (g.dim() != op.dim())
    throw std::invalid_argument("represents_check: dimension mismatch");
  RepresentationReport rep;
  rep.min_margin = std::numeric_limits<double>::infinity();
  GraphSample gs;
  try {
    gs = op.graph_sample(box, density);
  } catch (const std::domain_error&) {
    // improper restriction: no graph points in the box
  }
  double cell = lattice_cell(box, density);

  // probes: full (v, v*) lattice for d = 1, random pairs otherwise
  std::vector<std::pair<Vec, Vec>> probes;
  if (op.dim() == 1) {
    for_lattice(box, density, [&](const Vec& v) {
      for_lattice(box, density, [&](const Vec& w) { probes.emplace_back(v, w); });
    });
  } else {
    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    int n = density * density;
    for (int k = 0; k < n; ++k) {
      Vec v(op.dim()), w(op.dim());
      for (int i = 0; i < op.dim(); ++i) {
        v[i] = box.lo[i] + uni(rng) * (box.hi[i] - box.lo[i]);
        w[i] = box.lo[i] + uni(rng) * (box.hi[i] - box.lo[i]);
      }
      probes.emplace_back(v, w);
    }
  }

  for (const auto& [v, w] : probes) {
    ExtReal gap = g.null_gap(v, w);
    if (gap.is_inf()) continue;
    rep.min_margin = std::min(rep.min_margin, gap.value());
    if (std::abs(gap.value()) <= kEqTol) {
      // spurious if not within 1.5 lattice cells of a graph point
      double dist = std::numeric_limits<double>::infinity();
      for (const auto& [v0, w0] : gs.pairs)
        dist = std::min(dist, std::max((v - v0).lpNorm<Eigen::Infinity>(),
                                       (w - w0).lpNorm<Eigen::Infinity>()));
      if (dist > 1.5 * cell) rep.spurious.emplace_back(v, w);
    }
  }

  rep.worst_graph_gap = 0.0;
  int eq = 0;
  for (const auto& [v0, w0] : gs.pairs) {
    ExtReal gap = g.null_gap(v0, w0);
    double gv = gap.is_inf() ? std::numeric_limits<double>::infinity()
                             : std::abs(gap.value());
    rep.worst_graph_gap = std::max(rep.worst_graph_gap, gv);
    if (gv <= kEqTol) ++eq;
  }
  rep.equality_fraction = gs.pairs.empty() ? 0.0 : (double)eq / gs.pairs.size();
  double scale = 1.0 + box.hi.lpNorm<Eigen::Infinity>();
  rep.domination_ok = rep.min_margin >= -1e-9 * scale * scale;
  rep.equality_ok = !gs.pairs.empty() && rep.worst_graph_gap <= kEqTol;
  return rep;
}

RepFn conjugate_rep(const RepFn& g, const Box& box, int density) {
  // analytic shortcuts
  if (const auto* f = std::get_if<FenchelOfPotential>(&g.repr())) {
    // (φ(v)+φ*(v*))* ∘ 𝓘 = φ**(v) + φ*(v*) = the same function
    (void)f;
    return g;
  }
  if (const auto* b = std::get_if<FbForm>(&g.repr()))
    return RepFn::fb(1.0 / (4.0 * b->b), g.dim());
  if (std::holds_alternative<FitzIdentityForm>(g.repr()))
    return RepFn::linear_op_rep(Mat::Identity(g.dim(), g.dim()));
  auto gp = std::make_shared<RepFn>(g);
  return RepFn(g.dim(), DualTransported{gp, box, density});
}

BandReport band_check(const MonotoneOp& op, const RepFn& g, const Box& box,
                      int density) {
  if (!op.maximal())
    throw std::invalid_argument("band_check: operator must be maximal");
  // the sup defining f_α and the transported conjugate f_α*∘𝓘 can attain
  // their maxima outside the probe box; both are realized on a 3x enlarged
  // lattice (same cell size) while g is probed on `box` only. The Fitzpatrick
  // values on the enlarged lattice are tabulated once so the double sup stays
  // quadratic, not cubic, in the lattice size.
  Box big{3.0 * box.lo, 3.0 * box.hi};
  int big_density = 3 * (density - 1) + 1;
  GraphSample gs = op.graph_sample(big, big_density);
  RepFn falpha = RepFn::fitzpatrick_of(gs);

  std::vector<std::pair<Vec, Vec>> lattice;  // (point pair, value in .second[?])
  std::vector<double> ftab;
  for_lattice(big, big_density, [&](const Vec& v0) {
    for_lattice(big, big_density, [&](const Vec& w0) {
      ExtReal fv = falpha.eval(v0, w0);
      if (!fv.is_inf()) {
        lattice.emplace_back(v0, w0);
        ftab.push_back(fv.value());
      }
    });
  });
  auto upper_at = [&](const Vec& v, const Vec& w) {
    double best = -std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < lattice.size(); ++i)
      best = std::max(best, w.dot(lattice[i].first) +
                                lattice[i].second.dot(v) - ftab[i]);
    return best;
  };

  double cell = lattice_cell(box, density);
  // one-sided sampling slack: the sampled Fitzpatrick sup under-estimates by
  // O(cell) on Lipschitz graphs, and the lattice conjugate under-estimates
  // the true upper envelope likewise
  double scale = 1.0 + box.hi.lpNorm<Eigen::Infinity>();
  double slack = 3.0 * cell * scale;

  BandReport rep{true, std::numeric_limits<double>::infinity(),
                 std::numeric_limits<double>::infinity(), slack};
  for_lattice(box, density, [&](const Vec& v) {
    for_lattice(box, density, [&](const Vec& w) {
      ExtReal gv = g.eval(v, w);
      if (gv.is_inf()) return;
      ExtReal lo = falpha.eval(v, w);
      if (!lo.is_inf())
        rep.lower_margin = std::min(rep.lower_margin, gv.value() - lo.value());
      rep.upper_margin =
          std::min(rep.upper_margin, upper_at(v, w) - gv.value());
    });
  });
  rep.ok = rep.lower_margin >= -1e-6 - slack && rep.upper_margin >= -1e-6 - slack;
  return rep;
}

RepFn inf_convolution(const RepFn& g1, const MonotoneOp& alpha2) {
  const auto* lin = std::get_if<LinearSPDOp>(&alpha2.repr());
  if (!lin)
    throw std::invalid_argument(
        "inf_convolution: closed form requires a linear operator");
  if (g1.dim() != alpha2.dim())
    throw std::invalid_argument("inf_convolution: dimension mismatch");
  auto gp = std::make_shared<RepFn>(g1);
  return RepFn(g1.dim(), InfConvRep{gp, lin->A});
}

double self_dual_check(const RepFn& g, const Box& box, int density) {
  RepFn dual = conjugate_rep(g, box, density);
  double worst = 0.0;
  for_lattice(box, density, [&](const Vec& v) {
    for_lattice(box, density, [&](const Vec& w) {
      ExtReal a = g.eval(v, w), b = dual.eval(v, w);
      if (a.is_inf() && b.is_inf()) return;
      if (a.is_inf() || b.is_inf()) {
        worst = std::numeric_limits<double>::infinity();
        return;
      }
      worst = std::max(worst, std::abs(a.value() - b.value()));
    });
  });
  return worst;
}

}  // namespace fitzflow
