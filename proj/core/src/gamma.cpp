#include "fitzflow/gamma.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <stdexcept>

namespace fitzflow {

namespace {

Vec random_in_box(const Box& box, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vec x(box.dim());
  for (int i = 0; i < box.dim(); ++i)
    x[i] = box.lo[i] + u(rng) * (box.hi[i] - box.lo[i]);
  return x;
}

Vec random_unit(int dim, std::mt19937& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vec d(dim);
  do {
    for (int i = 0; i < dim; ++i) d[i] = g(rng);
  } while (d.norm() < 1e-12);
  return d / d.norm();
}

std::vector<int> tail_half(const std::vector<int>& n_list) {
  if (n_list.empty()) throw std::invalid_argument("empty n_list");
  return {n_list.begin() + (int)n_list.size() / 2, n_list.end()};
}

// Limit of a tail sequence d_n modeled as d_inf + c/n: least-squares intercept
// in the regressor 1/n. Removes the O(1/n) bias a plain tail extremum carries.
// Fewer than two finite samples: +inf (certificate not established).
double tail_intercept(const std::vector<int>& ns, const std::vector<double>& ds) {
  std::vector<double> u, d;
  for (size_t i = 0; i < ns.size(); ++i)
    if (std::isfinite(ds[i])) {
      u.push_back(1.0 / ns[i]);
      d.push_back(ds[i]);
    }
  if (d.size() < 2) return std::numeric_limits<double>::infinity();
  double mu = 0, md = 0;
  for (size_t i = 0; i < u.size(); ++i) {
    mu += u[i];
    md += d[i];
  }
  mu /= u.size();
  md /= d.size();
  double suu = 0, sud = 0;
  for (size_t i = 0; i < u.size(); ++i) {
    suu += (u[i] - mu) * (u[i] - mu);
    sud += (u[i] - mu) * (d[i] - md);
  }
  if (suu < 1e-30) return md;
  return md - (sud / suu) * mu;
}

}  // namespace

// ---------------------------------------------------------------------------
// FnSequence
// ---------------------------------------------------------------------------

FnSequence FnSequence::of_convex(std::function<ConvexFn(int)> gen,
                                 const ConvexFn& lim) {
  auto cache = std::make_shared<std::map<int, ConvexFn>>();
  auto gen_sh = std::make_shared<std::function<ConvexFn(int)>>(std::move(gen));
  FnSequence s;
  s.dim = lim.dim();
  s.member = [cache, gen_sh](int n, const Vec& x) {
    auto it = cache->find(n);
    if (it == cache->end()) it = cache->emplace(n, (*gen_sh)(n)).first;
    return it->second.eval(x);
  };
  auto lp = std::make_shared<ConvexFn>(lim);
  s.limit = [lp](const Vec& x) { return lp->eval(x); };

  // equi-coercivity witnesses fitted on a coarse probe set for n = 1
  double c1 = std::numeric_limits<double>::infinity(), c2 = 0.0;
  for (int i = -8; i <= 8; ++i) {
    Vec x = Vec::Constant(s.dim, 0.25 * i);
    ExtReal f = s.member(1, x);
    if (!f.is_finite()) continue;
    double ns = x.squaredNorm();
    if (ns > 1e-9) c1 = std::min(c1, f.value() / ns);
    c2 = std::max(c2, f.value() / (1.0 + ns));
  }
  s.C1 = std::max(0.0, std::isfinite(c1) ? c1 : 0.0);
  s.C2 = c2;
  s.C3 = c2;
  return s;
}

FnSequence FnSequence::of_rep(std::function<RepFn(int)> gen, const RepFn& lim) {
  auto cache = std::make_shared<std::map<int, RepFn>>();
  auto gen_sh = std::make_shared<std::function<RepFn(int)>>(std::move(gen));
  int d = lim.dim();
  auto split = [d](const Vec& x) {
    return std::make_pair(Vec(x.head(d)), Vec(x.tail(d)));
  };
  FnSequence s;
  s.dim = 2 * d;
  s.member = [cache, gen_sh, split](int n, const Vec& x) {
    auto it = cache->find(n);
    if (it == cache->end()) it = cache->emplace(n, (*gen_sh)(n)).first;
    auto [v, vs] = split(x);
    return it->second.eval(v, vs);
  };
  auto lp = std::make_shared<RepFn>(lim);
  s.limit = [lp, split](const Vec& x) {
    auto [v, vs] = split(x);
    return lp->eval(v, vs);
  };
  double c2 = 0.0;
  for (int i = -8; i <= 8; ++i) {
    Vec x = Vec::Constant(s.dim, 0.25 * i);
    ExtReal f = s.member(1, x);
    if (f.is_finite()) c2 = std::max(c2, f.value() / (1.0 + x.squaredNorm()));
  }
  s.C1 = 0.0;
  s.C2 = c2;
  s.C3 = c2;
  return s;
}

// ---------------------------------------------------------------------------
// static Γ-check
// ---------------------------------------------------------------------------

GammaVerdict gamma_check_static(const FnSequence& seq, const Box& box,
                                const std::vector<int>& n_list, double tol,
                                unsigned seed, int probes) {
  if (box.dim() != seq.dim)
    throw std::invalid_argument("gamma_check_static: box dimension mismatch");
  std::mt19937 rng(seed);
  std::vector<int> tail = tail_half(n_list);

  GammaVerdict out;
  out.seed = seed;
  out.liminf_ok = true;
  out.recovery_ok = true;
  out.worst_liminf.deficit = -std::numeric_limits<double>::infinity();
  out.worst_recovery.deficit = -std::numeric_limits<double>::infinity();

  for (int p = 0; p < probes; ++p) {
    Vec w = p == 0 ? Vec(Vec::Zero(seq.dim)) : random_in_box(box, rng);
    ExtReal flim = seq.limit(w);
    if (flim.is_inf()) continue;  // finite certificate: finite targets only
    double scale = tol * (1.0 + std::abs(flim.value()));

    // liminf along constant and 1/n-perturbed approaching sequences: the
    // shortfall f_lim(w_n) − f_n(w_n) is recorded along the tail and
    // extrapolated to n = ∞ (continuity of the limit transfers the bound to
    // f_lim(w) ≤ liminf f_n(w_n))
    std::vector<Vec> dirs = {Vec(Vec::Zero(seq.dim))};
    for (int r = 0; r < 3; ++r) dirs.push_back(random_unit(seq.dim, rng));
    for (const Vec& dir : dirs) {
      std::vector<double> shortfall;
      for (int n : tail) {
        Vec wn = w + dir / n;
        ExtReal fn = seq.member(n, wn);
        if (fn.is_inf()) {
          // +inf members satisfy the liminf inequality trivially
          shortfall.push_back(-std::numeric_limits<double>::infinity());
          continue;
        }
        ExtReal base = seq.limit(wn);
        double b = base.is_finite() ? base.value() : flim.value();
        shortfall.push_back(b - fn.value());
      }
      for (double& s : shortfall)
        if (!std::isfinite(s)) s = 0.0;  // trivial members contribute nothing
      double deficit = tail_intercept(tail, shortfall);
      if (deficit > out.worst_liminf.deficit)
        out.worst_liminf = {w, deficit, tail.back()};
      if (deficit > scale) out.liminf_ok = false;
    }

    // recovery: local random descent from the constant sequence (radius 1/n
    // keeps candidates approaching w); excess over the limit value at the
    // found candidates is extrapolated along the tail. A positive intercept
    // means "recovery not found", never "does not exist".
    std::vector<double> excess;
    for (int n : tail) {
      Vec x = w;
      ExtReal f0 = seq.member(n, x);
      double best = f0.is_inf() ? std::numeric_limits<double>::infinity()
                                : f0.value();
      double radius = 1.0 / n;
      for (int trial = 0; trial < 30; ++trial) {
        Vec cand = x + radius * random_unit(seq.dim, rng);
        ExtReal fc = seq.member(n, cand);
        if (fc.is_finite() && fc.value() < best) {
          best = fc.value();
          x = cand;
        } else {
          radius *= 0.8;
        }
      }
      ExtReal base = seq.limit(x);
      double b = base.is_finite() ? base.value() : flim.value();
      excess.push_back(best - b);
    }
    double deficit = tail_intercept(tail, excess);
    if (deficit > out.worst_recovery.deficit)
      out.worst_recovery = {w, deficit, tail.back()};
    if (deficit > scale) out.recovery_ok = false;
  }
  if (!std::isfinite(out.worst_liminf.deficit)) out.worst_liminf.deficit = 0.0;
  if (!std::isfinite(out.worst_recovery.deficit))
    out.worst_recovery.deficit = 0.0;
  return out;
}

// ---------------------------------------------------------------------------
// Kuratowski graph diagnostic
// ---------------------------------------------------------------------------

KuratowskiReport kuratowski_graph_check(const std::function<RepFn(int)>& gen,
                                        const MonotoneOp& limit_op,
                                        const Box& box,
                                        const std::vector<int>& n_list,
                                        int density) {
  if (limit_op.dim() != 1)
    throw std::invalid_argument("kuratowski_graph_check: d = 1 lattice only");
  double lo = box.lo[0], hi = box.hi[0];
  double cell = (hi - lo) / (density - 1) * std::numbers::sqrt2;
  double scale = 1.0 + std::max(std::abs(lo), std::abs(hi));
  double eq_tol = 1e-5 * scale * scale;

  GraphSample limit_graph = limit_op.graph_sample(box, density);
  std::vector<int> tail = tail_half(n_list);

  KuratowskiReport rep;
  rep.upper_limit_contained = true;
  double last_sup = std::numeric_limits<double>::infinity();
  for (int n : tail) {
    RepFn g = gen(n);
    std::vector<std::pair<double, double>> eq_set;
    for (int i = 0; i < density; ++i)
      for (int j = 0; j < density; ++j) {
        double v = lo + i * (hi - lo) / (density - 1);
        double vs = lo + j * (hi - lo) / (density - 1);
        ExtReal gap = g.null_gap(Vec::Constant(1, v), Vec::Constant(1, vs));
        if (gap.is_finite() && gap.value() <= eq_tol) eq_set.push_back({v, vs});
      }
    // containment: every equality point must be near the limit graph
    for (auto [v, vs] : eq_set) {
      double d = std::numeric_limits<double>::infinity();
      for (const auto& [gv, gw] : limit_graph.pairs)
        d = std::min(d, std::hypot(v - gv[0], vs - gw[0]));
      if (d > 3.0 * cell) rep.upper_limit_contained = false;
    }
    // coverage: how far the limit graph is from the equality set
    double sup = 0.0;
    for (const auto& [gv, gw] : limit_graph.pairs) {
      double d = std::numeric_limits<double>::infinity();
      for (auto [v, vs] : eq_set)
        d = std::min(d, std::hypot(gv[0] - v, gw[0] - vs));
      sup = std::max(sup, d);
    }
    last_sup = sup;
  }
  rep.worst_graph_distance = last_sup;
  rep.graphs_converge = last_sup <= 3.0 * cell;
  return rep;
}

// ---------------------------------------------------------------------------
// evolutionary Γ-check
// ---------------------------------------------------------------------------

std::vector<XiWeight> dyadic_xi_family() {
  std::vector<XiWeight> xs;
  for (int k = 0; k < 16; ++k) {
    double a = k / 16.0, b = (k + 1) / 16.0;
    bool last = k == 15;
    xs.push_back({"dyadic4_" + std::to_string(k), [a, b, last](double s) {
                    return (s >= a && (s < b || (last && s <= b))) ? 1.0 : 0.0;
                  }});
  }
  xs.push_back({"const_1", [](double) { return 1.0; }});
  xs.push_back({"const_half", [](double) { return 0.5; }});
  return xs;
}

namespace {

// [ψ_n, ξ] over the grid with exact μ-weights; n < 0 evaluates the limit.
double weighted_value(const IntegrandSequence& seq, const TimeGrid& g,
                      const XiWeight& xi, const std::vector<Vec>& mids, int n) {
  double acc = 0.0;
  for (int k = 0; k < g.N; ++k) {
    double t = g.mid(k);
    double phi = n < 0 ? seq.limit(t, mids[k]) : seq.phi(n, t, mids[k]);
    acc += phi * xi.xi(t / g.T) * g.mu_weight(k);
  }
  return acc;
}

}  // namespace

GammaVerdict evolutionary_gamma_check(const IntegrandSequence& seq,
                                      const TimeGrid& grid, const Box& box,
                                      const std::vector<int>& n_list,
                                      double tol, unsigned seed, int probes) {
  std::mt19937 rng(seed);
  std::vector<int> tail = tail_half(n_list);
  std::vector<XiWeight> xis = dyadic_xi_family();

  GammaVerdict out;
  out.seed = seed;
  out.liminf_ok = true;
  out.recovery_ok = true;
  out.translation_ok = true;
  out.worst_liminf.deficit = 0.0;
  out.worst_recovery.deficit = 0.0;
  for (const auto& xi : xis) out.weights_tested.push_back(xi.name);

  std::uniform_real_distribution<double> uphase(0.0, 2 * std::numbers::pi);
  for (int p = 0; p < probes; ++p) {
    // smooth trajectory probe w(t) = a + b·sin(2πt/T + θ), midpoint samples
    Vec a = random_in_box(box, rng), b = random_in_box(box, rng);
    double theta = uphase(rng);
    std::vector<Vec> mids(grid.N);
    for (int k = 0; k < grid.N; ++k)
      mids[k] =
          a + std::sin(2 * std::numbers::pi * grid.mid(k) / grid.T + theta) * b;

    for (const auto& xi : xis) {
      double lim = weighted_value(seq, grid, xi, mids, -1);
      double scale = tol * (1.0 + std::abs(lim));

      // liminf: constant and 1/n nodal perturbations; the shortfall against
      // the limit integrand at the same trajectory is extrapolated in 1/n
      for (int rep = 0; rep < 3; ++rep) {
        std::vector<double> shortfall;
        for (int n : tail) {
          std::vector<Vec> pert = mids;
          if (rep > 0)
            for (auto& m : pert) m += random_unit(box.dim(), rng) / n;
          double v = weighted_value(seq, grid, xi, pert, n);
          double base = weighted_value(seq, grid, xi, pert, -1);
          shortfall.push_back(base - v);
        }
        double deficit = tail_intercept(tail, shortfall);
        if (deficit > out.worst_liminf.deficit) {
          out.worst_liminf.deficit = deficit;
          out.worst_liminf.n = tail.back();
          out.worst_liminf.point = mids[0];
        }
        if (deficit > scale) out.liminf_ok = false;
      }

      // recovery from the constant sequence with a small nodal descent
      // budget; the excess over the limit value at the found candidates is
      // extrapolated along the tail
      std::vector<double> excess;
      for (int n : tail) {
        std::vector<Vec> x = mids;
        double best = weighted_value(seq, grid, xi, x, n);
        double radius = 1.0 / n;
        for (int trial = 0; trial < 15; ++trial) {
          std::vector<Vec> cand = x;
          for (auto& m : cand) m += radius * random_unit(box.dim(), rng);
          double v = weighted_value(seq, grid, xi, cand, n);
          if (v < best) {
            best = v;
            x = std::move(cand);
          } else {
            radius *= 0.8;
          }
        }
        excess.push_back(best - weighted_value(seq, grid, xi, x, -1));
      }
      double deficit = tail_intercept(tail, excess);
      if (deficit > out.worst_recovery.deficit) {
        out.worst_recovery.deficit = deficit;
        out.worst_recovery.n = tail.back();
        out.worst_recovery.point = mids[0];
      }
      if (deficit > scale) out.recovery_ok = false;
    }

    // time-translation diagnostic: uniform weights, cyclic midpoint shift
    if (seq.time_independent) {
      double s0 = 0.0, s1 = 0.0;
      int shift = grid.N / 4;
      for (int k = 0; k < grid.N; ++k) {
        s0 += seq.limit(grid.mid(k), mids[k]) * grid.tau();
        s1 += seq.limit(grid.mid(k), mids[(k + shift) % grid.N]) * grid.tau();
      }
      if (std::abs(s0 - s1) > 1e-9 * (1.0 + std::abs(s0)))
        out.translation_ok = false;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// structural stability
// ---------------------------------------------------------------------------

namespace {

StabilityReport run_stability(const FlowFamily& family,
                              const std::vector<int>& n_list,
                              const OptimizerConfig& cfg) {
  StabilityReport rep;
  rep.n_list = n_list;
  FlowSolution limit_sol = solve_reference(family.limit);

  std::vector<Trajectory> solutions;
  for (int n : n_list) {
    FlowProblem prob = family.problem(n);
    FlowSolution ref = solve_reference(prob);
    NullMinResult nm = solve_null_min(prob, family.rep(n), cfg);
    rep.distances.push_back(Trajectory::rel_l2_distance(ref.u, limit_sol.u));
    rep.null_values.push_back(nm.value);
    solutions.push_back(ref.u);
  }

  // log-log rate over the tail half, discarding pre-asymptotic members
  int half = (int)n_list.size() / 2;
  std::vector<double> lx, ly;
  for (int i = half; i < (int)n_list.size(); ++i) {
    if (rep.distances[i] > 1e-13) {
      lx.push_back(std::log((double)n_list[i]));
      ly.push_back(std::log(rep.distances[i]));
    }
  }
  if (lx.size() >= 2) {
    double mx = 0, my = 0;
    for (size_t i = 0; i < lx.size(); ++i) {
      mx += lx[i];
      my += ly[i];
    }
    mx /= lx.size();
    my /= ly.size();
    double sxx = 0, sxy = 0;
    for (size_t i = 0; i < lx.size(); ++i) {
      sxx += (lx[i] - mx) * (lx[i] - mx);
      sxy += (lx[i] - mx) * (ly[i] - my);
    }
    double slope = sxy / sxx;
    rep.fitted_rate = -slope;
    double ss = 0;
    for (size_t i = 0; i < lx.size(); ++i) {
      double r = ly[i] - my - slope * (lx[i] - mx);
      ss += r * r;
    }
    rep.fit_residual = std::sqrt(ss / lx.size());
  }

  // Richardson extrapolation assuming first-order decay with n-doubling
  Trajectory ext = solutions.back();
  if (solutions.size() >= 2) {
    const Trajectory& prev = solutions[solutions.size() - 2];
    for (int k = 0; k <= ext.grid.N; ++k)
      ext.values[k] = 2.0 * ext.values[k] - prev.values[k];
  }
  const FlowProblem& lim = family.limit;
  BenValue cert;
  switch (lim.kind) {
    case FlowKind::MM:
      cert = ben_weighted_functional(lim, family.limit_rep, ext, lim.source);
      break;
    case FlowKind::DNE1: {
      // recover w from u via ∂γ, pin w(0) at the datum
      std::vector<Vec> w(ext.grid.N + 1);
      w[0] = lim.init;
      for (int k = 1; k <= ext.grid.N; ++k)
        w[k] = lim.gamma->subgradient(ext.values[k]);
      cert = dne1_functional(lim, family.limit_rep, ext,
                             Trajectory(ext.grid, std::move(w)), lim.source);
      break;
    }
    case FlowKind::DNE2: {
      std::vector<Vec> z(ext.grid.N + 1);
      for (int k = 0; k <= ext.grid.N; ++k)
        z[k] = lim.gamma->subgradient(ext.values[k]);
      ext.values[0] = lim.init;
      cert = dne2_functional(lim, family.limit_rep, ext,
                             Trajectory(ext.grid, std::move(z)), lim.source);
      break;
    }
  }
  rep.limit_functional_value =
      cert.total.is_inf() ? std::numeric_limits<double>::infinity()
                          : cert.total.value();
  return rep;
}

}  // namespace

StabilityReport stability_experiment(const FlowFamily& family,
                                     const std::vector<int>& n_list,
                                     const OptimizerConfig& cfg) {
  return run_stability(family, n_list, cfg);
}

StabilityReport dne_stability_experiment(const FlowFamily& family,
                                         const std::vector<int>& n_list,
                                         const OptimizerConfig& cfg) {
  if (family.limit.kind == FlowKind::MM)
    throw std::invalid_argument("dne_stability_experiment: DNE kinds only");
  StabilityReport rep = run_stability(family, n_list, cfg);
  // γ_n → γ and γ_n* → γ* probe diagnostics at the largest index
  int n = n_list.back();
  FlowProblem pn = family.problem(n);
  const ConvexFn& g = *family.limit.gamma;
  const ConvexFn& gs = *family.limit.gamma_star;
  double worst = 0.0;
  for (int i = -8; i <= 8; ++i) {
    Vec x = Vec::Constant(g.dim(), 0.25 * i);
    ExtReal a = pn.gamma->eval(x), b = g.eval(x);
    if (a.is_finite() && b.is_finite())
      worst = std::max(worst, std::abs(a.value() - b.value()));
    ExtReal as = pn.gamma_star->eval(x), bs = gs.eval(x);
    if (as.is_finite() && bs.is_finite())
      worst = std::max(worst, std::abs(as.value() - bs.value()));
  }
  rep.gamma_probe_deficit = worst;
  return rep;
}

}  // namespace fitzflow
