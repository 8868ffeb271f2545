#include "fitzflow/flow.hpp"

#include <cmath>
#include <stdexcept>

namespace fitzflow {

namespace {

constexpr double kInitTol = 1e-9;

// ∂γ slope c for γ with linear gradient c·x (quadratic catalog entries).
std::optional<double> quad_slope(const ConvexFn& gamma) {
  if (std::holds_alternative<HalfNormSq>(gamma.repr())) return 1.0;
  if (const auto* q = std::get_if<Quadratic>(&gamma.repr())) return 2.0 * q->b;
  if (const auto* w = std::get_if<Wrap>(&gamma.repr())) {
    if (w->shift.size() == 0 && w->tilt.size() == 0) {
      auto base = quad_slope(*w->base);
      if (base) return w->vscale * w->ascale * w->ascale * *base;
    }
  }
  return std::nullopt;
}

// Linear matrix of a (possibly scaled) LinearSPD operator.
std::optional<Mat> linear_matrix(const MonotoneOp& op) {
  if (const auto* l = std::get_if<LinearSPDOp>(&op.repr())) return l->A;
  if (const auto* s = std::get_if<ScaledOp>(&op.repr())) {
    auto base = linear_matrix(*s->base);
    if (base) return Mat(s->c * *base);
  }
  return std::nullopt;
}

// Monotone envelope [min, max] of a multi-valued scalar map.
using Envelope = std::function<std::pair<double, double>(double)>;

double solve_monotone_1d(const Envelope& env, double target) {
  double a = target, b = target, span = 1.0 + std::abs(target);
  for (int i = 0; i < 200; ++i) {
    if (env(a).first <= target) break;
    a -= span;
    span *= 2.0;
  }
  span = 1.0 + std::abs(target);
  for (int i = 0; i < 200; ++i) {
    if (env(b).second >= target) break;
    b += span;
    span *= 2.0;
  }
  for (int i = 0; i < 300; ++i) {
    double m = 0.5 * (a + b);
    auto [lo, hi] = env(m);
    if (hi < target)
      a = m;
    else if (lo > target)
      b = m;
    else
      return m;
    if (b - a <= 1e-15 * (1.0 + std::abs(a) + std::abs(b))) break;
  }
  return 0.5 * (a + b);
}

std::pair<double, double> value_envelope(const std::vector<Vec>& ys) {
  if (ys.empty())
    throw std::domain_error("flow step: empty operator value");
  double lo = ys.front()[0], hi = ys.front()[0];
  for (const auto& y : ys) {
    lo = std::min(lo, y[0]);
    hi = std::max(hi, y[0]);
  }
  return {lo, hi};
}

Vec vec1v(double x) {
  Vec v(1);
  v[0] = x;
  return v;
}

}  // namespace

// ---------------------------------------------------------------------------
// problems
// ---------------------------------------------------------------------------

FlowProblem FlowProblem::mm(const MonotoneOp& op, Trajectory h, const Vec& u0) {
  if (op.dim() != h.dim() || op.dim() != (int)u0.size())
    throw std::invalid_argument("FlowProblem: dimension mismatch");
  TimeGrid g = h.grid;
  return FlowProblem{FlowKind::MM, op,          std::nullopt,
                     std::nullopt, std::move(h), u0,
                     g};
}

FlowProblem FlowProblem::dne1(const MonotoneOp& op, const ConvexFn& gamma,
                              Trajectory h, const Vec& w0) {
  if (op.dim() != h.dim() || gamma.dim() != op.dim() ||
      op.dim() != (int)w0.size())
    throw std::invalid_argument("FlowProblem: dimension mismatch");
  TimeGrid g = h.grid;
  return FlowProblem{FlowKind::DNE1, op,           gamma,
                     gamma.conjugate(), std::move(h), w0,
                     g};
}

FlowProblem FlowProblem::dne2(const MonotoneOp& op, const ConvexFn& gamma,
                              Trajectory h, const Vec& u0) {
  if (op.dim() != h.dim() || gamma.dim() != op.dim() ||
      op.dim() != (int)u0.size())
    throw std::invalid_argument("FlowProblem: dimension mismatch");
  TimeGrid g = h.grid;
  return FlowProblem{FlowKind::DNE2, op,           gamma,
                     gamma.conjugate(), std::move(h), u0,
                     g};
}

// ---------------------------------------------------------------------------
// functionals
// ---------------------------------------------------------------------------

namespace {

BenValue ben_core(const FlowProblem& problem, const RepFn& rep,
                  const Trajectory& v, const Trajectory& vstar, bool weighted) {
  if (!(v.grid == problem.grid) || !(vstar.grid == problem.grid))
    throw std::invalid_argument("ben_functional: grid mismatch");
  if (v.dim() != problem.op.dim() || rep.dim() != v.dim())
    throw std::invalid_argument("ben_functional: dimension mismatch");
  BenValue out{ExtReal(0.0), {}, 0.0, 0.0};
  double scale = 1.0 + problem.init.norm();
  if ((v.values.front() - problem.init).lpNorm<Eigen::Infinity>() >
      kInitTol * scale) {
    out.total = ExtReal::infinity();
    return out;
  }
  const TimeGrid& g = problem.grid;
  double acc = 0.0;
  for (int k = 0; k < g.N; ++k) {
    double wk = weighted ? g.mu_weight(k) : g.tau();
    Vec vb = v.mid(k);
    Vec b = vstar.mid(k) - v.diff(k);
    ExtReal phi = rep.eval(vb, b);
    if (phi.is_inf()) {
      out.total = ExtReal::infinity();
      return out;
    }
    double pair = b.dot(vb);
    double gap = phi.value() - pair;
    out.per_interval.push_back(wk * gap);
    out.representative_part += wk * phi.value();
    out.pairing_part += wk * pair;
    acc += wk * gap;
  }
  out.total = ExtReal(acc);
  return out;
}

}  // namespace

BenValue ben_functional(const FlowProblem& problem, const RepFn& rep,
                        const Trajectory& v, const Trajectory& vstar) {
  return ben_core(problem, rep, v, vstar, false);
}

BenValue ben_weighted_functional(const FlowProblem& problem, const RepFn& rep,
                                 const Trajectory& v, const Trajectory& vstar) {
  return ben_core(problem, rep, v, vstar, true);
}

namespace {

BenValue dne_core(const FlowProblem& problem, const RepFn& rep,
                  const Trajectory& a, const Trajectory& b,
                  const Trajectory& ustar, bool type1) {
  // type1: a = u (free), b = w (pinned at w⁰); Fitzpatrick block in (ū, u*̄−D_t w)
  // type2: a = u (pinned at u⁰), b = z (free); Fitzpatrick block in (D_t u, u*̄−z̄)
  if (!problem.gamma)
    throw std::invalid_argument("dne functional: missing potential");
  if (!(a.grid == problem.grid) || !(b.grid == problem.grid))
    throw std::invalid_argument("dne functional: grid mismatch");
  const ConvexFn& gamma = *problem.gamma;
  const ConvexFn& gstar = *problem.gamma_star;
  BenValue out{ExtReal(0.0), {}, 0.0, 0.0};
  const Vec& pinned = type1 ? b.values.front() : a.values.front();
  if ((pinned - problem.init).lpNorm<Eigen::Infinity>() >
      kInitTol * (1.0 + problem.init.norm())) {
    out.total = ExtReal::infinity();
    return out;
  }
  const TimeGrid& g = problem.grid;
  double fenchel = 0.0, fitz = 0.0;
  std::vector<double> fitz_terms(g.N), fen_terms(g.N);
  for (int k = 0; k < g.N; ++k) {
    double wk = g.mu_weight(k);
    Vec ub = a.mid(k), zb = b.mid(k);
    ExtReal gu = gamma.eval(ub), gz = gstar.eval(zb);
    if (gu.is_inf() || gz.is_inf()) {
      out.total = ExtReal::infinity();
      return out;
    }
    double A = gu.value() + gz.value() - zb.dot(ub);
    fen_terms[k] = wk * A;
    fenchel += wk * A;

    Vec first = type1 ? ub : a.diff(k);
    Vec second = ustar.mid(k) - (type1 ? b.diff(k) : zb);
    ExtReal phi = rep.eval(first, second);
    if (phi.is_inf()) {
      out.total = ExtReal::infinity();
      return out;
    }
    double B = phi.value() - second.dot(first);
    fitz_terms[k] = wk * B;
    fitz += wk * B;
    out.representative_part += wk * phi.value();
    out.pairing_part += wk * second.dot(first);
  }
  double fitz_pos = std::max(fitz, 0.0);
  out.total = ExtReal(fenchel + fitz_pos);
  out.per_interval.resize(g.N);
  for (int k = 0; k < g.N; ++k)
    out.per_interval[k] = fen_terms[k] + (fitz > 0 ? fitz_terms[k] : 0.0);
  return out;
}

}  // namespace

BenValue dne1_functional(const FlowProblem& problem, const RepFn& rep,
                         const Trajectory& u, const Trajectory& w,
                         const Trajectory& ustar) {
  if (problem.kind != FlowKind::DNE1)
    throw std::invalid_argument("dne1_functional: wrong problem kind");
  return dne_core(problem, rep, u, w, ustar, true);
}

BenValue dne2_functional(const FlowProblem& problem, const RepFn& rep,
                         const Trajectory& u, const Trajectory& z,
                         const Trajectory& ustar) {
  if (problem.kind != FlowKind::DNE2)
    throw std::invalid_argument("dne2_functional: wrong problem kind");
  return dne_core(problem, rep, u, z, ustar, false);
}

// ---------------------------------------------------------------------------
// reference solvers
// ---------------------------------------------------------------------------

namespace {

FlowSolution solve_mm(const FlowProblem& p) {
  const TimeGrid& g = p.grid;
  std::vector<Vec> u(g.N + 1);
  u[0] = p.init;
  for (int k = 0; k < g.N; ++k) {
    double t = g.node(k + 1);
    Vec rhs = u[k] + g.tau() * p.source.values[k + 1];
    u[k + 1] = p.op.resolvent(g.tau(), rhs, t);
  }
  return {Trajectory(g, std::move(u)), std::nullopt};
}

FlowSolution solve_dne1(const FlowProblem& p) {
  const TimeGrid& g = p.grid;
  const ConvexFn& gamma = *p.gamma;
  const ConvexFn& gstar = *p.gamma_star;
  double tau = g.tau();
  std::vector<Vec> u(g.N + 1), w(g.N + 1);
  w[0] = p.init;
  u[0] = gstar.subgradient(p.init);
  auto slope = quad_slope(gamma);
  for (int k = 0; k < g.N; ++k) {
    Vec rhs = w[k] + tau * p.source.values[k + 1];
    double t = g.node(k + 1);
    if (slope) {
      double c = *slope;
      u[k + 1] = p.op.resolvent(tau / c, rhs / c, t);
      w[k + 1] = c * u[k + 1];
    } else {
      if (p.op.dim() != 1)
        throw std::domain_error("solve_reference(DNE1): need quadratic gamma or d = 1");
      Envelope env = [&](double x) {
        auto [gl, gh] = value_envelope(gamma.subdifferential(vec1v(x)));
        auto [al, ah] = value_envelope(p.op.apply(vec1v(x), t));
        return std::make_pair(gl + tau * al, gh + tau * ah);
      };
      double x = solve_monotone_1d(env, rhs[0]);
      u[k + 1] = vec1v(x);
      // consistent selection for w: ∂γ(u) ∩ [rhs − τ·α_hi, rhs − τ·α_lo]
      auto [gl, gh] = value_envelope(gamma.subdifferential(u[k + 1]));
      auto [al, ah] = value_envelope(p.op.apply(u[k + 1], t));
      double lo = std::max(gl, rhs[0] - tau * ah);
      double hi = std::min(gh, rhs[0] - tau * al);
      w[k + 1] = vec1v(0.5 * (lo + hi));
    }
  }
  return {Trajectory(g, std::move(u)), Trajectory(g, std::move(w))};
}

FlowSolution solve_dne2(const FlowProblem& p) {
  const TimeGrid& g = p.grid;
  const ConvexFn& gamma = *p.gamma;
  double tau = g.tau();
  std::vector<Vec> u(g.N + 1), z(g.N + 1);
  u[0] = p.init;
  z[0] = gamma.subgradient(p.init);
  auto slope = quad_slope(gamma);
  auto amat = linear_matrix(p.op);
  for (int k = 0; k < g.N; ++k) {
    const Vec& h = p.source.values[k + 1];
    double t = g.node(k + 1);
    if (slope && amat) {
      double c = *slope;
      Mat M = *amat + c * tau * Mat::Identity(p.op.dim(), p.op.dim());
      Vec d = M.ldlt().solve(h - c * u[k]);
      u[k + 1] = u[k] + tau * d;
      z[k + 1] = c * u[k + 1];
    } else {
      if (p.op.dim() != 1)
        throw std::domain_error("solve_reference(DNE2): need linear data or d = 1");
      Envelope env = [&](double d) {
        auto [al, ah] = value_envelope(p.op.apply(vec1v(d), t));
        auto [gl, gh] =
            value_envelope(gamma.subdifferential(u[k] + tau * vec1v(d)));
        return std::make_pair(al + gl, ah + gh);
      };
      double d = solve_monotone_1d(env, h[0]);
      u[k + 1] = u[k] + tau * vec1v(d);
      auto [al, ah] = value_envelope(p.op.apply(vec1v(d), t));
      auto [gl, gh] = value_envelope(gamma.subdifferential(u[k + 1]));
      double lo = std::max(gl, h[0] - ah);
      double hi = std::min(gh, h[0] - al);
      z[k + 1] = vec1v(0.5 * (lo + hi));
    }
  }
  return {Trajectory(g, std::move(u)), Trajectory(g, std::move(z))};
}

}  // namespace

FlowSolution solve_reference(const FlowProblem& problem) {
  if (!problem.op.maximal())
    throw std::invalid_argument("solve_reference: operator must be maximal");
  switch (problem.kind) {
    case FlowKind::MM:
      return solve_mm(problem);
    case FlowKind::DNE1:
      return solve_dne1(problem);
    case FlowKind::DNE2:
      return solve_dne2(problem);
  }
  throw std::logic_error("solve_reference: unknown kind");
}

// ---------------------------------------------------------------------------
// null-minimization
// ---------------------------------------------------------------------------

namespace {

struct Objective {
  std::function<double(const Vec&, Vec*)> eval;  // value + optional subgradient
};

struct OptOut {
  Vec x;
  double value;
  int iters;
  bool converged;
};

// Accelerated gradient with backtracking line search and restart on
// non-monotonicity; the target minimum value is 0 (null-minimization).
OptOut minimize_smooth(const Objective& obj, Vec x0, double tol_abs,
                       const OptimizerConfig& cfg) {
  Vec x = std::move(x0), xprev = x, y = x, g(x.size());
  double L = 1.0, tmom = 1.0;
  double fx = obj.eval(x, nullptr);
  double best = fx;
  Vec xbest = x;
  int stall = 0;
  int it = 0;
  for (; it < cfg.max_iters && best > tol_abs; ++it) {
    double fy = obj.eval(y, &g);
    double gn2 = g.squaredNorm();
    if (gn2 == 0.0) break;
    Vec xn;
    double fxn = 0.0;
    bool ok = false;
    for (int bt = 0; bt < 60; ++bt) {
      xn = y - g / L;
      fxn = obj.eval(xn, nullptr);
      if (std::isfinite(fxn) && fxn <= fy - 0.5 * gn2 / L + 1e-18) {
        ok = true;
        break;
      }
      L *= 2.0;
    }
    if (!ok) break;
    double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tmom * tmom));
    Vec ynew = xn + ((tmom - 1.0) / tn) * (xn - x);
    if (fxn > fx) {  // restart momentum
      ynew = xn;
      tn = 1.0;
    }
    xprev = x;
    x = xn;
    fx = fxn;
    y = ynew;
    tmom = tn;
    L = std::max(L * 0.9, 1e-12);
    double prev_best = best;
    if (fx < best) {
      best = fx;
      xbest = x;
    }
    if (prev_best - best <= cfg.tol_rel * (1.0 + std::abs(prev_best))) {
      if (++stall > cfg.patience) break;
    } else {
      stall = 0;
    }
  }
  return {xbest, best, it, best <= tol_abs};
}

// Polyak subgradient steps: the minimum value 0 is known, so the classical
// step f(x)/‖g‖² applies; safe for polyhedral (max-of-affine) objectives.
OptOut minimize_polyak(const Objective& obj, Vec x0, double tol_abs,
                       const OptimizerConfig& cfg) {
  Vec x = std::move(x0), g(x.size());
  double best = std::numeric_limits<double>::infinity();
  Vec xbest = x;
  // stall detection per block: linear (even slow) convergence keeps shaving a
  // few percent off `best` per block; a flat block means the floor is reached
  const int block = std::max(cfg.patience, 2000);
  double block_best = best;
  int it = 0;
  for (; it < cfg.max_iters; ++it) {
    double f = obj.eval(x, &g);
    if (f < best) {
      best = f;
      xbest = x;
    }
    if (best <= tol_abs) break;
    double gn2 = g.squaredNorm();
    if (gn2 <= 1e-30) break;
    x -= 1.5 * (f / gn2) * g;
    if (it % block == block - 1) {
      if (block_best - best < 0.05 * best) break;
      block_best = best;
    }
  }
  return {xbest, best, it, best <= tol_abs};
}

}  // namespace

NullMinResult solve_null_min(const FlowProblem& problem, const RepFn& rep,
                             const OptimizerConfig& cfg) {
  const TimeGrid& g = problem.grid;
  const int d = problem.op.dim();
  const int N = g.N;
  const double tau = g.tau();
  const Trajectory& h = problem.source;

  bool smooth = rep.smooth();
  if (problem.gamma)
    smooth = smooth && problem.gamma->smooth() && problem.gamma_star->smooth();
  double data_scale = 1.0 + problem.init.norm();
  double tol_abs = cfg.tol_abs * data_scale * (smooth ? 1.0 : 2.0);
  OptimizerConfig rcfg = cfg;
  if (!smooth) {  // subgradient progress is slow and non-monotone
    rcfg.patience = std::max(cfg.patience, 2000);
    rcfg.tol_rel = std::min(cfg.tol_rel, 1e-11);
  }

  // Multilevel warm start for nonsmooth objectives: solve on the half grid
  // first and prolong linearly; Polyak steps then start near the sharp
  // minimum instead of crawling from the constant trajectory.
  std::optional<FlowSolution> warm;
  if (!smooth && N % 2 == 0 && N >= 16) {
    TimeGrid cg(g.T, N / 2);
    std::vector<Vec> cs(cg.N + 1);
    for (int k = 0; k <= cg.N; ++k) cs[k] = h.values[2 * k];
    FlowProblem coarse{problem.kind,  problem.op,   problem.gamma,
                       problem.gamma_star, Trajectory(cg, std::move(cs)),
                       problem.init,  cg};
    NullMinResult cr = solve_null_min(coarse, rep, cfg);
    auto prolong = [&](const Trajectory& c) {
      std::vector<Vec> f(N + 1);
      for (int k = 0; k <= cg.N; ++k) f[2 * k] = c.values[k];
      for (int k = 0; k < cg.N; ++k)
        f[2 * k + 1] = 0.5 * (c.values[k] + c.values[k + 1]);
      return Trajectory(g, std::move(f));
    };
    warm = FlowSolution{prolong(cr.u),
                        cr.aux ? std::optional<Trajectory>(prolong(*cr.aux))
                               : std::nullopt};
  }

  auto node = [&](const Vec& x, int base, int k) {
    return Vec(x.segment(base + k * d, d));
  };

  if (problem.kind == FlowKind::MM) {
    // variables: u_1..u_N
    auto unpack = [&](const Vec& x) {
      std::vector<Vec> u(N + 1);
      u[0] = problem.init;
      for (int k = 1; k <= N; ++k) u[k] = node(x, -d, k);
      return Trajectory(g, std::move(u));
    };
    Objective obj;
    obj.eval = [&, d, N, tau](const Vec& x, Vec* grad) -> double {
      if (grad) grad->setZero(x.size());
      double total = 0.0;
      Vec vk = problem.init;
      for (int k = 0; k < N; ++k) {
        Vec vk1 = node(x, -d, k + 1);
        Vec vb = 0.5 * (vk + vk1);
        Vec diff = (vk1 - vk) / tau;
        Vec b = 0.5 * (h.values[k] + h.values[k + 1]) - diff;
        ExtReal phi = rep.eval(vb, b);
        if (phi.is_inf()) return std::numeric_limits<double>::infinity();
        total += tau * (phi.value() - b.dot(vb));
        if (grad) {
          auto [gv, gw] = rep.subgrad(vb, b);
          Vec dvb = gv - b, db = gw - vb;
          if (k >= 1)
            grad->segment((k - 1) * d, d) += tau * (0.5 * dvb + db / tau);
          grad->segment(k * d, d) += tau * (0.5 * dvb - db / tau);
        }
        vk = vk1;
      }
      return total;
    };
    Vec x0(N * d);
    for (int k = 0; k < N; ++k)
      x0.segment(k * d, d) = warm ? warm->u.values[k + 1] : problem.init;
    OptOut r = smooth ? minimize_smooth(obj, x0, tol_abs, rcfg)
                      : minimize_polyak(obj, x0, tol_abs, rcfg);
    return {unpack(r.x), std::nullopt, r.value, r.iters, r.converged};
  }

  const ConvexFn& gamma = *problem.gamma;
  const ConvexFn& gstar = *problem.gamma_star;

  if (problem.kind == FlowKind::DNE1) {
    // variables: u_0..u_N, then w_1..w_N (w_0 = w⁰ pinned)
    const int nu = (N + 1) * d;
    auto unpack = [&](const Vec& x) {
      std::vector<Vec> u(N + 1), w(N + 1);
      for (int k = 0; k <= N; ++k) u[k] = node(x, 0, k);
      w[0] = problem.init;
      for (int k = 1; k <= N; ++k) w[k] = node(x, nu - d, k);
      return std::make_pair(Trajectory(g, std::move(u)),
                            Trajectory(g, std::move(w)));
    };
    Objective obj;
    obj.eval = [&, d, N, tau, nu](const Vec& x, Vec* grad) -> double {
      if (grad) grad->setZero(x.size());
      double fenchel = 0.0, fitz = 0.0;
      Vec fitz_grad;
      if (grad) fitz_grad.setZero(x.size());
      Vec wk = problem.init;
      for (int k = 0; k < N; ++k) {
        double wt = g.mu_weight(k);
        Vec uk = node(x, 0, k), uk1 = node(x, 0, k + 1);
        Vec wk1 = node(x, nu - d, k + 1);
        Vec ub = 0.5 * (uk + uk1), wb = 0.5 * (wk + wk1);
        Vec dw = (wk1 - wk) / tau;
        ExtReal gu = gamma.eval(ub), gz = gstar.eval(wb);
        if (gu.is_inf() || gz.is_inf())
          return std::numeric_limits<double>::infinity();
        fenchel += wt * (gu.value() + gz.value() - wb.dot(ub));
        Vec b = 0.5 * (h.values[k] + h.values[k + 1]) - dw;
        ExtReal phi = rep.eval(ub, b);
        if (phi.is_inf()) return std::numeric_limits<double>::infinity();
        fitz += wt * (phi.value() - b.dot(ub));
        if (grad) {
          Vec dgu = gamma.subgradient(ub) - wb;
          Vec dgz = gstar.subgradient(wb) - ub;
          grad->segment(k * d, d) += wt * 0.5 * dgu;
          grad->segment((k + 1) * d, d) += wt * 0.5 * dgu;
          if (k >= 1) grad->segment(nu + (k - 1) * d, d) += wt * 0.5 * dgz;
          grad->segment(nu + k * d, d) += wt * 0.5 * dgz;
          auto [gv, gw] = rep.subgrad(ub, b);
          Vec dvb = gv - b, db = gw - ub;
          fitz_grad.segment(k * d, d) += wt * 0.5 * dvb;
          fitz_grad.segment((k + 1) * d, d) += wt * 0.5 * dvb;
          if (k >= 1) fitz_grad.segment(nu + (k - 1) * d, d) += wt * db / tau;
          fitz_grad.segment(nu + k * d, d) -= wt * db / tau;
        }
        wk = wk1;
      }
      if (grad && fitz > 0.0) *grad += fitz_grad;
      return fenchel + std::max(fitz, 0.0);
    };
    Vec u_init = gstar.subgradient(problem.init);
    Vec x0(nu + N * d);
    for (int k = 0; k <= N; ++k)
      x0.segment(k * d, d) = warm ? warm->u.values[k] : u_init;
    for (int k = 0; k < N; ++k)
      x0.segment(nu + k * d, d) =
          warm && warm->aux ? warm->aux->values[k + 1] : problem.init;
    OptOut r = smooth ? minimize_smooth(obj, x0, tol_abs, rcfg)
                      : minimize_polyak(obj, x0, tol_abs, rcfg);
    auto [u, w] = unpack(r.x);
    return {std::move(u), std::move(w), r.value, r.iters, r.converged};
  }

  // DNE2: variables u_1..u_N (u_0 pinned), then z_0..z_N
  const int nu = N * d;
  auto unpack = [&](const Vec& x) {
    std::vector<Vec> u(N + 1), z(N + 1);
    u[0] = problem.init;
    for (int k = 1; k <= N; ++k) u[k] = node(x, -d, k);
    for (int k = 0; k <= N; ++k) z[k] = node(x, nu, k);
    return std::make_pair(Trajectory(g, std::move(u)),
                          Trajectory(g, std::move(z)));
  };
  Objective obj;
  obj.eval = [&, d, N, tau, nu](const Vec& x, Vec* grad) -> double {
    if (grad) grad->setZero(x.size());
    double fenchel = 0.0, fitz = 0.0;
    Vec fitz_grad;
    if (grad) fitz_grad.setZero(x.size());
    Vec uk = problem.init;
    for (int k = 0; k < N; ++k) {
      double wt = g.mu_weight(k);
      Vec uk1 = node(x, -d, k + 1);
      Vec zk = node(x, nu, k), zk1 = node(x, nu, k + 1);
      Vec ub = 0.5 * (uk + uk1), zb = 0.5 * (zk + zk1);
      Vec du = (uk1 - uk) / tau;
      ExtReal gu = gamma.eval(ub), gz = gstar.eval(zb);
      if (gu.is_inf() || gz.is_inf())
        return std::numeric_limits<double>::infinity();
      fenchel += wt * (gu.value() + gz.value() - zb.dot(ub));
      Vec b = 0.5 * (h.values[k] + h.values[k + 1]) - zb;
      ExtReal phi = rep.eval(du, b);
      if (phi.is_inf()) return std::numeric_limits<double>::infinity();
      fitz += wt * (phi.value() - b.dot(du));
      if (grad) {
        Vec dgu = gamma.subgradient(ub) - zb;
        Vec dgz = gstar.subgradient(zb) - ub;
        if (k >= 1) grad->segment((k - 1) * d, d) += wt * 0.5 * dgu;
        grad->segment(k * d, d) += wt * 0.5 * dgu;
        grad->segment(nu + k * d, d) += wt * 0.5 * dgz;
        grad->segment(nu + (k + 1) * d, d) += wt * 0.5 * dgz;
        auto [gv, gw] = rep.subgrad(du, b);
        Vec ddu = gv - b, db = gw - du;
        if (k >= 1) fitz_grad.segment((k - 1) * d, d) -= wt * ddu / tau;
        fitz_grad.segment(k * d, d) += wt * ddu / tau;
        fitz_grad.segment(nu + k * d, d) -= wt * 0.5 * db;
        fitz_grad.segment(nu + (k + 1) * d, d) -= wt * 0.5 * db;
      }
      uk = uk1;
    }
    if (grad && fitz > 0.0) *grad += fitz_grad;
    return fenchel + std::max(fitz, 0.0);
  };
  Vec z_init = gamma.subgradient(problem.init);
  Vec x0(nu + (N + 1) * d);
  for (int k = 0; k < N; ++k)
    x0.segment(k * d, d) = warm ? warm->u.values[k + 1] : problem.init;
  for (int k = 0; k <= N; ++k)
    x0.segment(nu + k * d, d) =
        warm && warm->aux ? warm->aux->values[k] : z_init;
  OptOut r = smooth ? minimize_smooth(obj, x0, tol_abs, rcfg)
                    : minimize_polyak(obj, x0, tol_abs, rcfg);
  auto [u, z] = unpack(r.x);
  return {std::move(u), std::move(z), r.value, r.iters, r.converged};
}

}  // namespace fitzflow
