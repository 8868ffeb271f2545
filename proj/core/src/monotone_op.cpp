#include "fitzflow/monotone_op.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fitzflow {

namespace {

constexpr double kResTol = 1e-10;

Vec vec1(double x) {
  Vec v(1);
  v[0] = x;
  return v;
}

double soft_threshold(double rhs, double tau) {
  if (std::abs(rhs) <= tau) return 0.0;
  return rhs - tau * (rhs > 0 ? 1.0 : -1.0);
}

// 1D resolvent of a monotone operator given only through apply():
// find x with rhs ∈ x + τ·α(x), bisection on the monotone selection envelope.
double resolvent_1d_bisect(const MonotoneOp& op, double tau, double rhs,
                           std::optional<double> t) {
  auto lo_hi = [&](double x) -> std::pair<double, double> {
    auto ys = op.apply(vec1(x), t);
    if (ys.empty())
      throw std::domain_error("resolvent: empty operator value");
    double lo = ys.front()[0], hi = ys.front()[0];
    for (const auto& y : ys) {
      lo = std::min(lo, y[0]);
      hi = std::max(hi, y[0]);
    }
    return {x + tau * lo, x + tau * hi};
  };
  // bracket
  double a = rhs, b = rhs, span = 1.0 + std::abs(rhs);
  for (int i = 0; i < 200; ++i) {
    auto [la, ha] = lo_hi(a);
    if (la <= rhs) break;
    a -= span;
    span *= 2.0;
  }
  span = 1.0 + std::abs(rhs);
  for (int i = 0; i < 200; ++i) {
    auto [lb, hb] = lo_hi(b);
    if (hb >= rhs) break;
    b += span;
    span *= 2.0;
  }
  for (int i = 0; i < 200 && b - a > 1e-14 * (1.0 + std::abs(a) + std::abs(b));
       ++i) {
    double m = 0.5 * (a + b);
    auto [lm, hm] = lo_hi(m);
    if (hm < rhs)
      a = m;
    else if (lm > rhs)
      b = m;
    else
      return m;
  }
  return 0.5 * (a + b);
}

}  // namespace

double TimeCoef::operator()(double t) const {
  if (!breaks.empty()) {
    size_t i = std::upper_bound(breaks.begin(), breaks.end(), t) - breaks.begin();
    return values[i];
  }
  return a + b * t;
}

double GraphSample::worst_monotonicity(long cap) const {
  const long m = (long)pairs.size();
  double worst = 0.0;
  auto check = [&](long i, long j) {
    const auto& [v1, w1] = pairs[i];
    const auto& [v2, w2] = pairs[j];
    worst = std::min(worst, (w1 - w2).dot(v1 - v2));
  };
  if (m * (m - 1) / 2 <= cap) {
    for (long i = 0; i < m; ++i)
      for (long j = i + 1; j < m; ++j) check(i, j);
  } else {
    // deterministic subsample with a fixed stride pattern
    long step = std::max<long>(1, m * (m - 1) / (2 * cap));
    long count = 0;
    for (long i = 0; i < m; ++i)
      for (long j = i + 1; j < m; j += step) {
        check(i, j);
        if (++count > cap) return worst;
      }
  }
  return worst;
}

MonotoneOp::MonotoneOp(int dim, MonotoneRepr repr)
    : dim_(dim), repr_(std::move(repr)) {
  if (dim_ <= 0) throw std::invalid_argument("MonotoneOp: dim must be positive");
  if (const auto* l = std::get_if<LinearSPDOp>(&repr_)) {
    if (l->A.rows() != dim_ || l->A.cols() != dim_)
      throw std::invalid_argument("LinearSPD: matrix shape mismatch");
    Mat S = 0.5 * (l->A + l->A.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> es(S);
    if (es.eigenvalues().minCoeff() < -1e-9 * (1.0 + S.norm()))
      throw std::invalid_argument("LinearSPD: matrix not positive semidefinite");
  } else if (const auto* g = std::get_if<GraphOp>(&repr_)) {
    if (g->graph.pairs.empty())
      throw std::invalid_argument("GraphOp: empty graph (improper)");
    if (g->graph.worst_monotonicity() < -1e-9)
      throw std::invalid_argument("GraphOp: graph is not monotone");
  } else if (const auto* p = std::get_if<PLap1DOp>(&repr_)) {
    if (!(p->p >= 2.0) || p->n < 1 || dim_ != p->n)
      throw std::invalid_argument("PLap1D: need p >= 2, dim = n >= 1");
  } else if (const auto* s = std::get_if<ScaledOp>(&repr_)) {
    if (!s->base || !(s->c > 0))
      throw std::invalid_argument("ScaledOp: need base and c > 0");
  }
}

bool MonotoneOp::maximal() const {
  return std::visit(
      [&](const auto& r) -> bool {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, GraphOp> ||
                      std::is_same_v<T, OnlyAtZeroOp>) {
          return false;
        } else if constexpr (std::is_same_v<T, ScaledOp> ||
                             std::is_same_v<T, TimeDepOp>) {
          return r.base->maximal();
        } else if constexpr (std::is_same_v<T, ShiftedOp>) {
          return r.base->maximal();
        } else {
          return true;
        }
      },
      repr_);
}

bool MonotoneOp::time_dependent() const {
  return std::holds_alternative<TimeDepOp>(repr_);
}

bool MonotoneOp::single_valued() const {
  return std::visit(
      [&](const auto& r) -> bool {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, LinearSPDOp> ||
                      std::is_same_v<T, PLap1DOp>) {
          return true;
        } else if constexpr (std::is_same_v<T, SubdiffOp>) {
          return r.phi.smooth();
        } else if constexpr (std::is_same_v<T, ScaledOp> ||
                             std::is_same_v<T, TimeDepOp> ||
                             std::is_same_v<T, ShiftedOp>) {
          return r.base->single_valued();
        } else {
          return false;
        }
      },
      repr_);
}

std::vector<Vec> MonotoneOp::apply(const Vec& v, std::optional<double> t) const {
  if (v.size() != dim_)
    throw std::invalid_argument("MonotoneOp::apply: dimension mismatch");
  return std::visit(
      [&](const auto& r) -> std::vector<Vec> {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, LinearSPDOp>) {
          return {r.A * v};
        } else if constexpr (std::is_same_v<T, SubdiffOp>) {
          if (r.phi.eval(v).is_inf()) return {};
          return r.phi.subdifferential(v);
        } else if constexpr (std::is_same_v<T, Sign1DOp>) {
          if (v[0] > 0) return {vec1(1.0)};
          if (v[0] < 0) return {vec1(-1.0)};
          return {vec1(-1.0), vec1(0.0), vec1(1.0)};
        } else if constexpr (std::is_same_v<T, GraphOp>) {
          std::vector<Vec> out;
          for (const auto& [x, y] : r.graph.pairs)
            if ((x - v).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + x.norm()))
              out.push_back(y);
          return out;
        } else if constexpr (std::is_same_v<T, OnlyAtZeroOp>) {
          if (v.lpNorm<Eigen::Infinity>() <= 1e-12) return {Vec::Zero(dim_)};
          return {};
        } else if constexpr (std::is_same_v<T, PLap1DOp>) {
          ConvexFn phi = ConvexFn::plap_potential(r.p, r.n);
          return {phi.subgradient(v)};
        } else if constexpr (std::is_same_v<T, ScaledOp>) {
          auto ys = r.base->apply(v, t);
          for (auto& y : ys) y *= r.c;
          return ys;
        } else if constexpr (std::is_same_v<T, ShiftedOp>) {
          auto ys = r.base->apply(v - r.v0, t);
          for (auto& y : ys) y += r.w0;
          return ys;
        } else {  // TimeDepOp
          if (!t)
            throw std::invalid_argument("apply: time-dependent operator needs t");
          auto ys = r.base->apply(v, t);
          double c = r.coef(*t);
          for (auto& y : ys) y *= c;
          return ys;
        }
      },
      repr_);
}

Vec MonotoneOp::apply_mid(const Vec& v, std::optional<double> t) const {
  auto ys = apply(v, t);
  if (ys.empty()) throw std::domain_error("apply_mid: empty operator value");
  return ys[ys.size() / 2];
}

namespace {

// Newton with Levenberg safeguard for x + τ∇φ(x) = rhs, φ the p-Laplacian
// potential (SPD tridiagonal Hessian).
Vec plap_resolvent(const PLap1DOp& op, double tau, const Vec& rhs) {
  ConvexFn phi = ConvexFn::plap_potential(op.p, op.n);
  int n = op.n;
  Vec x = rhs;  // good initial guess for moderate τ
  double lambda = 0.0;
  for (int it = 0; it < 200; ++it) {
    Vec g = x + tau * phi.subgradient(x) - rhs;
    if (g.norm() <= kResTol * (1.0 + rhs.norm())) return x;
    // Hessian of ½‖x−rhs‖² + τφ
    Mat H = Mat::Identity(n, n);
    {
      // assemble τ·∇²φ via finite structure: reuse the potential's Hessian
      // through a small epsilon-free path: ∇²φ is tridiagonal with weights
      // (p−1)|d_i|^{p−2}/h
      double h = 1.0 / (n + 1);
      for (int i = 0; i <= n; ++i) {
        double vl = (i == 0) ? 0.0 : x[i - 1];
        double vr = (i == n) ? 0.0 : x[i];
        double d = (vr - vl) / h;
        double w = tau * (op.p - 1.0) * std::pow(std::abs(d), op.p - 2.0) / h;
        if (!std::isfinite(w)) w = 0.0;
        if (i >= 1) H(i - 1, i - 1) += w;
        if (i <= n - 1) H(i, i) += w;
        if (i >= 1 && i <= n - 1) {
          H(i - 1, i) -= w;
          H(i, i - 1) -= w;
        }
      }
    }
    bool accepted = false;
    double f0 = g.squaredNorm();
    for (int inner = 0; inner < 60; ++inner) {
      Mat Hl = H + lambda * Mat::Identity(n, n);
      Vec step = Hl.ldlt().solve(-g);
      Vec xn = x + step;
      Vec gn = xn + tau * phi.subgradient(xn) - rhs;
      if (gn.squaredNorm() < f0) {
        x = xn;
        lambda = std::max(lambda / 3.0, 0.0);
        accepted = true;
        break;
      }
      lambda = lambda == 0.0 ? 1e-8 : lambda * 10.0;
    }
    if (!accepted)
      throw std::runtime_error("resolvent: Newton failed to converge");
  }
  Vec g = x + tau * phi.subgradient(x) - rhs;
  if (g.norm() > kResTol * (1.0 + rhs.norm()))
    throw std::runtime_error("resolvent: iteration cap reached");
  return x;
}

}  // namespace

Vec MonotoneOp::resolvent(double tau, const Vec& rhs,
                          std::optional<double> t) const {
  if (!(tau > 0)) throw std::invalid_argument("resolvent: tau must be > 0");
  if (rhs.size() != dim_)
    throw std::invalid_argument("resolvent: dimension mismatch");
  if (!maximal())
    throw std::domain_error("resolvent: operator is not maximal monotone");
  return std::visit(
      [&](const auto& r) -> Vec {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, LinearSPDOp>) {
          Mat M = Mat::Identity(dim_, dim_) + tau * r.A;
          return M.ldlt().solve(rhs);
        } else if constexpr (std::is_same_v<T, Sign1DOp>) {
          return vec1(soft_threshold(rhs[0], tau));
        } else if constexpr (std::is_same_v<T, SubdiffOp>) {
          const ConvexRepr& pr = r.phi.repr();
          if (std::holds_alternative<HalfNormSq>(pr))
            return rhs / (1.0 + tau);
          if (const auto* q = std::get_if<Quadratic>(&pr))
            return rhs / (1.0 + 2.0 * q->b * tau);
          if (const auto* ap = std::get_if<AbsPower>(&pr)) {
            if (ap->p == 1.0) {
              double nr = rhs.norm();
              if (nr <= tau) return Vec::Zero(dim_);
              return (1.0 - tau / nr) * rhs;
            }
            if (ap->p == 2.0) return rhs / (1.0 + tau);
            // radial: s + τ s^{p−1} = ‖rhs‖, safeguarded Newton on s ≥ 0
            double target = rhs.norm();
            if (target == 0.0) return Vec::Zero(dim_);
            double s = target, lo = 0.0, hi = target;
            for (int i = 0; i < 200; ++i) {
              double f = s + tau * std::pow(s, ap->p - 1.0) - target;
              if (std::abs(f) <= kResTol * (1.0 + target)) break;
              (f > 0 ? hi : lo) = s;
              double df = 1.0 + tau * (ap->p - 1.0) * std::pow(s, ap->p - 2.0);
              double sn = s - f / df;
              s = (sn > lo && sn < hi) ? sn : 0.5 * (lo + hi);
            }
            return (s / target) * rhs;
          }
          if (const auto* pl = std::get_if<PLapPotential>(&pr))
            return plap_resolvent(PLap1DOp{pl->p, pl->n}, tau, rhs);
          if (dim_ == 1) return vec1(resolvent_1d_bisect(*this, tau, rhs[0], t));
          throw std::domain_error("resolvent: unsupported potential");
        } else if constexpr (std::is_same_v<T, PLap1DOp>) {
          return plap_resolvent(r, tau, rhs);
        } else if constexpr (std::is_same_v<T, ScaledOp>) {
          return r.base->resolvent(tau * r.c, rhs, t);
        } else if constexpr (std::is_same_v<T, ShiftedOp>) {
          return r.v0 + r.base->resolvent(tau, rhs - r.v0 - tau * r.w0, t);
        } else if constexpr (std::is_same_v<T, TimeDepOp>) {
          if (!t)
            throw std::invalid_argument(
                "resolvent: time-dependent operator needs t");
          return r.base->resolvent(tau * r.coef(*t), rhs, t);
        } else {
          throw std::domain_error("resolvent: operator is not maximal monotone");
        }
      },
      repr_);
}

GraphSample MonotoneOp::graph_sample(const Box& box, int density,
                                     std::optional<double> t) const {
  if (density < 2) throw std::invalid_argument("graph_sample: density >= 2");
  if (box.dim() != dim_)
    throw std::invalid_argument("graph_sample: box dimension mismatch");
  GraphSample out;
  std::vector<int> idx(dim_, 0);
  while (true) {
    Vec v(dim_);
    for (int i = 0; i < dim_; ++i)
      v[i] = box.lo[i] + idx[i] * (box.hi[i] - box.lo[i]) / (density - 1);
    for (const auto& y : apply(v, t)) out.pairs.emplace_back(v, y);
    int ax = 0;
    while (ax < dim_ && ++idx[ax] == density) idx[ax++] = 0;
    if (ax == dim_) break;
  }
  if (out.pairs.empty())
    throw std::domain_error("graph_sample: empty result (improper restriction)");
  double scale = 1.0;
  for (const auto& [v, y] : out.pairs)
    scale = std::max({scale, v.squaredNorm(), y.squaredNorm()});
  if (out.worst_monotonicity() < -1e-9 * scale)
    throw std::logic_error("graph_sample: monotonicity violated");
  return out;
}

OperatorWitness MonotoneOp::witness(const Box& box, int density) const {
  GraphSample g = graph_sample(box, density);
  OperatorWitness w{1.0, 0.0, 0.0, 0.0};
  double minpair = 0.0;
  for (const auto& [v, y] : g.pairs) {
    double nv = v.norm(), ny = y.norm();
    if (nv >= 1.0) w.C3 = std::max(w.C3, ny / nv);
    if (nv < 1.0) w.C4 = std::max(w.C4, ny);
    minpair = std::min(minpair, y.dot(v));
  }
  w.C2 = std::max(0.0, -minpair);
  for (const auto& [v, y] : g.pairs) {
    double n2 = v.squaredNorm();
    if (n2 > 1e-12)
      w.C1 = std::min(w.C1, std::max(0.0, (y.dot(v) + w.C2) / n2));
  }
  return w;
}

MonotoneOp MonotoneOp::identity(int dim) {
  return MonotoneOp(dim, LinearSPDOp{Mat::Identity(dim, dim)});
}
MonotoneOp MonotoneOp::linear_spd(const Mat& A) {
  return MonotoneOp((int)A.rows(), LinearSPDOp{A});
}
MonotoneOp MonotoneOp::linear_scalar(double lambda, int dim) {
  return MonotoneOp(dim, LinearSPDOp{lambda * Mat::Identity(dim, dim)});
}
MonotoneOp MonotoneOp::subdiff(const ConvexFn& phi) {
  return MonotoneOp(phi.dim(), SubdiffOp{phi});
}
MonotoneOp MonotoneOp::sign1d() { return MonotoneOp(1, Sign1DOp{}); }
MonotoneOp MonotoneOp::graph_op(GraphSample g) {
  int d = (int)g.pairs.front().first.size();
  return MonotoneOp(d, GraphOp{std::move(g)});
}
MonotoneOp MonotoneOp::only_at_zero(int dim) {
  return MonotoneOp(dim, OnlyAtZeroOp{});
}
MonotoneOp MonotoneOp::plaplacian_1d(double p, int n) {
  return MonotoneOp(n, PLap1DOp{p, n});
}
MonotoneOp MonotoneOp::scaled(const MonotoneOp& base, double c) {
  return MonotoneOp(base.dim(),
                    ScaledOp{std::make_shared<MonotoneOp>(base), c});
}
MonotoneOp MonotoneOp::shifted(const MonotoneOp& base, const Vec& v0,
                               const Vec& w0) {
  return MonotoneOp(base.dim(),
                    ShiftedOp{std::make_shared<MonotoneOp>(base), v0, w0});
}
MonotoneOp MonotoneOp::time_dependent(const MonotoneOp& base, TimeCoef coef) {
  return MonotoneOp(base.dim(),
                    TimeDepOp{std::make_shared<MonotoneOp>(base), std::move(coef)});
}

Mat second_difference_matrix(int n) {
  double h = 1.0 / (n + 1);
  Mat A = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    A(i, i) = 2.0 / h;
    if (i > 0) A(i, i - 1) = -1.0 / h;
    if (i + 1 < n) A(i, i + 1) = -1.0 / h;
  }
  return A;
}

}  // namespace fitzflow
