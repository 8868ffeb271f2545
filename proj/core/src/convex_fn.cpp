#include "fitzflow/convex_fn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fitzflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kAbsTol = 1e-12;

double sq(double x) { return x * x; }

Vec vec1(double x) {
  Vec v(1);
  v[0] = x;
  return v;
}

// |d|^{p-2} d, with the p<2 singularity at 0 mapped to 0.
double pflux(double d, double p) {
  if (d == 0.0) return 0.0;
  return std::pow(std::abs(d), p - 2.0) * d;
}

struct PwqPiece {
  double lo, hi;
  std::array<double, 3> coef;
};

double pwq_piece_eval(const std::array<double, 3>& c, double x) {
  return c[0] * x * x + c[1] * x + c[2];
}

double pwq_piece_slope(const std::array<double, 3>& c, double x) {
  return 2.0 * c[0] * x + c[1];
}

// Value and one-sided slopes of a PiecewiseQuad1D at x (x inside the domain).
struct PwqLocal {
  double value;
  double slope_lo, slope_hi;
};

PwqLocal pwq_local(const PiecewiseQuad1D& p, double x) {
  const auto& br = p.breaks;
  size_t i = std::upper_bound(br.begin(), br.end(), x) - br.begin();
  PwqLocal out;
  out.value = pwq_piece_eval(p.coef[i], x);
  out.slope_lo = out.slope_hi = pwq_piece_slope(p.coef[i], x);
  // on a breakpoint the neighbour pieces supply the one-sided slopes
  if (i > 0 && x <= br[i - 1] + kAbsTol * (1.0 + std::abs(br[i - 1])))
    out.slope_lo = pwq_piece_slope(p.coef[i - 1], x);
  if (i < br.size() && x >= br[i] - kAbsTol * (1.0 + std::abs(br[i])))
    out.slope_hi = pwq_piece_slope(p.coef[i + 1], x);
  return out;
}

void validate_pwq(const PiecewiseQuad1D& p) {
  if (p.coef.size() != p.breaks.size() + 1)
    throw std::invalid_argument("PiecewiseQuad1D: need breaks.size()+1 pieces");
  for (size_t i = 0; i + 1 < p.breaks.size(); ++i)
    if (!(p.breaks[i] < p.breaks[i + 1]))
      throw std::invalid_argument("PiecewiseQuad1D: breaks must increase");
  for (const auto& c : p.coef)
    if (c[0] < -kAbsTol)
      throw std::invalid_argument("PiecewiseQuad1D: concave piece");
  for (size_t i = 0; i < p.breaks.size(); ++i) {
    double x = p.breaks[i];
    double fl = pwq_piece_eval(p.coef[i], x);
    double fr = pwq_piece_eval(p.coef[i + 1], x);
    double scale = 1.0 + std::abs(fl) + std::abs(fr);
    if (std::abs(fl - fr) > 1e-9 * scale)
      throw std::invalid_argument("PiecewiseQuad1D: discontinuous at break");
    double sl = pwq_piece_slope(p.coef[i], x);
    double sr = pwq_piece_slope(p.coef[i + 1], x);
    if (sl > sr + 1e-9 * (1.0 + std::abs(sl) + std::abs(sr)))
      throw std::invalid_argument("PiecewiseQuad1D: slope drop at break");
  }
}

double grid_scale(const std::vector<double>& vals) {
  double s = 1.0;
  for (double v : vals)
    if (std::isfinite(v)) s = std::max(s, std::abs(v));
  return s;
}

void validate_grid_line(const double* vals, int n, int stride, double scale) {
  for (int k = 1; k + 1 < n; ++k) {
    double fm = vals[(k - 1) * stride], f0 = vals[k * stride],
           fp = vals[(k + 1) * stride];
    if (!std::isfinite(f0) && std::isfinite(fm) && std::isfinite(fp))
      throw std::invalid_argument("grid: +inf node between finite nodes");
    if (std::isfinite(fm) && std::isfinite(f0) && std::isfinite(fp) &&
        fm - 2.0 * f0 + fp < -1e-12 * scale)
      throw std::invalid_argument("grid: values not convex along axis line");
  }
}

// Lower convex hull of samples sorted by x; returns indices into (xs, fs).
std::vector<int> lower_hull(const std::vector<double>& xs,
                            const std::vector<double>& fs) {
  std::vector<int> hull;
  for (int i = 0; i < (int)xs.size(); ++i) {
    if (!std::isfinite(fs[i])) continue;
    while (hull.size() >= 2) {
      int a = hull[hull.size() - 2], b = hull.back();
      // drop b if it lies on or above segment a--i
      double lhs = (fs[b] - fs[a]) * (xs[i] - xs[a]);
      double rhs = (fs[i] - fs[a]) * (xs[b] - xs[a]);
      if (lhs >= rhs)
        hull.pop_back();
      else
        break;
    }
    hull.push_back(i);
  }
  return hull;
}

// Newton solve of sup_x { y·x − φ(x) } for the p-Laplacian potential.
struct SupResult {
  double value;
  Vec argmax;
};

void plap_grad_hess(const PLapPotential& pl, const Vec& v, Vec* grad,
                    Mat* hess) {
  int n = pl.n;
  double h = 1.0 / (n + 1);
  Vec d(n + 1);
  for (int i = 0; i <= n; ++i) {
    double vl = (i == 0) ? 0.0 : v[i - 1];
    double vr = (i == n) ? 0.0 : v[i];
    d[i] = (vr - vl) / h;
  }
  if (grad) {
    grad->setZero(n);
    for (int j = 1; j <= n; ++j)
      (*grad)[j - 1] = pflux(d[j - 1], pl.p) - pflux(d[j], pl.p);
  }
  if (hess) {
    hess->setZero(n, n);
    for (int i = 0; i <= n; ++i) {
      double w = (pl.p - 1.0) * std::pow(std::abs(d[i]), pl.p - 2.0) / h;
      if (!std::isfinite(w)) w = 0.0;
      if (i >= 1) (*hess)(i - 1, i - 1) += w;
      if (i <= n - 1) (*hess)(i, i) += w;
      if (i >= 1 && i <= n - 1) {
        (*hess)(i - 1, i) -= w;
        (*hess)(i, i - 1) -= w;
      }
    }
  }
}

double plap_value(const PLapPotential& pl, const Vec& v) {
  int n = pl.n;
  double h = 1.0 / (n + 1);
  double acc = 0.0;
  for (int i = 0; i <= n; ++i) {
    double vl = (i == 0) ? 0.0 : v[i - 1];
    double vr = (i == n) ? 0.0 : v[i];
    acc += std::pow(std::abs((vr - vl) / h), pl.p);
  }
  return h * acc / pl.p;
}

SupResult plap_conjugate_sup(const PLapPotential& pl, const Vec& y) {
  int n = pl.n;
  Vec x = Vec::Zero(n);
  double lambda = 1e-10;
  Vec g(n);
  Mat H(n, n);
  double fcur = plap_value(pl, x) - y.dot(x);
  for (int it = 0; it < 200; ++it) {
    plap_grad_hess(pl, x, &g, &H);
    g -= y;
    if (g.norm() <= 1e-11 * (1.0 + y.norm())) break;
    bool accepted = false;
    for (int inner = 0; inner < 60; ++inner) {
      Mat Hl = H + lambda * Mat::Identity(n, n);
      Vec step = Hl.ldlt().solve(-g);
      Vec xn = x + step;
      double fn = plap_value(pl, xn) - y.dot(xn);
      if (fn < fcur) {
        x = xn;
        fcur = fn;
        lambda = std::max(lambda / 3.0, 1e-12);
        accepted = true;
        break;
      }
      lambda *= 10.0;
    }
    if (!accepted) break;
  }
  return {y.dot(x) - plap_value(pl, x), x};
}

}  // namespace

// ---------------------------------------------------------------------------
// construction / validation
// ---------------------------------------------------------------------------

ConvexFn::ConvexFn(int dim, ConvexRepr repr) : dim_(dim), repr_(std::move(repr)) {
  if (dim_ <= 0) throw std::invalid_argument("ConvexFn: dim must be positive");
  std::visit(
      [&](const auto& r) {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, Quadratic>) {
          if (!(r.b > 0)) throw std::invalid_argument("Quadratic: b > 0 required");
        } else if constexpr (std::is_same_v<T, AbsPower>) {
          if (!(r.p >= 1.0)) throw std::invalid_argument("AbsPower: p >= 1");
        } else if constexpr (std::is_same_v<T, IndicatorBox>) {
          if (r.lo.size() != dim_ || r.hi.size() != dim_ ||
              (r.lo.array() > r.hi.array()).any())
            throw std::invalid_argument("IndicatorBox: bad bounds");
        } else if constexpr (std::is_same_v<T, PiecewiseQuad1D>) {
          if (dim_ != 1) throw std::invalid_argument("PiecewiseQuad1D: dim 1");
          validate_pwq(r);
        } else if constexpr (std::is_same_v<T, Grid1D>) {
          if (dim_ != 1) throw std::invalid_argument("Grid1D: dim 1");
          if (r.vals.size() < 2 || !(r.hi > r.lo))
            throw std::invalid_argument("Grid1D: bad domain");
          if (std::none_of(r.vals.begin(), r.vals.end(),
                           [](double v) { return std::isfinite(v); }))
            throw std::invalid_argument("Grid1D: improper (all +inf)");
          validate_grid_line(r.vals.data(), (int)r.vals.size(), 1,
                             grid_scale(r.vals));
        } else if constexpr (std::is_same_v<T, Grid2D>) {
          if (dim_ != 2) throw std::invalid_argument("Grid2D: dim 2");
          if (r.n[0] < 2 || r.n[1] < 2 ||
              (int)r.vals.size() != r.n[0] * r.n[1])
            throw std::invalid_argument("Grid2D: bad node counts");
          if (std::none_of(r.vals.begin(), r.vals.end(),
                           [](double v) { return std::isfinite(v); }))
            throw std::invalid_argument("Grid2D: improper (all +inf)");
          double scale = grid_scale(r.vals);
          for (int i = 0; i < r.n[0]; ++i)
            validate_grid_line(r.vals.data() + i * r.n[1], r.n[1], 1, scale);
          for (int j = 0; j < r.n[1]; ++j)
            validate_grid_line(r.vals.data() + j, r.n[0], r.n[1], scale);
        } else if constexpr (std::is_same_v<T, PLapPotential>) {
          if (!(r.p >= 2.0) || r.n < 1)
            throw std::invalid_argument("PLapPotential: need p >= 2, n >= 1");
          if (dim_ != r.n) throw std::invalid_argument("PLapPotential: dim = n");
        } else if constexpr (std::is_same_v<T, Wrap>) {
          if (!r.base || !(r.vscale > 0) || r.ascale == 0.0)
            throw std::invalid_argument("Wrap: need base, vscale > 0, ascale != 0");
        } else if constexpr (std::is_same_v<T, NumericConj>) {
          if (!r.base) throw std::invalid_argument("NumericConj: missing base");
        }
      },
      repr_);
}

// ---------------------------------------------------------------------------
// evaluation
// ---------------------------------------------------------------------------

ExtReal ConvexFn::eval(const Vec& x) const {
  if (x.size() != dim_)
    throw std::invalid_argument("ConvexFn::eval: dimension mismatch");
  return std::visit(
      [&](const auto& r) -> ExtReal {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, Quadratic>) {
          return ExtReal(r.b * x.squaredNorm());
        } else if constexpr (std::is_same_v<T, HalfNormSq>) {
          return ExtReal(0.5 * x.squaredNorm());
        } else if constexpr (std::is_same_v<T, AbsPower>) {
          return ExtReal(std::pow(x.norm(), r.p) / r.p);
        } else if constexpr (std::is_same_v<T, IndicatorPoint>) {
          double tol = kAbsTol * (1.0 + r.c.norm());
          return ((x - r.c).cwiseAbs().maxCoeff() <= tol)
                     ? ExtReal(0.0)
                     : ExtReal::infinity();
        } else if constexpr (std::is_same_v<T, IndicatorBox>) {
          for (int i = 0; i < dim_; ++i) {
            double tol = kAbsTol * (1.0 + std::abs(r.lo[i]) + std::abs(r.hi[i]));
            if (x[i] < r.lo[i] - tol || x[i] > r.hi[i] + tol)
              return ExtReal::infinity();
          }
          return ExtReal(0.0);
        } else if constexpr (std::is_same_v<T, IndicatorBall>) {
          return (x.norm() <= r.r + kAbsTol * (1.0 + r.r))
                     ? ExtReal(0.0)
                     : ExtReal::infinity();
        } else if constexpr (std::is_same_v<T, BoxSupport>) {
          double acc = 0.0;
          for (int i = 0; i < dim_; ++i)
            acc += std::max(r.lo[i] * x[i], r.hi[i] * x[i]);
          return ExtReal(acc);
        } else if constexpr (std::is_same_v<T, LinearFn>) {
          return ExtReal(r.a.dot(x) + r.off);
        } else if constexpr (std::is_same_v<T, PiecewiseQuad1D>) {
          double t = x[0];
          double tol = kAbsTol * (1.0 + std::abs(r.dom_lo) + std::abs(r.dom_hi));
          if (t < r.dom_lo - tol || t > r.dom_hi + tol)
            return ExtReal::infinity();
          t = std::clamp(t, r.dom_lo, r.dom_hi);
          return ExtReal(pwq_local(r, t).value);
        } else if constexpr (std::is_same_v<T, Grid1D>) {
          int n = (int)r.vals.size();
          double h = (r.hi - r.lo) / (n - 1);
          double s = (x[0] - r.lo) / h;
          if (s < -1e-9 || s > n - 1 + 1e-9) return ExtReal::infinity();
          int k = std::clamp((int)std::floor(s), 0, n - 2);
          double th = s - k;
          double f0 = r.vals[k], f1 = r.vals[k + 1];
          if (th <= 1e-12) return std::isfinite(f0) ? ExtReal(f0) : ExtReal::infinity();
          if (th >= 1.0 - 1e-12)
            return std::isfinite(f1) ? ExtReal(f1) : ExtReal::infinity();
          if (!std::isfinite(f0) || !std::isfinite(f1)) return ExtReal::infinity();
          return ExtReal((1.0 - th) * f0 + th * f1);
        } else if constexpr (std::is_same_v<T, Grid2D>) {
          double sv[2];
          int k[2];
          double th[2];
          for (int ax = 0; ax < 2; ++ax) {
            double h = (r.hi[ax] - r.lo[ax]) / (r.n[ax] - 1);
            sv[ax] = (x[ax] - r.lo[ax]) / h;
            if (sv[ax] < -1e-9 || sv[ax] > r.n[ax] - 1 + 1e-9)
              return ExtReal::infinity();
            k[ax] = std::clamp((int)std::floor(sv[ax]), 0, r.n[ax] - 2);
            th[ax] = sv[ax] - k[ax];
          }
          double acc = 0.0;
          for (int di = 0; di < 2; ++di)
            for (int dj = 0; dj < 2; ++dj) {
              double w = (di ? th[0] : 1.0 - th[0]) * (dj ? th[1] : 1.0 - th[1]);
              if (w <= 1e-14) continue;
              double f = r.vals[(k[0] + di) * r.n[1] + (k[1] + dj)];
              if (!std::isfinite(f)) return ExtReal::infinity();
              acc += w * f;
            }
          return ExtReal(acc);
        } else if constexpr (std::is_same_v<T, PLapPotential>) {
          return ExtReal(plap_value(r, x));
        } else if constexpr (std::is_same_v<T, Wrap>) {
          Vec arg = r.ascale * x;
          if (r.shift.size() > 0) arg -= r.shift;
          ExtReal b = r.base->eval(arg);
          if (b.is_inf()) return ExtReal::infinity();
          double lin = (r.tilt.size() > 0) ? r.tilt.dot(x) : 0.0;
          return ExtReal(r.vscale * b.value() + lin + r.off);
        } else {  // NumericConj
          const NumericConj& nc = std::get<NumericConj>(repr_);
          const auto* pl = std::get_if<PLapPotential>(&nc.base->repr());
          if (!pl)
            throw std::logic_error("NumericConj: unsupported base potential");
          return ExtReal(plap_conjugate_sup(*pl, x).value);
        }
      },
      repr_);
}

ExtReal ConvexFn::eval1(double x) const { return eval(vec1(x)); }

// ---------------------------------------------------------------------------
// conjugation
// ---------------------------------------------------------------------------

namespace {

ConvexFn conjugate_pwq(const PiecewiseQuad1D& p) {
  // enumerate slope intervals left to right
  std::vector<PwqPiece> out;
  size_t m = p.coef.size();
  auto lo_of = [&](size_t i) { return i == 0 ? p.dom_lo : p.breaks[i - 1]; };
  auto hi_of = [&](size_t i) { return i == m - 1 ? p.dom_hi : p.breaks[i]; };

  // lower domain end
  if (std::isfinite(p.dom_lo)) {
    double s0 = pwq_piece_slope(p.coef[0], p.dom_lo);
    out.push_back({-kInf, s0, {0.0, p.dom_lo, -pwq_piece_eval(p.coef[0], p.dom_lo)}});
  }
  for (size_t i = 0; i < m; ++i) {
    double L = lo_of(i), R = hi_of(i);
    if (L >= R) continue;
    double a = p.coef[i][0], b = p.coef[i][1], c = p.coef[i][2];
    if (a > kAbsTol) {
      double sL = std::isfinite(L) ? 2 * a * L + b : -kInf;
      double sR = std::isfinite(R) ? 2 * a * R + b : kInf;
      out.push_back({sL, sR, {1.0 / (4 * a), -b / (2 * a), b * b / (4 * a) - c}});
    }
    // kink between this piece and the next
    if (i + 1 < m && std::isfinite(R)) {
      double sl = pwq_piece_slope(p.coef[i], R);
      double sr = pwq_piece_slope(p.coef[i + 1], R);
      if (sr > sl + kAbsTol * (1.0 + std::abs(sl)))
        out.push_back({sl, sr, {0.0, R, -pwq_piece_eval(p.coef[i], R)}});
    }
  }
  if (std::isfinite(p.dom_hi)) {
    double s1 = pwq_piece_slope(p.coef[m - 1], p.dom_hi);
    out.push_back({s1, kInf, {0.0, p.dom_hi, -pwq_piece_eval(p.coef[m - 1], p.dom_hi)}});
  }

  std::sort(out.begin(), out.end(),
            [](const PwqPiece& x, const PwqPiece& y) { return x.lo < y.lo; });
  if (out.empty()) {
    // f is globally affine a·x + c: conjugate is the indicator of {a} − c
    double slope = p.coef[0][1], c = p.coef[0][2];
    PiecewiseQuad1D q;
    q.coef = {{0.0, 0.0, -c}};
    q.dom_lo = q.dom_hi = slope;
    return ConvexFn(1, std::move(q));
  }
  PiecewiseQuad1D q;
  q.dom_lo = out.front().lo;
  q.dom_hi = out.back().hi;
  for (size_t i = 0; i < out.size(); ++i) {
    q.coef.push_back(out[i].coef);
    if (i + 1 < out.size()) q.breaks.push_back(out[i].hi);
  }
  return ConvexFn(1, std::move(q));
}

std::vector<double> grid_nodes(double lo, double hi, int n) {
  std::vector<double> xs(n);
  double h = (hi - lo) / (n - 1);
  for (int i = 0; i < n; ++i) xs[i] = lo + i * h;
  return xs;
}

ConvexFn conjugate_grid1(const Grid1D& g) {
  int n = (int)g.vals.size();
  auto xs = grid_nodes(g.lo, g.hi, n);
  auto [ylo, yhi] = llt_slope_extent(xs, g.vals);
  auto ys = grid_nodes(ylo, yhi, n);
  return ConvexFn(1, Grid1D{ylo, yhi, llt_1d(xs, g.vals, ys)});
}

ConvexFn conjugate_grid2(const Grid2D& g) {
  auto x0 = grid_nodes(g.lo[0], g.hi[0], g.n[0]);
  auto x1 = grid_nodes(g.lo[1], g.hi[1], g.n[1]);
  // pass 1: per axis-0 row, conjugate along axis 1
  double y1lo = kInf, y1hi = -kInf;
  std::vector<std::vector<double>> rowvals(g.n[0]);
  std::vector<bool> rowfinite(g.n[0], false);
  for (int i = 0; i < g.n[0]; ++i) {
    std::vector<double> fs(g.n[1]);
    for (int j = 0; j < g.n[1]; ++j) fs[j] = g.vals[i * g.n[1] + j];
    rowvals[i] = std::move(fs);
    rowfinite[i] = std::any_of(rowvals[i].begin(), rowvals[i].end(),
                               [](double v) { return std::isfinite(v); });
    if (rowfinite[i]) {
      auto [lo, hi] = llt_slope_extent(x1, rowvals[i]);
      y1lo = std::min(y1lo, lo);
      y1hi = std::max(y1hi, hi);
    }
  }
  auto y1 = grid_nodes(y1lo, y1hi, g.n[1]);
  std::vector<std::vector<double>> partial(g.n[0]);  // g(x0_i, y1_j)
  for (int i = 0; i < g.n[0]; ++i)
    if (rowfinite[i]) partial[i] = llt_1d(x1, rowvals[i], y1);

  // pass 2: conjugate −partial along axis 0 for each y1 column
  double y0lo = kInf, y0hi = -kInf;
  std::vector<std::vector<double>> cols(g.n[1]);
  for (int j = 0; j < g.n[1]; ++j) {
    std::vector<double> fs(g.n[0], kInf);
    for (int i = 0; i < g.n[0]; ++i)
      if (rowfinite[i]) fs[i] = -partial[i][j];
    cols[j] = std::move(fs);
    auto [lo, hi] = llt_slope_extent(x0, cols[j]);
    y0lo = std::min(y0lo, lo);
    y0hi = std::max(y0hi, hi);
  }
  auto y0 = grid_nodes(y0lo, y0hi, g.n[0]);
  std::vector<double> vals(g.n[0] * g.n[1]);
  for (int j = 0; j < g.n[1]; ++j) {
    auto col = llt_1d(x0, cols[j], y0);
    for (int i = 0; i < g.n[0]; ++i) vals[i * g.n[1] + j] = col[i];
  }
  return ConvexFn(2, Grid2D{{y0lo, y1lo}, {y0hi, y1hi}, g.n, std::move(vals)});
}

}  // namespace

ConvexFn ConvexFn::conjugate() const {
  return std::visit(
      [&](const auto& r) -> ConvexFn {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, Quadratic>) {
          return ConvexFn(dim_, Quadratic{1.0 / (4.0 * r.b)});
        } else if constexpr (std::is_same_v<T, HalfNormSq>) {
          return ConvexFn(dim_, HalfNormSq{});
        } else if constexpr (std::is_same_v<T, AbsPower>) {
          if (r.p == 1.0) return ConvexFn(dim_, IndicatorBall{1.0});
          double q = r.p / (r.p - 1.0);
          return ConvexFn(dim_, AbsPower{q});
        } else if constexpr (std::is_same_v<T, IndicatorPoint>) {
          return ConvexFn(dim_, LinearFn{r.c, 0.0});
        } else if constexpr (std::is_same_v<T, IndicatorBox>) {
          return ConvexFn(dim_, BoxSupport{r.lo, r.hi});
        } else if constexpr (std::is_same_v<T, IndicatorBall>) {
          // r‖y‖
          auto base = std::make_shared<ConvexFn>(dim_, AbsPower{1.0});
          return ConvexFn(dim_, Wrap{base, r.r, 1.0, Vec(), Vec(), 0.0});
        } else if constexpr (std::is_same_v<T, BoxSupport>) {
          return ConvexFn(dim_, IndicatorBox{r.lo, r.hi});
        } else if constexpr (std::is_same_v<T, LinearFn>) {
          auto base = std::make_shared<ConvexFn>(dim_, IndicatorPoint{r.a});
          return ConvexFn(dim_, Wrap{base, 1.0, 1.0, Vec(), Vec(), -r.off});
        } else if constexpr (std::is_same_v<T, PiecewiseQuad1D>) {
          return conjugate_pwq(r);
        } else if constexpr (std::is_same_v<T, Grid1D>) {
          return conjugate_grid1(r);
        } else if constexpr (std::is_same_v<T, Grid2D>) {
          return conjugate_grid2(r);
        } else if constexpr (std::is_same_v<T, PLapPotential>) {
          auto base = std::make_shared<ConvexFn>(*this);
          return ConvexFn(dim_, NumericConj{base});
        } else if constexpr (std::is_same_v<T, Wrap>) {
          // (s·f(a·x − x0) + t·x + c)* = s·f*((y−t)/(sa)) + (x0/a)·y − x0·t/a − c
          ConvexFn bc = r.base->conjugate();
          auto base = std::make_shared<ConvexFn>(std::move(bc));
          double sa = r.vscale * r.ascale;
          Vec shift = (r.tilt.size() > 0) ? Vec(r.tilt / sa) : Vec();
          Vec tilt = (r.shift.size() > 0) ? Vec(r.shift / r.ascale) : Vec();
          double off = -r.off;
          if (r.shift.size() > 0 && r.tilt.size() > 0)
            off -= r.shift.dot(r.tilt) / r.ascale;
          return ConvexFn(dim_,
                          Wrap{base, r.vscale, 1.0 / sa, shift, tilt, off});
        } else {  // NumericConj
          return *std::get<NumericConj>(repr_).base;  // f** = f (proper lsc)
        }
      },
      repr_);
}

// ---------------------------------------------------------------------------
// subdifferential
// ---------------------------------------------------------------------------

namespace {

std::vector<Vec> interval_samples_1d(double lo, double hi) {
  double tol = kAbsTol * (1.0 + std::abs(lo) + std::abs(hi));
  if (hi - lo <= tol) return {vec1(0.5 * (lo + hi))};
  return {vec1(lo), vec1(0.5 * (lo + hi)), vec1(hi)};
}

}  // namespace

std::vector<Vec> ConvexFn::subdifferential(const Vec& x) const {
  if (eval(x).is_inf())
    throw std::domain_error("subdifferential: f(x) = +inf");
  return std::visit(
      [&](const auto& r) -> std::vector<Vec> {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, Quadratic>) {
          return {2.0 * r.b * x};
        } else if constexpr (std::is_same_v<T, HalfNormSq>) {
          return {x};
        } else if constexpr (std::is_same_v<T, AbsPower>) {
          double nx = x.norm();
          if (nx > 0.0) return {std::pow(nx, r.p - 2.0) * x};
          if (r.p > 1.0) return {Vec::Zero(dim_)};
          // ∂‖·‖(0): unit ball, endpoint + center samples
          if (dim_ == 1) return {vec1(-1.0), vec1(0.0), vec1(1.0)};
          std::vector<Vec> out = {Vec::Zero(dim_)};
          for (int i = 0; i < dim_; ++i) {
            Vec e = Vec::Zero(dim_);
            e[i] = 1.0;
            out.push_back(e);
            out.push_back(-e);
          }
          return out;
        } else if constexpr (std::is_same_v<T, IndicatorPoint> ||
                             std::is_same_v<T, IndicatorBox> ||
                             std::is_same_v<T, IndicatorBall>) {
          // normal cone; 0 is always a valid selection at feasible points
          return {Vec::Zero(dim_)};
        } else if constexpr (std::is_same_v<T, BoxSupport>) {
          Vec lo(dim_), hi(dim_), mid(dim_);
          bool kink = false;
          for (int i = 0; i < dim_; ++i) {
            if (x[i] > 0) {
              lo[i] = hi[i] = mid[i] = r.hi[i];
            } else if (x[i] < 0) {
              lo[i] = hi[i] = mid[i] = r.lo[i];
            } else {
              lo[i] = r.lo[i];
              hi[i] = r.hi[i];
              mid[i] = 0.5 * (r.lo[i] + r.hi[i]);
              kink = true;
            }
          }
          if (!kink) return {mid};
          return {lo, mid, hi};
        } else if constexpr (std::is_same_v<T, LinearFn>) {
          return {r.a};
        } else if constexpr (std::is_same_v<T, PiecewiseQuad1D>) {
          PwqLocal loc = pwq_local(r, x[0]);
          return interval_samples_1d(loc.slope_lo, loc.slope_hi);
        } else if constexpr (std::is_same_v<T, Grid1D>) {
          int n = (int)r.vals.size();
          double h = (r.hi - r.lo) / (n - 1);
          double s = (x[0] - r.lo) / h;
          int k = (int)std::lround(s);
          if (std::abs(s - k) > 1e-9 || k < 0 || k > n - 1) {
            // strictly inside a cell: interpolant slope is the quotient
            int c = std::clamp((int)std::floor(s), 0, n - 2);
            return {vec1((r.vals[c + 1] - r.vals[c]) / h)};
          }
          double lo = (k > 0 && std::isfinite(r.vals[k - 1]))
                          ? (r.vals[k] - r.vals[k - 1]) / h
                          : -kInf;
          double hi = (k < n - 1 && std::isfinite(r.vals[k + 1]))
                          ? (r.vals[k + 1] - r.vals[k]) / h
                          : kInf;
          if (!std::isfinite(lo)) lo = std::isfinite(hi) ? hi : 0.0;
          if (!std::isfinite(hi)) hi = lo;
          return interval_samples_1d(lo, hi);
        } else if constexpr (std::is_same_v<T, Grid2D>) {
          Vec lo(2), hi(2), mid(2);
          bool kink = false;
          for (int ax = 0; ax < 2; ++ax) {
            double h = (r.hi[ax] - r.lo[ax]) / (r.n[ax] - 1);
            double s = (x[ax] - r.lo[ax]) / h;
            int k = std::clamp((int)std::lround(s), 0, r.n[ax] - 1);
            int stride = ax == 0 ? r.n[1] : 1;
            int other = ax == 0
                            ? std::clamp((int)std::lround((x[1] - r.lo[1]) /
                                                          ((r.hi[1] - r.lo[1]) /
                                                           (r.n[1] - 1))),
                                         0, r.n[1] - 1)
                            : std::clamp((int)std::lround((x[0] - r.lo[0]) /
                                                          ((r.hi[0] - r.lo[0]) /
                                                           (r.n[0] - 1))),
                                         0, r.n[0] - 1);
          auto at = [&](int kk) {
              int i = ax == 0 ? kk : other;
              int j = ax == 0 ? other : kk;
              return r.vals[i * r.n[1] + j];
            };
            double l = (k > 0 && std::isfinite(at(k - 1)) && std::isfinite(at(k)))
                           ? (at(k) - at(k - 1)) / h
                           : kInf;
            double u = (k < r.n[ax] - 1 && std::isfinite(at(k + 1)) &&
                        std::isfinite(at(k)))
                           ? (at(k + 1) - at(k)) / h
                           : kInf;
            if (!std::isfinite(l)) l = std::isfinite(u) ? u : 0.0;
            if (!std::isfinite(u)) u = l;
            lo[ax] = l;
            hi[ax] = u;
            mid[ax] = 0.5 * (l + u);
            if (u - l > 1e-12 * (1 + std::abs(l) + std::abs(u))) kink = true;
          }
          if (!kink) return {mid};
          return {lo, mid, hi};
        } else if constexpr (std::is_same_v<T, PLapPotential>) {
          Vec g;
          plap_grad_hess(r, x, &g, nullptr);
          return {g};
        } else if constexpr (std::is_same_v<T, Wrap>) {
          Vec arg = r.ascale * x;
          if (r.shift.size() > 0) arg -= r.shift;
          auto subs = r.base->subdifferential(arg);
          for (auto& s : subs) {
            s *= r.vscale * r.ascale;
            if (r.tilt.size() > 0) s += r.tilt;
          }
          return subs;
        } else {  // NumericConj: ∂f*(y) = argmax of the defining sup
          const NumericConj& nc = std::get<NumericConj>(repr_);
          const auto* pl = std::get_if<PLapPotential>(&nc.base->repr());
          if (!pl)
            throw std::logic_error("NumericConj: unsupported base potential");
          return {plap_conjugate_sup(*pl, x).argmax};
        }
      },
      repr_);
}

Vec ConvexFn::subgradient(const Vec& x) const {
  auto s = subdifferential(x);
  return s[s.size() / 2];
}

bool ConvexFn::smooth() const {
  return std::visit(
      [&](const auto& r) -> bool {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, Quadratic> ||
                      std::is_same_v<T, HalfNormSq> ||
                      std::is_same_v<T, LinearFn> ||
                      std::is_same_v<T, PLapPotential> ||
                      std::is_same_v<T, NumericConj>) {
          return true;
        } else if constexpr (std::is_same_v<T, AbsPower>) {
          return r.p > 1.0;
        } else if constexpr (std::is_same_v<T, Wrap>) {
          return r.base->smooth();
        } else {
          return false;
        }
      },
      repr_);
}

ExtReal ConvexFn::fenchel_young_gap(const Vec& x, const Vec& y) const {
  return fenchel_young_gap(conjugate(), x, y);
}

ExtReal ConvexFn::fenchel_young_gap(const ConvexFn& conj, const Vec& x,
                                    const Vec& y) const {
  ExtReal fx = eval(x), fy = conj.eval(y);
  if (fx.is_inf() || fy.is_inf()) return ExtReal::infinity();
  return ExtReal(fx.value() + fy.value() - x.dot(y));
}

// ---------------------------------------------------------------------------
// factories
// ---------------------------------------------------------------------------

ConvexFn ConvexFn::quadratic(double b, int dim) { return ConvexFn(dim, Quadratic{b}); }
ConvexFn ConvexFn::half_norm_sq(int dim) { return ConvexFn(dim, HalfNormSq{}); }
ConvexFn ConvexFn::abs_power(double p, int dim) { return ConvexFn(dim, AbsPower{p}); }
ConvexFn ConvexFn::indicator_point(const Vec& c) {
  return ConvexFn((int)c.size(), IndicatorPoint{c});
}
ConvexFn ConvexFn::indicator_point_zero(int dim) {
  return indicator_point(Vec::Zero(dim));
}
ConvexFn ConvexFn::indicator_box(const Vec& lo, const Vec& hi) {
  return ConvexFn((int)lo.size(), IndicatorBox{lo, hi});
}
ConvexFn ConvexFn::indicator_ball(double r, int dim) {
  return ConvexFn(dim, IndicatorBall{r});
}
ConvexFn ConvexFn::linear(const Vec& a, double off) {
  return ConvexFn((int)a.size(), LinearFn{a, off});
}
ConvexFn ConvexFn::piecewise_quad_1d(std::vector<double> breaks,
                                     std::vector<std::array<double, 3>> coef) {
  PiecewiseQuad1D p;
  p.breaks = std::move(breaks);
  p.coef = std::move(coef);
  return ConvexFn(1, std::move(p));
}
ConvexFn ConvexFn::grid_1d(double lo, double hi, std::vector<double> vals) {
  return ConvexFn(1, Grid1D{lo, hi, std::move(vals)});
}
ConvexFn ConvexFn::grid_2d(std::array<double, 2> lo, std::array<double, 2> hi,
                           std::array<int, 2> n, std::vector<double> vals) {
  return ConvexFn(2, Grid2D{lo, hi, n, std::move(vals)});
}
ConvexFn ConvexFn::plap_potential(double p, int n) {
  return ConvexFn(n, PLapPotential{p, n});
}
ConvexFn ConvexFn::scaled(const ConvexFn& f, double s) {
  auto base = std::make_shared<ConvexFn>(f);
  return ConvexFn(f.dim(), Wrap{base, s, 1.0, Vec(), Vec(), 0.0});
}
ConvexFn ConvexFn::shifted(const ConvexFn& f, const Vec& x0) {
  auto base = std::make_shared<ConvexFn>(f);
  return ConvexFn(f.dim(), Wrap{base, 1.0, 1.0, x0, Vec(), 0.0});
}

ExtReal biconjugate_check(const ConvexFn& f, const std::vector<Vec>& probes) {
  ConvexFn fcc = f.conjugate().conjugate();
  ExtReal worst(0.0);
  for (const Vec& x : probes) {
    ExtReal fx = f.eval(x);
    if (fx.is_inf()) continue;
    ExtReal gx = fcc.eval(x);
    if (gx.is_inf()) return ExtReal::infinity();
    double dev = std::abs(gx.value() - fx.value());
    if (ExtReal(dev) > worst) worst = ExtReal(dev);
  }
  return worst;
}

// ---------------------------------------------------------------------------
// discrete Legendre transform
// ---------------------------------------------------------------------------

std::vector<double> llt_1d(const std::vector<double>& xs,
                           const std::vector<double>& fs,
                           const std::vector<double>& ygrid) {
  auto hull = lower_hull(xs, fs);
  if (hull.empty())
    throw std::invalid_argument("llt_1d: no finite samples");
  std::vector<double> out(ygrid.size());
  size_t idx = 0;
  for (size_t j = 0; j < ygrid.size(); ++j) {
    double y = ygrid[j];
    while (idx + 1 < hull.size() &&
           y * xs[hull[idx + 1]] - fs[hull[idx + 1]] >
               y * xs[hull[idx]] - fs[hull[idx]])
      ++idx;
    out[j] = y * xs[hull[idx]] - fs[hull[idx]];
  }
  return out;
}

std::pair<double, double> llt_slope_extent(const std::vector<double>& xs,
                                           const std::vector<double>& fs) {
  auto hull = lower_hull(xs, fs);
  if (hull.empty())
    throw std::invalid_argument("llt_slope_extent: no finite samples");
  double smin = kInf, smax = -kInf;
  for (size_t i = 0; i + 1 < hull.size(); ++i) {
    double s = (fs[hull[i + 1]] - fs[hull[i]]) / (xs[hull[i + 1]] - xs[hull[i]]);
    smin = std::min(smin, s);
    smax = std::max(smax, s);
  }
  if (!std::isfinite(smin)) {  // single hull vertex, e.g. a point indicator
    smin = smax = 0.0;
  }
  double pad = 0.1 * (smax - smin);
  if (pad <= 0.0) pad = 0.1 * (1.0 + std::abs(smin));
  return {smin - pad, smax + pad};
}

}  // namespace fitzflow
