#pragma once

#include <Eigen/Dense>
#include <array>
#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "fitzflow/ext_real.hpp"

namespace fitzflow {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

class ConvexFn;
using ConvexFnPtr = std::shared_ptr<const ConvexFn>;

// ---------------------------------------------------------------------------
// Catalog representations. All functions are proper, convex, lsc on R^d with
// values in R ∪ {+∞}.
// ---------------------------------------------------------------------------

/// x ↦ b‖x‖², b > 0.
struct Quadratic {
  double b;
};

/// x ↦ ½‖x‖².
struct HalfNormSq {};

/// x ↦ ‖x‖^p / p, p ≥ 1.
struct AbsPower {
  double p;
};

struct IndicatorPoint {
  Vec c;
};

struct IndicatorBox {
  Vec lo, hi;
};

/// Ball centered at the origin.
struct IndicatorBall {
  double r;
};

/// x ↦ sup_{z ∈ [lo,hi]} z·x (support function of a box).
struct BoxSupport {
  Vec lo, hi;
};

/// x ↦ a·x + off.
struct LinearFn {
  Vec a;
  double off = 0.0;
};

/// 1D continuous piecewise quadratic, piece i = a x² + b x + c valid between
/// consecutive breakpoints; first/last pieces extend to the domain bounds
/// (±∞ by default), +∞ outside [dom_lo, dom_hi]. Convexity is validated at
/// construction: a_i ≥ 0, continuity, slope monotone across breaks.
struct PiecewiseQuad1D {
  std::vector<double> breaks;                 // strictly increasing, size m
  std::vector<std::array<double, 3>> coef;    // size m+1, {a, b, c}
  double dom_lo = -std::numeric_limits<double>::infinity();
  double dom_hi = std::numeric_limits<double>::infinity();
};

/// Uniform 1D grid samples on [lo, hi]; +∞ nodes allowed; +∞ outside the box.
struct Grid1D {
  double lo, hi;
  std::vector<double> vals;  // node k at lo + k·(hi-lo)/(n-1); +inf allowed
};

/// Uniform 2D grid, row-major vals[i*n[1] + j], axis 0 index i.
struct Grid2D {
  std::array<double, 2> lo, hi;
  std::array<int, 2> n;
  std::vector<double> vals;
};

/// v ↦ (1/p) Σ_{i=0..N} |(Dv)_i|^p with forward differences over [0,1],
/// homogeneous Dirichlet ends, N interior nodes, mesh width 1/(N+1).
/// Its gradient is the discrete 1D p-Laplacian.
struct PLapPotential {
  double p;  // p ≥ 2
  int n;     // interior node count
};

/// g(x) = vscale · base(ascale·x − shift) + tilt·x + off; vscale > 0, ascale ≠ 0.
/// Closed under conjugation, which is how Shifted/Scaled composites propagate.
struct Wrap {
  ConvexFnPtr base;
  double vscale = 1.0;
  double ascale = 1.0;
  Vec shift;  // empty = zero
  Vec tilt;   // empty = zero
  double off = 0.0;
};

/// Conjugate of a smooth potential evaluated by solving sup_x {y·x − f(x)}
/// with a damped Newton method (used for potentials without a table entry,
/// e.g. the p-Laplacian potential).
struct NumericConj {
  ConvexFnPtr base;
};

using ConvexRepr =
    std::variant<Quadratic, HalfNormSq, AbsPower, IndicatorPoint, IndicatorBox,
                 IndicatorBall, BoxSupport, LinearFn, PiecewiseQuad1D, Grid1D,
                 Grid2D, PLapPotential, Wrap, NumericConj>;

/// Extended-real convex function on R^d.
class ConvexFn {
 public:
  ConvexFn(int dim, ConvexRepr repr);

  int dim() const { return dim_; }
  const ConvexRepr& repr() const { return repr_; }

  ExtReal eval(const Vec& x) const;
  ExtReal operator()(const Vec& x) const { return eval(x); }
  ExtReal eval1(double x) const;  // convenience, dim 1

  /// Legendre–Fenchel conjugate. Analytic table where available, linear-time
  /// discrete transform for grid forms, Newton-backed for smooth potentials.
  ConvexFn conjugate() const;

  /// Finite sample of ∂f(x): {gradient} at smooth points, {low, mid, high}
  /// selections at kinks / on grids. Throws if f(x) = +∞.
  std::vector<Vec> subdifferential(const Vec& x) const;

  /// A single subgradient selection (the "mid" element).
  Vec subgradient(const Vec& x) const;

  /// True if eval is differentiable everywhere on the interior of its domain
  /// and subgradient() returns the gradient.
  bool smooth() const;

  /// f(x) + f*(y) − x·y (≥ 0 up to round-off). Pass a cached conjugate to
  /// avoid rebuilding it.
  ExtReal fenchel_young_gap(const Vec& x, const Vec& y) const;
  ExtReal fenchel_young_gap(const ConvexFn& conj, const Vec& x,
                            const Vec& y) const;

  // ------ catalog constructors ------
  static ConvexFn quadratic(double b, int dim = 1);
  static ConvexFn half_norm_sq(int dim = 1);
  static ConvexFn abs_power(double p, int dim = 1);
  static ConvexFn indicator_point(const Vec& c);
  static ConvexFn indicator_point_zero(int dim = 1);
  static ConvexFn indicator_box(const Vec& lo, const Vec& hi);
  static ConvexFn indicator_ball(double r, int dim = 1);
  static ConvexFn linear(const Vec& a, double off = 0.0);
  static ConvexFn piecewise_quad_1d(std::vector<double> breaks,
                                    std::vector<std::array<double, 3>> coef);
  static ConvexFn grid_1d(double lo, double hi, std::vector<double> vals);
  static ConvexFn grid_2d(std::array<double, 2> lo, std::array<double, 2> hi,
                          std::array<int, 2> n, std::vector<double> vals);
  static ConvexFn plap_potential(double p, int n);
  static ConvexFn scaled(const ConvexFn& f, double s);            // s·f(x)
  static ConvexFn shifted(const ConvexFn& f, const Vec& x0);      // f(x − x0)

 private:
  int dim_;
  ConvexRepr repr_;
};

/// max over probes of |f**(x) − f(x)|, restricted to probes where f is finite.
ExtReal biconjugate_check(const ConvexFn& f, const std::vector<Vec>& probes);

// ---------------------------------------------------------------------------
// Linear-time discrete Legendre transform helpers (exposed for tests and the
// 2D factorized pass).
// ---------------------------------------------------------------------------

/// max_i { y·xs[i] − fs[i] } for each y in ygrid, O(n + m) after the hull.
/// Samples with non-finite fs are skipped; ties go to the lowest node index.
std::vector<double> llt_1d(const std::vector<double>& xs,
                           const std::vector<double>& fs,
                           const std::vector<double>& ygrid);

/// [min, max] attained slope of the finite samples, 10%-padded; degenerate
/// ranges are widened to ±0.1·(1+|s|).
std::pair<double, double> llt_slope_extent(const std::vector<double>& xs,
                                           const std::vector<double>& fs);

}  // namespace fitzflow
