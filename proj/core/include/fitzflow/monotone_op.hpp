#pragma once

#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "fitzflow/convex_fn.hpp"

namespace fitzflow {

struct Box {
  Vec lo, hi;
  int dim() const { return (int)lo.size(); }
  static Box symmetric(double r, int dim) {
    return {Vec::Constant(dim, -r), Vec::Constant(dim, r)};
  }
};

/// Finite sample of an operator graph; monotonicity is re-verified whenever a
/// sample is produced by graph_sample.
struct GraphSample {
  std::vector<std::pair<Vec, Vec>> pairs;  // (v, v*)

  /// Worst pairwise monotonicity product (≥ −tol for a monotone relation).
  /// Checks all pairs up to `cap` comparisons, then a deterministic subsample.
  double worst_monotonicity(long cap = 2'000'000) const;
};

/// Scalar time modulation c(t) > 0: affine a + b·t, or piecewise constant.
struct TimeCoef {
  double a = 1.0, b = 0.0;
  std::vector<double> breaks;  // piecewise-constant when non-empty
  std::vector<double> values;  // values.size() == breaks.size() + 1
  double operator()(double t) const;
};

class MonotoneOp;
using MonotoneOpPtr = std::shared_ptr<const MonotoneOp>;

struct LinearSPDOp {
  Mat A;
};
struct SubdiffOp {
  ConvexFn phi;
};
struct Sign1DOp {};
struct GraphOp {
  GraphSample graph;
};
struct OnlyAtZeroOp {};
struct PLap1DOp {
  double p;  // p ≥ 2
  int n;     // interior nodes
};
struct ScaledOp {
  MonotoneOpPtr base;
  double c;  // c > 0
};
struct ShiftedOp {
  MonotoneOpPtr base;
  Vec v0, w0;  // v ↦ w0 + base(v − v0)
};
struct TimeDepOp {
  MonotoneOpPtr base;
  TimeCoef coef;  // v ↦ c(t)·base(v)
};

using MonotoneRepr =
    std::variant<LinearSPDOp, SubdiffOp, Sign1DOp, GraphOp, OnlyAtZeroOp,
                 PLap1DOp, ScaledOp, ShiftedOp, TimeDepOp>;

/// Growth/coercivity constants recorded on graph samples:
/// ‖v*‖ ≤ C3‖v‖ + C4 and ⟨v*, v⟩ ≥ C1‖v‖² − C2.
struct OperatorWitness {
  double C1, C2, C3, C4;
};

/// Multi-valued monotone operator R^d ⇉ R^d.
class MonotoneOp {
 public:
  MonotoneOp(int dim, MonotoneRepr repr);

  int dim() const { return dim_; }
  const MonotoneRepr& repr() const { return repr_; }

  /// Catalog entries are maximal by construction; GraphOp and OnlyAtZero are
  /// the representable-but-not-maximal members.
  bool maximal() const;

  bool time_dependent() const;
  bool single_valued() const;

  /// Finite sample of α(v): singleton for single-valued entries, endpoint +
  /// center selections at multi-valued points, possibly empty (OnlyAtZero).
  std::vector<Vec> apply(const Vec& v,
                         std::optional<double> t = std::nullopt) const;

  /// A single selection (the mid sample); throws if α(v) is empty.
  Vec apply_mid(const Vec& v, std::optional<double> t = std::nullopt) const;

  /// Unique x with x + τ·α(x) ∋ rhs. Closed forms where available, safeguarded
  /// Newton/bisection otherwise; residual ≤ 1e−10·(1+‖rhs‖).
  Vec resolvent(double tau, const Vec& rhs,
                std::optional<double> t = std::nullopt) const;

  /// All (v, v*) pairs with v on the box lattice (density nodes per axis).
  /// Monotonicity of the output is re-verified.
  GraphSample graph_sample(const Box& box, int density,
                           std::optional<double> t = std::nullopt) const;

  /// Constants fitted on a graph sample of the given box.
  OperatorWitness witness(const Box& box, int density = 21) const;

  // ------ catalog constructors ------
  static MonotoneOp identity(int dim = 1);
  static MonotoneOp linear_spd(const Mat& A);
  static MonotoneOp linear_scalar(double lambda, int dim = 1);  // λI
  static MonotoneOp subdiff(const ConvexFn& phi);
  static MonotoneOp sign1d();
  static MonotoneOp graph_op(GraphSample g);
  static MonotoneOp only_at_zero(int dim = 1);
  static MonotoneOp plaplacian_1d(double p, int n);
  static MonotoneOp scaled(const MonotoneOp& base, double c);
  static MonotoneOp shifted(const MonotoneOp& base, const Vec& v0,
                            const Vec& w0);
  static MonotoneOp time_dependent(const MonotoneOp& base, TimeCoef coef);

 private:
  int dim_;
  MonotoneRepr repr_;
};

/// Discrete 1D p-Laplacian matrix for p = 2 (the second-difference matrix the
/// PLap1D entry must reproduce exactly).
Mat second_difference_matrix(int n);

}  // namespace fitzflow
