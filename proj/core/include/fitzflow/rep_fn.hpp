#pragma once

#include <memory>
#include <variant>

#include "fitzflow/monotone_op.hpp"

namespace fitzflow {

class RepFn;
using RepFnPtr = std::shared_ptr<const RepFn>;

/// Fitzpatrick function of a (sampled) graph:
/// (v,v*) ↦ max over pairs (v0,v0*) of { v*·v0 − v0*·(v0 − v) }.
struct FitzOfGraph {
  GraphSample graph;
};

/// (v,v*) ↦ φ(v) + φ*(v*); represents ∂φ and is self-dual under the swap.
struct FenchelOfPotential {
  ConvexFn phi;
  ConvexFn phistar;
};

/// (v,v*) ↦ b(‖v‖² + ‖v*‖²). Represents the identity for b = ½ and, for any
/// b, the non-maximal operator α(0) = {0}, α = ∅ elsewhere.
struct FbForm {
  double b;
};

/// (v,v*) ↦ ¼‖v + v*‖² — the Fitzpatrick function of the identity.
struct FitzIdentityForm {};

/// (v,v*) ↦ ⟨Av, v⟩ + indicator{v* = Av} — the top of the representation band
/// for a linear monotone map.
struct LinearOpRep {
  Mat A;
};

/// Partial inf-convolution with a linear operator:
/// (v,v*) ↦ g₁(v, v* − Av) + ⟨Av, v⟩.
struct InfConvRep {
  RepFnPtr g1;
  Mat A;
};

/// Lattice-realized transported conjugate (g* ∘ 𝓘):
/// (v,v*) ↦ max over lattice (v0,v0*) of { v*·v0 + v0*·v − g(v0,v0*) }.
struct DualTransported {
  RepFnPtr g;
  Box box;      // lattice box for both arguments
  int density;  // nodes per axis
};

using RepRepr = std::variant<FitzOfGraph, FenchelOfPotential, FbForm,
                             FitzIdentityForm, LinearOpRep, InfConvRep,
                             DualTransported>;

/// Bivariate function on R^d × R^d claimed to lie in F(V): convex, lsc, and
/// dominating the duality pairing π(v,v*) = v·v*.
class RepFn {
 public:
  RepFn(int dim, RepRepr repr);

  int dim() const { return dim_; }
  const RepRepr& repr() const { return repr_; }

  ExtReal eval(const Vec& v, const Vec& vstar) const;
  ExtReal eval1(double v, double vstar) const;

  /// A subgradient selection (∂_v g, ∂_{v*} g) at a point of finiteness.
  std::pair<Vec, Vec> subgrad(const Vec& v, const Vec& vstar) const;

  bool smooth() const;

  /// g(v,v*) − π(v,v*); ≥ 0 up to round-off, ≈ 0 iff v* ∈ α(v).
  ExtReal null_gap(const Vec& v, const Vec& vstar) const;

  /// Worst membership-in-F(V) diagnostics on random probes in box × box:
  /// {min of g − π, worst midpoint-convexity deficit}.
  std::pair<double, double> membership_diagnostics(const Box& box,
                                                   int nprobes,
                                                   unsigned seed) const;

  // ------ constructors ------
  static RepFn fitzpatrick_of(GraphSample graph);
  static RepFn fenchel_of(const ConvexFn& phi);
  static RepFn fb(double b, int dim = 1);
  static RepFn fitz_identity(int dim = 1);
  static RepFn linear_op_rep(const Mat& A);

 private:
  int dim_;
  RepRepr repr_;
};

struct RepresentationReport {
  double min_margin;        // min over probes of g − π (≥ −tol when ok)
  double equality_fraction; // fraction of graph samples with |g − π| ≤ tol
  double worst_graph_gap;   // max |g − π| over graph samples
  std::vector<std::pair<Vec, Vec>> spurious;  // off-graph probes with g ≈ π
  bool domination_ok;
  bool equality_ok;
  bool ok() const { return domination_ok && equality_ok && spurious.empty(); }
};

struct BandReport {
  bool ok;
  double lower_margin;  // min of g − f_α over probes (≥ −tol − slack)
  double upper_margin;  // min of f_α*∘𝓘 − g over probes
  double slack;         // sampling slack applied
};

/// Verifies g ≥ π on a probe lattice, equality (within 1e−6) at all graph
/// samples of op, and flags equality points not near the graph.
RepresentationReport represents_check(const RepFn& g, const MonotoneOp& op,
                                      const Box& box, int density);

/// Transported bivariate conjugate g*∘𝓘 — analytic where the form admits it,
/// otherwise a direct lattice sup over box × box (O(density^2d) per eval).
RepFn conjugate_rep(const RepFn& g, const Box& box, int density);

/// Theorem band f_α ≤ g ≤ f_α*∘𝓘 on probes, with graph-sampling slack.
BandReport band_check(const MonotoneOp& op, const RepFn& g, const Box& box,
                      int density);

/// Closed-form partial inf-convolution with a linear single-valued operator.
RepFn inf_convolution(const RepFn& g1, const MonotoneOp& alpha2);

/// max over probe pairs of |(g*∘𝓘)(v,v*) − g(v,v*)| (0 for self-dual g).
double self_dual_check(const RepFn& g, const Box& box, int density);

}  // namespace fitzflow
