#pragma once

#include <optional>

#include "fitzflow/rep_fn.hpp"
#include "fitzflow/trajectory.hpp"

namespace fitzflow {

enum class FlowKind { MM, DNE1, DNE2 };

/// Cauchy problem for one of the three flow families:
///   MM:   D_t u + α(u) ∋ h,          u(0) = u⁰
///   DNE1: D_t w + α(u) ∋ h, w ∈ ∂γ(u), w(0) = w⁰
///   DNE2: α(D_t u) + z ∋ h, z ∈ ∂γ(u), u(0) = u⁰
struct FlowProblem {
  FlowKind kind;
  MonotoneOp op;
  std::optional<ConvexFn> gamma;       // DNE kinds only
  std::optional<ConvexFn> gamma_star;  // cached conjugate
  Trajectory source;                   // h at grid nodes
  Vec init;                            // u⁰ (MM, DNE2) or w⁰ (DNE1)
  TimeGrid grid;

  static FlowProblem mm(const MonotoneOp& op, Trajectory h, const Vec& u0);
  static FlowProblem dne1(const MonotoneOp& op, const ConvexFn& gamma,
                          Trajectory h, const Vec& w0);
  static FlowProblem dne2(const MonotoneOp& op, const ConvexFn& gamma,
                          Trajectory h, const Vec& u0);
};

/// Value of a BEN-type functional with its per-interval breakdown; the
/// breakdown certifies the equivalence "value ≈ 0 ⟺ every interval gap ≈ 0".
struct BenValue {
  ExtReal total;
  std::vector<double> per_interval;  // weighted nonnegative gaps
  double representative_part = 0.0;
  double pairing_part = 0.0;

  double max_interval_gap() const {
    double m = 0.0;
    for (double g : per_interval) m = std::max(m, g);
    return m;
  }
};

/// Discrete extended BEN functional (plain dt weights):
/// Σ_k τ·[φ(v̄_k, v*̄_k − D_t v|_k) − ⟨v*̄_k − D_t v|_k, v̄_k⟩], which equals
/// Σ_k τ·[φ − ⟨v*̄, v̄⟩] + ½‖v_N‖² − ½‖u⁰‖² by exact telescoping.
/// Returns +∞ when v(0) ≠ u⁰.
BenValue ben_functional(const FlowProblem& problem, const RepFn& rep,
                        const Trajectory& v, const Trajectory& vstar);

/// Time-integrated variant with the exact per-interval μ-weights.
BenValue ben_weighted_functional(const FlowProblem& problem, const RepFn& rep,
                                 const Trajectory& v, const Trajectory& vstar);

/// Doubly-nonlinear functional, type I (variables u and w, w(0) pinned):
/// μ-weighted Fenchel block [γ(u)+γ*(w)−(w,u)] plus the positive part of the
/// μ-weighted Fitzpatrick block in (u, u* − D_t w).
BenValue dne1_functional(const FlowProblem& problem, const RepFn& rep,
                         const Trajectory& u, const Trajectory& w,
                         const Trajectory& ustar);

/// Doubly-nonlinear functional, type II (variables u and z, u(0) pinned):
/// Fenchel block [γ(u)+γ*(z)−⟨z,u⟩] plus the positive part of the Fitzpatrick
/// block in (D_t u, u* − z).
BenValue dne2_functional(const FlowProblem& problem, const RepFn& rep,
                         const Trajectory& u, const Trajectory& z,
                         const Trajectory& ustar);

struct FlowSolution {
  Trajectory u;
  std::optional<Trajectory> aux;  // w (DNE1) or z (DNE2)
};

/// Resolvent-based reference solver: implicit Euler for MM, per-step strongly
/// monotone solves for the DNE kinds. Per-step residual ≤ 1e−10.
FlowSolution solve_reference(const FlowProblem& problem);

struct OptimizerConfig {
  double tol_abs = 1e-5;
  double tol_rel = 1e-8;
  int patience = 50;
  int max_iters = 200000;
};

struct NullMinResult {
  Trajectory u;
  std::optional<Trajectory> aux;
  double value;
  int iters;
  bool converged;  // false = stagnation above tolerance (reported, not fatal)
};

/// Minimizes the relevant discrete functional over trajectories with the
/// pinned initial node. Accelerated gradient with backtracking for smooth
/// representatives, Polyak subgradient steps (minimum value 0 known) for
/// polyhedral ones. Initial iterate: constant-init trajectory.
NullMinResult solve_null_min(const FlowProblem& problem, const RepFn& rep,
                             const OptimizerConfig& cfg = {});

}  // namespace fitzflow
