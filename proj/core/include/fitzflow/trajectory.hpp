#pragma once

#include <functional>
#include <vector>

#include "fitzflow/convex_fn.hpp"

namespace fitzflow {

/// Uniform mesh of [0, T] with the weighted-measure rule dμ(t) = (T − t)dt
/// integrated exactly per interval.
struct TimeGrid {
  double T;
  int N;

  TimeGrid(double T_, int N_) : T(T_), N(N_) {
    if (!(T > 0) || N < 2) throw std::invalid_argument("TimeGrid: T > 0, N >= 2");
  }

  double tau() const { return T / N; }
  double node(int k) const { return k * tau(); }
  double mid(int k) const { return (k + 0.5) * tau(); }

  /// ∫_{t_k}^{t_{k+1}} (T − t) dt = τ(T − t_k − τ/2); positive, sums to T²/2.
  double mu_weight(int k) const { return tau() * (T - node(k) - 0.5 * tau()); }

  bool operator==(const TimeGrid& o) const { return T == o.T && N == o.N; }
};

/// Nodal values of a piecewise-linear trajectory on a TimeGrid.
struct Trajectory {
  TimeGrid grid;
  std::vector<Vec> values;  // N + 1 nodes

  Trajectory(TimeGrid g, std::vector<Vec> vals);

  /// Constant trajectory.
  static Trajectory constant(const TimeGrid& g, const Vec& v);
  /// Sampled from a function of time.
  static Trajectory sample(const TimeGrid& g, const std::function<Vec(double)>& f);
  static Trajectory sample1(const TimeGrid& g, const std::function<double(double)>& f);

  int dim() const { return (int)values.front().size(); }
  Vec mid(int k) const { return 0.5 * (values[k] + values[k + 1]); }
  Vec diff(int k) const { return (values[k + 1] - values[k]) / grid.tau(); }

  /// Relative L² distance ‖a − b‖ / (1 + ‖b‖), trapezoid in time.
  static double rel_l2_distance(const Trajectory& a, const Trajectory& b);
  /// Max nodal sup-norm distance.
  static double uniform_distance(const Trajectory& a, const Trajectory& b);
};

/// Discrete ∫₀ᵀ ⟨D_t v, v⟩ dμ(t) via the boundary identity
/// ½∫₀ᵀ‖v‖²dt − (T/2)‖v(0)‖² with trapezoid quadrature on the first term.
/// Algebraically equal to Σ_k w_k ⟨D_t v|_k, v̄_k⟩ with the exact μ-weights.
double weighted_pairing(const Trajectory& v);

/// Same quantity by exact per-interval quadrature of ⟨D_t v, v⟩(T − t) for the
/// piecewise-linear interpolant; agrees with weighted_pairing to O(τ²).
double weighted_pairing_exact(const Trajectory& v);

/// Trapezoid ∫₀ᵀ ‖v‖² dt.
double trapezoid_norm_sq(const Trajectory& v);

/// Trapezoid ∫₀ᵀ f(v(t)) dt of nodal samples.
double trapezoid_of(const Trajectory& v, const std::function<double(const Vec&)>& f);

}  // namespace fitzflow
