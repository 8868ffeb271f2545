#include "fitzflow/trajectory.hpp"

#include <cmath>
#include <stdexcept>

namespace fitzflow {

Trajectory::Trajectory(TimeGrid g, std::vector<Vec> vals)
    : grid(g), values(std::move(vals)) {
  if ((int)values.size() != grid.N + 1)
    throw std::invalid_argument("Trajectory: need N+1 nodal values");
  int d = (int)values.front().size();
  for (const auto& v : values) {
    if ((int)v.size() != d)
      throw std::invalid_argument("Trajectory: non-uniform dimension");
    if (!v.allFinite())
      throw std::invalid_argument("Trajectory: non-finite nodal value");
  }
}

Trajectory Trajectory::constant(const TimeGrid& g, const Vec& v) {
  return Trajectory(g, std::vector<Vec>(g.N + 1, v));
}

Trajectory Trajectory::sample(const TimeGrid& g,
                              const std::function<Vec(double)>& f) {
  std::vector<Vec> vals(g.N + 1);
  for (int k = 0; k <= g.N; ++k) vals[k] = f(g.node(k));
  return Trajectory(g, std::move(vals));
}

Trajectory Trajectory::sample1(const TimeGrid& g,
                               const std::function<double(double)>& f) {
  return sample(g, [&](double t) {
    Vec v(1);
    v[0] = f(t);
    return v;
  });
}

double Trajectory::rel_l2_distance(const Trajectory& a, const Trajectory& b) {
  if (!(a.grid == b.grid))
    throw std::invalid_argument("rel_l2_distance: grid mismatch");
  double num = 0.0, den = 0.0, tau = a.grid.tau();
  for (int k = 0; k <= a.grid.N; ++k) {
    double w = (k == 0 || k == a.grid.N) ? 0.5 * tau : tau;
    num += w * (a.values[k] - b.values[k]).squaredNorm();
    den += w * b.values[k].squaredNorm();
  }
  return std::sqrt(num) / (1.0 + std::sqrt(den));
}

double Trajectory::uniform_distance(const Trajectory& a, const Trajectory& b) {
  double worst = 0.0;
  for (int k = 0; k <= a.grid.N; ++k)
    worst = std::max(worst,
                     (a.values[k] - b.values[k]).lpNorm<Eigen::Infinity>());
  return worst;
}

double trapezoid_norm_sq(const Trajectory& v) {
  return trapezoid_of(v, [](const Vec& x) { return x.squaredNorm(); });
}

double trapezoid_of(const Trajectory& v,
                    const std::function<double(const Vec&)>& f) {
  double acc = 0.0, tau = v.grid.tau();
  for (int k = 0; k <= v.grid.N; ++k) {
    double w = (k == 0 || k == v.grid.N) ? 0.5 * tau : tau;
    acc += w * f(v.values[k]);
  }
  return acc;
}

double weighted_pairing(const Trajectory& v) {
  return 0.5 * trapezoid_norm_sq(v) -
         0.5 * v.grid.T * v.values.front().squaredNorm();
}

double weighted_pairing_exact(const Trajectory& v) {
  // per interval: ⟨D_t v, v(t)⟩ = ⟨d, v_k⟩ + (t − t_k)‖d‖², integrate
  // against (T − t) exactly
  double acc = 0.0;
  const double tau = v.grid.tau(), T = v.grid.T;
  for (int k = 0; k < v.grid.N; ++k) {
    Vec d = v.diff(k);
    double a = d.dot(v.values[k]);
    double b = d.squaredNorm();
    double tk = v.grid.node(k);
    // ∫₀^τ (T − tk − s)(a + s·b) ds
    double w0 = T - tk;
    acc += a * (w0 * tau - 0.5 * tau * tau) +
           b * (0.5 * w0 * tau * tau - tau * tau * tau / 3.0);
  }
  return acc;
}

}  // namespace fitzflow
