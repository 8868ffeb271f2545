#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fitzflow/trajectory.hpp"

using namespace fitzflow;

namespace {

double richardson(const std::function<double(int)>& value_at, int n) {
  // second-order refinement: eliminate the c*tau^2 term under grid halving
  return (4.0 * value_at(2 * n) - value_at(n)) / 3.0;
}

}  // namespace

TEST_CASE("time grid basics and mu weights") {
  TimeGrid g(2.0, 8);
  CHECK(g.tau() == doctest::Approx(0.25));
  CHECK(g.node(3) == doctest::Approx(0.75));
  CHECK(g.mid(3) == doctest::Approx(0.875));
  double total = 0.0;
  for (int k = 0; k < g.N; ++k) {
    CHECK(g.mu_weight(k) > 0.0);
    total += g.mu_weight(k);
  }
  // integral of (T - t) over [0, T]
  CHECK(total == doctest::Approx(g.T * g.T / 2.0));
}

TEST_CASE("weighted pairing closed forms with Richardson refinement") {
  // v constant: pairing 0; v(t) = t: 1/6; v(t) = 1 - t: -1/3 (T = 1)
  auto val_const = [](int n) {
    return weighted_pairing(
        Trajectory::sample1(TimeGrid(1.0, n), [](double) { return 1.0; }));
  };
  auto val_t = [](int n) {
    return weighted_pairing(
        Trajectory::sample1(TimeGrid(1.0, n), [](double t) { return t; }));
  };
  auto val_1mt = [](int n) {
    return weighted_pairing(Trajectory::sample1(
        TimeGrid(1.0, n), [](double t) { return 1.0 - t; }));
  };
  CHECK(std::abs(richardson(val_const, 64) - 0.0) <= 1e-10);
  CHECK(std::abs(richardson(val_t, 64) - 1.0 / 6.0) <= 1e-10);
  CHECK(std::abs(richardson(val_1mt, 64) + 1.0 / 3.0) <= 1e-10);
}

TEST_CASE("the two pairing routes agree to second order") {
  auto diff_at = [](int n) {
    Trajectory v = Trajectory::sample1(
        TimeGrid(1.0, n), [](double t) { return std::exp(-t) + 0.3 * t * t; });
    return std::abs(weighted_pairing(v) - weighted_pairing_exact(v));
  };
  double order_worst = std::numeric_limits<double>::infinity();
  for (int n : {32, 64, 128}) {
    double order = std::log2(diff_at(n) / diff_at(2 * n));
    order_worst = std::min(order_worst, order);
  }
  CHECK(order_worst >= 1.9);
}

TEST_CASE("exact-weight pairing identity: Abel summation closed form") {
  // sum of mu_k <D_t v, vbar_k> equals the boundary-identity route exactly
  TimeGrid g(1.5, 37);
  Trajectory v = Trajectory::sample1(
      g, [](double t) { return std::sin(3.0 * t) - 0.4 * t; });
  double direct = 0.0;
  for (int k = 0; k < g.N; ++k)
    direct += g.mu_weight(k) * v.diff(k).dot(v.mid(k));
  CHECK(direct == doctest::Approx(weighted_pairing(v)).epsilon(1e-13));
}

TEST_CASE("unweighted pairing telescopes exactly") {
  TimeGrid g(1.0, 53);
  Trajectory v =
      Trajectory::sample1(g, [](double t) { return std::cos(2.0 * t); });
  double direct = 0.0;
  for (int k = 0; k < g.N; ++k)
    direct += g.tau() * v.diff(k).dot(v.mid(k));
  double boundary = 0.5 * v.values.back().squaredNorm() -
                    0.5 * v.values.front().squaredNorm();
  CHECK(direct == doctest::Approx(boundary).epsilon(1e-13));
}

TEST_CASE("distances") {
  TimeGrid g(1.0, 16);
  Trajectory a = Trajectory::sample1(g, [](double t) { return t; });
  Trajectory b = Trajectory::sample1(g, [](double t) { return t + 0.1; });
  CHECK(Trajectory::uniform_distance(a, b) == doctest::Approx(0.1));
  CHECK(Trajectory::rel_l2_distance(a, a) == 0.0);
  CHECK(Trajectory::rel_l2_distance(a, b) > 0.0);
}

TEST_CASE("trapezoid quadrature on a quadratic is tau^2-accurate") {
  auto err = [](int n) {
    Trajectory v =
        Trajectory::sample1(TimeGrid(1.0, n), [](double t) { return t; });
    return std::abs(trapezoid_norm_sq(v) - 1.0 / 3.0);
  };
  CHECK(err(32) / err(64) == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("trajectory validation") {
  TimeGrid g(1.0, 4);
  CHECK_THROWS_AS(Trajectory(g, std::vector<Vec>(3, Vec::Zero(1))),
                  std::invalid_argument);
  CHECK_THROWS_AS(TimeGrid(0.0, 4), std::invalid_argument);
  CHECK_THROWS_AS(TimeGrid(1.0, 1), std::invalid_argument);
}
