#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fitzflow/flow.hpp"

using namespace fitzflow;

namespace {

Vec v1(double x) {
  Vec v(1);
  v[0] = x;
  return v;
}

Trajectory zero_source(const TimeGrid& g, int dim = 1) {
  return Trajectory::constant(g, Vec::Zero(dim));
}

}  // namespace

TEST_CASE("reference solver: linear flow matches the exponential") {
  TimeGrid g(1.0, 4096);
  auto prob = FlowProblem::mm(MonotoneOp::identity(1), zero_source(g), v1(1.0));
  FlowSolution sol = solve_reference(prob);
  auto exact = Trajectory::sample1(g, [](double t) { return std::exp(-t); });
  CHECK(Trajectory::uniform_distance(sol.u, exact) <= 2.0 * g.tau());
}

TEST_CASE("reference solver: first-order accuracy under halving") {
  auto err = [](int n) {
    TimeGrid g(1.0, n);
    auto prob =
        FlowProblem::mm(MonotoneOp::linear_scalar(2.0), zero_source(g), v1(1.0));
    auto exact =
        Trajectory::sample1(g, [](double t) { return std::exp(-2.0 * t); });
    return Trajectory::uniform_distance(solve_reference(prob).u, exact);
  };
  CHECK(err(128) / err(256) == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("reference solver: Duhamel formula with a source term") {
  TimeGrid g(1.0, 4096);
  auto h = Trajectory::sample1(g, [](double t) { return std::sin(t); });
  auto prob = FlowProblem::mm(MonotoneOp::identity(1), h, v1(1.0));
  FlowSolution sol = solve_reference(prob);
  auto exact = Trajectory::sample1(g, [](double t) {
    return std::exp(-t) + 0.5 * (std::sin(t) - std::cos(t) + std::exp(-t));
  });
  CHECK(Trajectory::uniform_distance(sol.u, exact) <= 2.0 * g.tau());
}

TEST_CASE("reference solver: sign flow hits zero in finite time") {
  TimeGrid g(1.5, 96);
  auto prob = FlowProblem::mm(MonotoneOp::sign1d(), zero_source(g), v1(1.0));
  FlowSolution sol = solve_reference(prob);
  auto exact =
      Trajectory::sample1(g, [](double t) { return std::max(1.0 - t, 0.0); });
  CHECK(Trajectory::uniform_distance(sol.u, exact) <= 2.0 * g.tau());
  CHECK(std::abs(sol.u.values.back()[0]) <= 1e-12);
}

TEST_CASE("BEN functional: nonnegative, zero only near the flow") {
  TimeGrid g(1.0, 64);
  auto prob = FlowProblem::mm(MonotoneOp::identity(1), zero_source(g), v1(1.0));
  RepFn rep = RepFn::fitz_identity(1);
  FlowSolution ref = solve_reference(prob);
  BenValue at_ref = ben_functional(prob, rep, ref.u, prob.source);
  CHECK(at_ref.total.value() >= 0.0);
  CHECK(at_ref.total.value() <= 1e-3);  // O(tau^2) discretization residual
  for (double gap : at_ref.per_interval) CHECK(gap >= -1e-12);

  Trajectory off = Trajectory::sample1(g, [](double t) { return 1.0 - t; });
  CHECK(ben_functional(prob, rep, off, prob.source).total.value() > 1e-2);

  Trajectory wrong_init = Trajectory::constant(g, v1(0.5));
  CHECK(ben_functional(prob, rep, wrong_init, prob.source).total.is_inf());
}

TEST_CASE("BEN pairing decomposition telescopes to the boundary terms") {
  TimeGrid g(1.0, 32);
  auto h = Trajectory::sample1(g, [](double t) { return 0.3 * t; });
  auto prob = FlowProblem::mm(MonotoneOp::identity(1), h, v1(1.0));
  RepFn rep = RepFn::fitz_identity(1);
  Trajectory v = Trajectory::sample1(g, [](double t) { return std::exp(-t); });
  BenValue bv = ben_functional(prob, rep, v, h);
  // sum tau<vstar_bar - d, vbar> = sum tau<vstar_bar, vbar> - (1/2|v_N|^2 - 1/2|v_0|^2)
  double pairing_vstar = 0.0;
  for (int k = 0; k < g.N; ++k)
    pairing_vstar += g.tau() * h.mid(k).dot(v.mid(k));
  double boundary = 0.5 * v.values.back().squaredNorm() -
                    0.5 * v.values.front().squaredNorm();
  CHECK(bv.pairing_part ==
        doctest::Approx(pairing_vstar - boundary).epsilon(1e-12));
}

TEST_CASE("weighted BEN functional uses the exact mu weights") {
  TimeGrid g(1.0, 32);
  auto prob = FlowProblem::mm(MonotoneOp::identity(1), zero_source(g), v1(1.0));
  RepFn rep = RepFn::fitz_identity(1);
  Trajectory v = Trajectory::sample1(g, [](double t) { return std::exp(-t); });
  BenValue w = ben_weighted_functional(prob, rep, v, prob.source);
  double direct = 0.0;
  for (int k = 0; k < g.N; ++k) {
    Vec vb = v.mid(k), b = -v.diff(k);
    direct += g.mu_weight(k) * (rep.eval(vb, b).value() - b.dot(vb));
  }
  CHECK(w.total.value() == doctest::Approx(direct).epsilon(1e-13));
  CHECK(w.total.value() >= 0.0);
}

TEST_CASE("null-min recovers the smooth flow") {
  TimeGrid g(1.0, 64);
  auto prob = FlowProblem::mm(MonotoneOp::identity(1), zero_source(g), v1(1.0));
  NullMinResult nm = solve_null_min(prob, RepFn::fitz_identity(1));
  CHECK(nm.converged);
  CHECK(nm.value <= 1e-4);
  FlowSolution ref = solve_reference(prob);
  CHECK(Trajectory::rel_l2_distance(nm.u, ref.u) <= 5e-3);
}

TEST_CASE("null-min with a source and a non-unit operator") {
  TimeGrid g(1.0, 64);
  auto h = Trajectory::sample1(g, [](double t) { return std::cos(2.0 * t); });
  auto prob = FlowProblem::mm(MonotoneOp::linear_scalar(2.0), h, v1(0.5));
  RepFn rep = RepFn::fenchel_of(ConvexFn::quadratic(1.0));  // phi' = 2x
  NullMinResult nm = solve_null_min(prob, rep);
  CHECK(nm.converged);
  FlowSolution ref = solve_reference(prob);
  CHECK(Trajectory::rel_l2_distance(nm.u, ref.u) <= 1e-2);
}

TEST_CASE("DNE1 with quadratic potential reduces to the monotone flow") {
  TimeGrid g(1.0, 128);
  auto id = MonotoneOp::identity(1);
  auto prob = FlowProblem::dne1(id, ConvexFn::half_norm_sq(1), zero_source(g),
                                v1(1.0));
  FlowSolution dne = solve_reference(prob);
  FlowSolution mm =
      solve_reference(FlowProblem::mm(id, zero_source(g), v1(1.0)));
  CHECK(Trajectory::uniform_distance(dne.u, mm.u) <= 1e-8);
  REQUIRE(dne.aux.has_value());
  CHECK(Trajectory::uniform_distance(*dne.aux, dne.u) <= 1e-8);  // w = u
}

TEST_CASE("DNE2 with quadratic potential matches the linear closed form") {
  TimeGrid g(1.0, 128);
  double c = 1.5;  // gamma = (c/2)x^2, alpha = identity: u' + c u = 0 scaled
  auto prob = FlowProblem::dne2(MonotoneOp::identity(1),
                                ConvexFn::quadratic(0.5 * c), zero_source(g),
                                v1(1.0));
  FlowSolution sol = solve_reference(prob);
  // d + c(u_k + tau d) = 0 per step: the implicit Euler chain for u' + cu = 0
  double q = 1.0 / (1.0 + c * g.tau());
  double expect = 1.0;
  double worst = 0.0;
  for (int k = 1; k <= g.N; ++k) {
    expect *= q;
    worst = std::max(worst, std::abs(sol.u.values[k][0] - expect));
  }
  CHECK(worst <= 1e-10);
}

TEST_CASE("DNE1 with a non-quadratic potential closes its inclusion") {
  TimeGrid g(1.0, 64);
  auto prob = FlowProblem::dne1(MonotoneOp::identity(1),
                                ConvexFn::abs_power(4.0), zero_source(g),
                                v1(1.0));
  FlowSolution sol = solve_reference(prob);
  double worst = 0.0;
  for (int k = 0; k < g.N; ++k) {
    double u1 = sol.u.values[k + 1][0];
    double w1 = sol.aux->values[k + 1][0], w0 = sol.aux->values[k][0];
    worst = std::max(worst, std::abs((w1 - w0) / g.tau() + u1));
    worst = std::max(worst, std::abs(w1 - u1 * u1 * u1));  // w = phi'(u)
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("DNE2 with a nonlinear rate operator closes its inclusion") {
  TimeGrid g(1.0, 64);
  auto prob = FlowProblem::dne2(MonotoneOp::subdiff(ConvexFn::abs_power(3.0)),
                                ConvexFn::half_norm_sq(1), zero_source(g),
                                v1(1.0));
  FlowSolution sol = solve_reference(prob);
  double worst = 0.0;
  for (int k = 0; k < g.N; ++k) {
    double d = sol.u.diff(k)[0], u1 = sol.u.values[k + 1][0];
    worst = std::max(worst, std::abs(d * std::abs(d) + u1));
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("DNE functionals: nonnegative blocks, infinity off the datum") {
  TimeGrid g(1.0, 32);
  auto prob = FlowProblem::dne1(MonotoneOp::identity(1),
                                ConvexFn::half_norm_sq(1), zero_source(g),
                                v1(1.0));
  RepFn rep = RepFn::fitz_identity(1);
  FlowSolution ref = solve_reference(prob);
  BenValue at_ref = dne1_functional(prob, rep, ref.u, *ref.aux, prob.source);
  CHECK(at_ref.total.value() >= 0.0);
  CHECK(at_ref.total.value() <= 1e-3);
  Trajectory wrong = Trajectory::constant(g, v1(0.2));
  CHECK(dne1_functional(prob, rep, ref.u, wrong, prob.source).total.is_inf());
}

TEST_CASE("DNE null-min values decay under N-doubling") {
  std::vector<double> vals1, vals2;
  for (int n : {16, 32, 64, 128}) {
    TimeGrid g(1.0, n);
    auto p1 = FlowProblem::dne1(MonotoneOp::identity(1),
                                ConvexFn::half_norm_sq(1), zero_source(g),
                                v1(1.0));
    auto r1 = solve_reference(p1);
    vals1.push_back(
        dne1_functional(p1, RepFn::fitz_identity(1), r1.u, *r1.aux, p1.source)
            .total.value());
    auto p2 = FlowProblem::dne2(MonotoneOp::identity(1),
                                ConvexFn::quadratic(0.5), zero_source(g),
                                v1(1.0));
    auto r2 = solve_reference(p2);
    vals2.push_back(
        dne2_functional(p2, RepFn::fitz_identity(1), r2.u, *r2.aux, p2.source)
            .total.value());
  }
  for (size_t i = 1; i < vals1.size(); ++i) {
    CHECK(vals1[i] <= 1.1 * vals1[i - 1]);
    CHECK(vals2[i] <= 1.1 * vals2[i - 1]);
  }
  CHECK(vals1.back() <= vals1.front());
  CHECK(vals2.back() <= vals2.front());
}

TEST_CASE("nonsmooth null-min: sign flow stays within 2 tau") {
  TimeGrid g(1.5, 64);
  auto sg = MonotoneOp::sign1d();
  auto prob = FlowProblem::mm(sg, zero_source(g), v1(1.0));
  RepFn rep = RepFn::fitzpatrick_of(sg.graph_sample(Box::symmetric(1.5, 1), 61));
  OptimizerConfig cfg;
  cfg.tol_abs = 1e-4;
  NullMinResult nm = solve_null_min(prob, rep, cfg);
  auto exact =
      Trajectory::sample1(g, [](double t) { return std::max(1.0 - t, 0.0); });
  CHECK(Trajectory::uniform_distance(nm.u, exact) <= 2.0 * g.tau());
}

TEST_CASE("time-dependent operator flow") {
  TimeGrid g(1.0, 4096);
  TimeCoef c;
  c.a = 1.0;
  c.b = 1.0;  // u' + (1+t)u = 0 -> exp(-t - t^2/2)
  auto op = MonotoneOp::time_dependent(MonotoneOp::identity(1), c);
  auto prob = FlowProblem::mm(op, zero_source(g), v1(1.0));
  FlowSolution sol = solve_reference(prob);
  auto exact = Trajectory::sample1(
      g, [](double t) { return std::exp(-t - 0.5 * t * t); });
  CHECK(Trajectory::uniform_distance(sol.u, exact) <= 3.0 * g.tau());
}

TEST_CASE("problem validation") {
  TimeGrid g(1.0, 8);
  CHECK_THROWS_AS(
      FlowProblem::mm(MonotoneOp::identity(2), zero_source(g, 1), v1(1.0)),
      std::invalid_argument);
  auto graph_only = MonotoneOp::graph_op([] {
    GraphSample s;
    s.pairs = {{v1(0.0), v1(0.0)}};
    return s;
  }());
  auto prob = FlowProblem::mm(MonotoneOp::only_at_zero(1), zero_source(g),
                              v1(1.0));
  CHECK_THROWS_AS(solve_reference(prob), std::invalid_argument);
  (void)graph_only;
}
