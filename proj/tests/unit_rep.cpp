#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "fitzflow/rep_fn.hpp"

using namespace fitzflow;

namespace {

Vec v1(double x) {
  Vec v(1);
  v[0] = x;
  return v;
}

Vec random_vec(int dim, double r, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-r, r);
  Vec x(dim);
  for (int i = 0; i < dim; ++i) x[i] = u(rng);
  return x;
}

// direct maximum over the stored graph pairs
double brute_fitz(const GraphSample& g, double v, double vs) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& [v0, w0] : g.pairs)
    best = std::max(best, vs * v0[0] - w0[0] * (v0[0] - v));
  return best;
}

}  // namespace

TEST_CASE("Fitzpatrick of a sampled graph equals the direct maximum") {
  auto op = MonotoneOp::sign1d();
  GraphSample g = op.graph_sample(Box::symmetric(2.0, 1), 61);
  RepFn f = RepFn::fitzpatrick_of(g);
  std::mt19937 rng(3);
  for (int t = 0; t < 300; ++t) {
    Vec v = random_vec(1, 1.5, rng), vs = random_vec(1, 1.5, rng);
    CHECK(f.eval(v, vs).value() ==
          doctest::Approx(brute_fitz(g, v[0], vs[0])).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("closed-form Fitzpatrick of the identity") {
  RepFn f = RepFn::fitz_identity(1);
  std::mt19937 rng(13);
  for (int t = 0; t < 200; ++t) {
    Vec v = random_vec(1, 2.0, rng), vs = random_vec(1, 2.0, rng);
    CHECK(f.eval(v, vs).value() ==
          doctest::Approx(0.25 * (v[0] + vs[0]) * (v[0] + vs[0])));
    // domination and equality exactly on the diagonal
    CHECK(f.null_gap(v, vs).value() >= -1e-15);
    CHECK(f.null_gap(v, v).value() <= 1e-15);
  }
  // sampled Fitzpatrick converges to it from below on the sampled range
  auto g = MonotoneOp::identity(1).graph_sample(Box::symmetric(3.0, 1), 241);
  RepFn fg = RepFn::fitzpatrick_of(g);
  for (int t = 0; t < 100; ++t) {
    Vec v = random_vec(1, 1.5, rng), vs = random_vec(1, 1.5, rng);
    double exact = 0.25 * (v[0] + vs[0]) * (v[0] + vs[0]);
    double approx = fg.eval(v, vs).value();
    CHECK(approx <= exact + 1e-12);
    CHECK(approx >= exact - 2e-4);  // one-cell quadratic loss
  }
}

TEST_CASE("Fb facts: b = 1/2 represents the identity, b != 1/2 does not") {
  Box box = Box::symmetric(1.5, 1);
  auto id = MonotoneOp::identity(1);
  auto ok = represents_check(RepFn::fb(0.5), id, box, 41);
  CHECK(ok.ok());
  CHECK(ok.equality_fraction == doctest::Approx(1.0));

  // b = 1: dominates but equality only at the origin
  auto r1 = represents_check(RepFn::fb(1.0), id, box, 41);
  CHECK(r1.domination_ok);
  CHECK(!r1.equality_ok);

  // b = 1/4: domination fails (1/4 * 2 < 1 at (1,1))
  RepFn quarter = RepFn::fb(0.25);
  CHECK(quarter.eval(v1(1.0), v1(1.0)).value() == doctest::Approx(0.5));
  auto r2 = represents_check(quarter, id, box, 41);
  CHECK(!r2.domination_ok);
}

TEST_CASE("Fenchel representative: membership and equality set") {
  std::vector<ConvexFn> phis = {ConvexFn::half_norm_sq(1),
                                ConvexFn::abs_power(3.0),
                                ConvexFn::quadratic(0.8)};
  std::mt19937 rng(23);
  for (const auto& phi : phis) {
    RepFn rep = RepFn::fenchel_of(phi);
    auto [min_gap, convexity] =
        rep.membership_diagnostics(Box::symmetric(1.5, 1), 2000, 5);
    CHECK(min_gap >= -1e-10);
    CHECK(convexity <= 1e-10);
    for (int t = 0; t < 100; ++t) {
      Vec v = random_vec(1, 1.2, rng);
      CHECK(rep.null_gap(v, phi.subgradient(v)).value() <= 1e-9);
    }
    auto report =
        represents_check(rep, MonotoneOp::subdiff(phi), Box::symmetric(1.5, 1), 41);
    CHECK(report.ok());
  }
}

TEST_CASE("representation band for subdifferential catalog entries") {
  std::vector<ConvexFn> phis = {
      ConvexFn::half_norm_sq(1), ConvexFn::abs_power(3.0),
      ConvexFn::piecewise_quad_1d(
          {-1.0, 1.0},
          {{{1.0, 0.0, 1.0}}, {{0.0, -2.0, 0.0}}, {{0.5, -2.0, -0.5}}})};
  for (const auto& phi : phis) {
    auto op = MonotoneOp::subdiff(phi);
    RepFn rep = RepFn::fenchel_of(phi);
    BandReport band = band_check(op, rep, Box::symmetric(1.5, 1), 41);
    CHECK(band.ok);
    CHECK(band.lower_margin >= -band.slack - 1e-6);
    CHECK(band.upper_margin >= -band.slack - 1e-6);
  }
}

TEST_CASE("band ordering is strict for the identity closed forms") {
  // 1/4(v+v*)^2 <= 1/2(v^2+v*^2) holds exactly on dyadic probes
  for (int i = -32; i <= 32; ++i)
    for (int j = -32; j <= 32; ++j) {
      double v = i / 16.0, vs = j / 16.0;
      double fitz = 0.25 * (v + vs) * (v + vs);
      double fench = 0.5 * (v * v + vs * vs);
      CHECK(fitz <= fench);
    }
}

TEST_CASE("inf-convolution with the identity shifts the represented operator") {
  auto ic = inf_convolution(RepFn::fb(0.5), MonotoneOp::identity(1));
  auto two = MonotoneOp::linear_scalar(2.0);
  auto report = represents_check(ic, two, Box::symmetric(1.5, 1), 41);
  CHECK(report.ok());
  CHECK(report.equality_fraction >= 0.99);
  CHECK(report.spurious.empty());
  // the formula itself: g(v, v* - v) + v^2
  std::mt19937 rng(33);
  for (int t = 0; t < 100; ++t) {
    Vec v = random_vec(1, 1.5, rng), vs = random_vec(1, 1.5, rng);
    double direct =
        RepFn::fb(0.5).eval(v, vs - v).value() + v[0] * v[0];
    CHECK(ic.eval(v, vs).value() == doctest::Approx(direct));
  }
}

TEST_CASE("self-dual representatives under the transported conjugate") {
  CHECK(self_dual_check(RepFn::fb(0.5), Box::symmetric(1.0, 1), 21) <= 1e-9);
  CHECK(self_dual_check(RepFn::fenchel_of(ConvexFn::half_norm_sq(1)),
                        Box::symmetric(1.0, 1), 21) <= 1e-9);
}

TEST_CASE("transported conjugate of Fb(b) is Fb(1/(4b)) analytically") {
  RepFn c = conjugate_rep(RepFn::fb(1.0), Box::symmetric(1.0, 1), 11);
  const auto* fb = std::get_if<FbForm>(&c.repr());
  REQUIRE(fb != nullptr);
  CHECK(fb->b == doctest::Approx(0.25));
}

TEST_CASE("linear-operator representative is the band top") {
  Mat A = 2.0 * Mat::Identity(1, 1);
  RepFn top = RepFn::linear_op_rep(A);
  CHECK(top.eval(v1(1.0), v1(2.0)).value() == doctest::Approx(2.0));
  CHECK(top.eval(v1(1.0), v1(1.0)).is_inf());
  auto report = represents_check(top, MonotoneOp::linear_scalar(2.0),
                                 Box::symmetric(1.5, 1), 41);
  CHECK(report.ok());
}

TEST_CASE("subgradients agree with finite differences") {
  std::vector<RepFn> reps = {RepFn::fb(0.7), RepFn::fitz_identity(1),
                             RepFn::fenchel_of(ConvexFn::abs_power(3.0))};
  std::mt19937 rng(43);
  for (const auto& rep : reps) {
    for (int t = 0; t < 40; ++t) {
      Vec v = random_vec(1, 1.0, rng), vs = random_vec(1, 1.0, rng);
      auto [gv, gw] = rep.subgrad(v, vs);
      double e = 1e-6;
      double dv = (rep.eval(v1(v[0] + e), vs).value() -
                   rep.eval(v1(v[0] - e), vs).value()) /
                  (2 * e);
      double dw = (rep.eval(v, v1(vs[0] + e)).value() -
                   rep.eval(v, v1(vs[0] - e)).value()) /
                  (2 * e);
      CHECK(gv[0] == doctest::Approx(dv).epsilon(1e-4).scale(1.0));
      CHECK(gw[0] == doctest::Approx(dw).epsilon(1e-4).scale(1.0));
    }
  }
}

TEST_CASE("represents_check flags spurious equality points") {
  // Fb(1/2) touches pi on the whole diagonal; checked against the operator
  // that only contains (0, 0), the rest of the diagonal is spurious
  auto report = represents_check(RepFn::fb(0.5), MonotoneOp::only_at_zero(1),
                                 Box::symmetric(1.0, 1), 21);
  CHECK(report.domination_ok);
  CHECK(!report.spurious.empty());
  CHECK(!report.ok());
}
