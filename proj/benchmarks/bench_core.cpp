#include <benchmark/benchmark.h>

#include <random>

#include "fitzflow/flow.hpp"

using namespace fitzflow;

namespace {

Vec v1(double x) {
  Vec v(1);
  v[0] = x;
  return v;
}

std::vector<double> quadratic_samples(int m, double b, double R) {
  std::vector<double> vals(m);
  for (int i = 0; i < m; ++i) {
    double x = -R + 2.0 * R * i / (m - 1);
    vals[i] = b * x * x;
  }
  return vals;
}

void BM_discrete_legendre_transform(benchmark::State& state) {
  const int m = (int)state.range(0);
  std::vector<double> xs(m), ys(m);
  for (int i = 0; i < m; ++i) {
    xs[i] = -3.0 + 6.0 * i / (m - 1);
    ys[i] = xs[i];
  }
  std::vector<double> fs = quadratic_samples(m, 0.7, 3.0);
  for (auto _ : state) benchmark::DoNotOptimize(llt_1d(xs, fs, ys));
  state.SetComplexityN(m);
}
BENCHMARK(BM_discrete_legendre_transform)->Range(256, 16384)->Complexity();

void BM_grid_conjugate(benchmark::State& state) {
  const int m = (int)state.range(0);
  ConvexFn g = ConvexFn::grid_1d(-3.0, 3.0, quadratic_samples(m, 0.7, 3.0));
  for (auto _ : state) benchmark::DoNotOptimize(g.conjugate());
}
BENCHMARK(BM_grid_conjugate)->Range(256, 16384);

void BM_fitzpatrick_eval(benchmark::State& state) {
  auto graph =
      MonotoneOp::sign1d().graph_sample(Box::symmetric(2.0, 1), (int)state.range(0));
  RepFn f = RepFn::fitzpatrick_of(graph);
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (auto _ : state)
    benchmark::DoNotOptimize(f.eval(v1(u(rng)), v1(u(rng))));
}
BENCHMARK(BM_fitzpatrick_eval)->Range(64, 4096);

void BM_resolvent_plap3(benchmark::State& state) {
  const int n = (int)state.range(0);
  auto op = MonotoneOp::plaplacian_1d(3.0, n);
  Vec rhs = Vec::LinSpaced(n, -1.0, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(op.resolvent(0.01, rhs));
}
BENCHMARK(BM_resolvent_plap3)->Range(4, 32);

void BM_ben_functional(benchmark::State& state) {
  const int N = (int)state.range(0);
  TimeGrid grid(1.0, N);
  auto problem = FlowProblem::mm(MonotoneOp::identity(1),
                                 Trajectory::constant(grid, Vec::Zero(1)),
                                 v1(1.0));
  RepFn rep = RepFn::fitz_identity(1);
  Trajectory v =
      Trajectory::sample1(grid, [](double t) { return std::exp(-t); });
  Trajectory vs = Trajectory::sample1(grid, [](double t) { return -std::exp(-t); });
  for (auto _ : state)
    benchmark::DoNotOptimize(ben_weighted_functional(problem, rep, v, vs));
  state.SetComplexityN(N);
}
BENCHMARK(BM_ben_functional)->Range(64, 4096)->Complexity();

void BM_reference_solver(benchmark::State& state) {
  const int N = (int)state.range(0);
  TimeGrid grid(1.0, N);
  auto problem = FlowProblem::mm(MonotoneOp::sign1d(),
                                 Trajectory::constant(grid, Vec::Zero(1)),
                                 v1(1.0));
  for (auto _ : state) benchmark::DoNotOptimize(solve_reference(problem));
}
BENCHMARK(BM_reference_solver)->Range(64, 4096);

}  // namespace

BENCHMARK_MAIN();
