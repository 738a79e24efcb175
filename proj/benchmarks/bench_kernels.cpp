#include <random>

#include <benchmark/benchmark.h>

#include "hdmf/assignment.hpp"
#include "hdmf/factorization.hpp"
#include "hdmf/linalg.hpp"
#include "hdmf/regularizers.hpp"
#include "hdmf/synthetic.hpp"

using namespace hdmf;

namespace {

Matrix uniform(Eigen::Index r, Eigen::Index c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
  return m;
}

// T=120 on a 20x20 grid, three subjects for the aggregates.
struct Fixture {
  Matrix X, Vt, U;
  SubjectGraphOperators ops;
  GroupAggregates agg;

  explicit Fixture(Eigen::Index K) {
    const auto g = NeighborGraph::grid4(20, 20);
    X = uniform(120, 400, 1).array() - 0.5;
    Vt = random_init(K, 400, 2);
    U = fit_timecourses(X, Vt);
    ops = build_affinity({"b", X}, g);
    std::vector<Matrix> subjects{Vt, random_init(K, 400, 3), random_init(K, 400, 4)};
    agg = compute_group_aggregates(subjects);
  }
};

void BM_UpdateFinest(benchmark::State& state) {
  Fixture f(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(update_layer_finest(f.Vt, f.U, f.X, &f.ops, f.agg, 50.0, 2.0));
}
BENCHMARK(BM_UpdateFinest)->Arg(10)->Arg(40);

void BM_UpdateDeep(benchmark::State& state) {
  Fixture f(state.range(0));
  const Matrix Vt2 = random_init(state.range(0) / 2, state.range(0), 5);
  const Matrix U2 = fit_timecourses(f.X, Matrix(Vt2 * f.Vt));
  const std::vector<Matrix> subjects{Vt2, random_init(Vt2.rows(), Vt2.cols(), 6)};
  const auto agg = compute_group_aggregates(subjects);
  for (auto _ : state) benchmark::DoNotOptimize(update_layer_deep(Vt2, U2, f.X, f.Vt, agg, 50.0));
}
BENCHMARK(BM_UpdateDeep)->Arg(10)->Arg(40);

void BM_FitTimecourses(benchmark::State& state) {
  Fixture f(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(fit_timecourses(f.X, f.Vt));
}
BENCHMARK(BM_FitTimecourses)->Arg(10)->Arg(40);

void BM_PseudoInverse(benchmark::State& state) {
  const Matrix m = uniform(state.range(0), 400, 7);
  for (auto _ : state) benchmark::DoNotOptimize(pseudo_inverse(m));
}
BENCHMARK(BM_PseudoInverse)->Arg(10)->Arg(40)->Arg(100);

void BM_Affinity(benchmark::State& state) {
  const auto g = NeighborGraph::grid4(20, 20);
  const Matrix X = uniform(120, 400, 8);
  for (auto _ : state) benchmark::DoNotOptimize(build_affinity({"b", X}, g));
}
BENCHMARK(BM_Affinity);

void BM_Hungarian(benchmark::State& state) {
  const Matrix cost = uniform(state.range(0), state.range(0), 9);
  for (auto _ : state) benchmark::DoNotOptimize(solve_assignment(cost));
}
BENCHMARK(BM_Hungarian)->Arg(10)->Arg(50)->Arg(200);

}  // namespace

BENCHMARK_MAIN();
