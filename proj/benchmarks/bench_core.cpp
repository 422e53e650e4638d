#include <cmath>
#include <complex>

#include <benchmark/benchmark.h>

#include "nodalab/elliptic.hpp"
#include "nodalab/growth.hpp"
#include "nodalab/jacobi.hpp"
#include "nodalab/nodal.hpp"

using namespace nodalab;

namespace {

ScalarField real_power(const Grid& g, int k) {
  return ScalarField::sample(g, [k](const Point2& p) {
    return std::pow(std::complex<double>(p.x(), p.y()), k).real();
  });
}

void BM_JacobiEigen(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = std::cos(0.37 * (i + 1) * (j + 1)) + (i == j ? n : 0);
  a = (a + a.transpose()).eval();
  for (auto _ : state) benchmark::DoNotOptimize(jacobi_eigen(a));
  state.SetComplexityN(n);
}
BENCHMARK(BM_JacobiEigen)->RangeMultiplier(2)->Range(32, 256)->Unit(benchmark::kMillisecond)->Complexity();

void BM_DtnMatrix(benchmark::State& state) {
  const int nr = static_cast<int>(state.range(0));
  const Grid d = Grid::disk(1.0, nr, 2 * nr);
  for (auto _ : state) benchmark::DoNotOptimize(dtn_matrix(d));
}
BENCHMARK(BM_DtnMatrix)->RangeMultiplier(2)->Range(16, 128)->Unit(benchmark::kMillisecond);

void BM_SolveDirichlet(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Grid g = Grid::rectangle(-1, 1, -1, 1, n, n);
  const auto op = assemble(CoefficientSet::laplace(g));
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_dirichlet(op, [](const Point2& p) { return p.x() * p.y(); }));
  }
}
BENCHMARK(BM_SolveDirichlet)->RangeMultiplier(2)->Range(64, 256)->Unit(benchmark::kMillisecond);

void BM_MarchingSquares(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto u = real_power(Grid::rectangle(-1, 1, -1, 1, n, n), 12);
  for (auto _ : state) benchmark::DoNotOptimize(extract_nodal_set(u));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(n) * n);
}
BENCHMARK(BM_MarchingSquares)->RangeMultiplier(2)->Range(128, 1024)->Unit(benchmark::kMillisecond);

void BM_MarchingPolar(benchmark::State& state) {
  const int nr = static_cast<int>(state.range(0));
  const auto pair = disk_analytic_eigenpair(Grid::disk(1.0, nr, 2 * nr), 16, Parity::Even);
  for (auto _ : state) benchmark::DoNotOptimize(extract_nodal_set(pair.interior));
}
BENCHMARK(BM_MarchingPolar)->RangeMultiplier(2)->Range(64, 256)->Unit(benchmark::kMillisecond);

void BM_DoublingIndex(benchmark::State& state) {
  const auto u = real_power(Grid::rectangle(-1, 1, -1, 1, 512, 512), 6);
  const double r = 0.05 * static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(doubling_index(u, Point2(0.1, -0.05), r));
}
BENCHMARK(BM_DoublingIndex)->DenseRange(1, 8, 3)->Unit(benchmark::kMicrosecond);

void BM_UniformDoublingIndex(benchmark::State& state) {
  const auto u = real_power(Grid::rectangle(-2, 2, -2, 2, 512, 512), 12);
  const CubeLattice lattice{static_cast<int>(state.range(0)), 12, state.range(1) != 0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(uniform_doubling_index(u, Cube<2>{Point2(0.3, 0.2), 2.0 / 9}, lattice));
  }
}
BENCHMARK(BM_UniformDoublingIndex)->Args({5, 0})->Args({9, 0})->Args({9, 1})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
