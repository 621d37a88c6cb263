#include <benchmark/benchmark.h>

#include "gscatter/asymptotics.hpp"
#include "gscatter/diagnostics.hpp"
#include "gscatter/estimator.hpp"
#include "gscatter/mfunc.hpp"

namespace {

using namespace gscatter;

EmpiricalMeasure sample(Eigen::Index m, Eigen::Index r, std::size_t n) {
  Rng rng = make_stream(7, static_cast<std::uint64_t>(m * 100 + r));
  return sample_empirical(random_scatter(m, rng), r, n, rng);
}

void BM_FixedPoint(benchmark::State& state) {
  const auto m = static_cast<Eigen::Index>(state.range(0));
  const auto n = static_cast<std::size_t>(state.range(1));
  const auto meas = sample(m, m / 2, n);
  for (auto _ : state) benchmark::DoNotOptimize(fixed_point_solve(meas).residual);
}
BENCHMARK(BM_FixedPoint)->Args({3, 100})->Args({3, 1600})->Args({6, 400})->Unit(benchmark::kMillisecond);

void BM_Descent(benchmark::State& state) {
  const auto meas = sample(3, 2, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(riemannian_descent(meas).residual);
}
BENCHMARK(BM_Descent)->Arg(100)->Arg(1600)->Unit(benchmark::kMillisecond);

void BM_MMatrix(benchmark::State& state) {
  const auto m = static_cast<Eigen::Index>(state.range(0));
  const auto meas = sample(m, m / 2, 1000);
  Rng rng = make_stream(8, 0);
  const auto sigma = random_scatter(m, rng);
  for (auto _ : state) benchmark::DoNotOptimize(m_matrix(meas, sigma).value.data());
}
BENCHMARK(BM_MMatrix)->Arg(3)->Arg(6)->Arg(10);

void BM_Sigma2(benchmark::State& state) {
  const Measure meas = GaussianMeasure{ScatterMatrix::identity(2), 1};
  const auto draws = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    Rng rng = make_stream(9, 0);
    benchmark::DoNotOptimize(covariance_operators(meas, ScatterMatrix::identity(2), MonteCarlo{draws, &rng}).sigma2.data());
  }
}
BENCHMARK(BM_Sigma2)->Arg(10000)->Arg(200000)->Unit(benchmark::kMillisecond);

void BM_ClassifyExistence(benchmark::State& state) {
  const auto meas = sample(3, 2, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(classify_existence(meas).verdict);
}
BENCHMARK(BM_ClassifyExistence)->Arg(6)->Arg(20)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
