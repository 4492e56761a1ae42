// Parallel kernels against their serial references.

#include <benchmark/benchmark.h>

#include <random>

#include "tea/imageops.hpp"
#include "tea/metrics.hpp"
#include "tea/reference.hpp"

namespace {

tea::ScalarMap random_map(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  tea::ScalarMap m(n, n);
  for (double& v : m.data()) v = u(rng);
  return m;
}

tea::Image random_image(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> data(3 * n * n);
  for (double& v : data) v = u(rng);
  return tea::Image({3, n, n}, std::move(data));
}

void BM_Sobel(benchmark::State& st) {
  const auto m = random_map(st.range(0), 1);
  for (auto _ : st) benchmark::DoNotOptimize(tea::sobel(m, tea::Axis::kHorizontal));
}
void BM_SobelReference(benchmark::State& st) {
  const auto m = random_map(st.range(0), 1);
  for (auto _ : st) benchmark::DoNotOptimize(tea::reference::sobel(m, tea::Axis::kHorizontal));
}

void BM_Blur(benchmark::State& st) {
  const auto m = random_map(st.range(0), 2);
  for (auto _ : st) benchmark::DoNotOptimize(tea::gaussian_blur(m, 5));
}
void BM_BlurReference(benchmark::State& st) {
  const auto m = random_map(st.range(0), 2);
  for (auto _ : st) benchmark::DoNotOptimize(tea::reference::gaussian_blur(m, 5));
}

void BM_AvgPool(benchmark::State& st) {
  const auto m = random_map(st.range(0), 3);
  for (auto _ : st) benchmark::DoNotOptimize(tea::avg_pool(m, 8, 8));
}
void BM_AvgPoolReference(benchmark::State& st) {
  const auto m = random_map(st.range(0), 3);
  for (auto _ : st) benchmark::DoNotOptimize(tea::reference::avg_pool(m, 8, 8));
}

void BM_L2(benchmark::State& st) {
  const auto a = random_image(st.range(0), 4);
  const auto b = random_image(st.range(0), 5);
  for (auto _ : st) benchmark::DoNotOptimize(tea::l2_distance(a, b));
}
void BM_L2Reference(benchmark::State& st) {
  const auto a = random_image(st.range(0), 4);
  const auto b = random_image(st.range(0), 5);
  for (auto _ : st) benchmark::DoNotOptimize(tea::reference::l2_distance(a.data(), b.data()));
}

void BM_Ssim(benchmark::State& st) {
  const auto a = random_image(st.range(0), 6);
  const auto b = random_image(st.range(0), 7);
  for (auto _ : st) benchmark::DoNotOptimize(tea::ssim(a, b));
}
void BM_SsimReference(benchmark::State& st) {
  const auto a = random_image(st.range(0), 6);
  const auto b = random_image(st.range(0), 7);
  for (auto _ : st) benchmark::DoNotOptimize(tea::reference::ssim(a, b));
}

}  // namespace

BENCHMARK(BM_Sobel)->Arg(64)->Arg(224);
BENCHMARK(BM_SobelReference)->Arg(64)->Arg(224);
BENCHMARK(BM_Blur)->Arg(64)->Arg(224);
BENCHMARK(BM_BlurReference)->Arg(64)->Arg(224);
BENCHMARK(BM_AvgPool)->Arg(64)->Arg(224);
BENCHMARK(BM_AvgPoolReference)->Arg(64)->Arg(224);
BENCHMARK(BM_L2)->Arg(64)->Arg(224);
BENCHMARK(BM_L2Reference)->Arg(64)->Arg(224);
BENCHMARK(BM_Ssim)->Arg(64)->Arg(224);
BENCHMARK(BM_SsimReference)->Arg(64)->Arg(224);

BENCHMARK_MAIN();
