// Serial reference vs OpenMP kernels at corpus resolution (256 x 96).
// Run with OMP_NUM_THREADS set to compare thread counts.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "svs/kernels/kernels.hpp"

namespace k = svs::kernels;

namespace {

constexpr int kH = 96, kW = 256;

std::vector<float> random_buffer(std::size_t n, unsigned seed, float lo = 0.0f, float hi = 1.0f) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<float> dist(lo, hi);
  std::vector<float> v(n);
  for (auto& x : v) x = dist(gen);
  return v;
}

template <bool Parallel>
void BM_WarpRows(benchmark::State& state) {
  const auto L = k::Layout::interleaved(kH, kW, 3);
  const auto src = random_buffer(L.count(), 1);
  const auto flow = random_buffer(std::size_t(kH) * kW, 2, -8.0f, 8.0f);
  std::vector<float> out(L.count());
  for (auto _ : state) {
    if constexpr (Parallel)
      k::warp_rows<float>(src, L, flow, out);
    else
      k::serial::warp_rows<float>(src, L, flow, out);
    benchmark::DoNotOptimize(out.data());
  }
}

template <bool Parallel>
void BM_Conv2dForward(benchmark::State& state) {
  const k::ConvShape s{16, 16, kH, kW, 3};
  const auto in = random_buffer(std::size_t(s.cin) * kH * kW, 3);
  const auto w = random_buffer(std::size_t(s.cout) * s.cin * 9, 4, -0.1f, 0.1f);
  const auto b = random_buffer(s.cout, 5);
  std::vector<float> out(std::size_t(s.cout) * kH * kW);
  for (auto _ : state) {
    if constexpr (Parallel)
      k::conv2d_forward<float>(in, w, b, s, out);
    else
      k::serial::conv2d_forward<float>(in, w, b, s, out);
    benchmark::DoNotOptimize(out.data());
  }
}

template <bool Parallel>
void BM_Conv2dBackwardWeight(benchmark::State& state) {
  const k::ConvShape s{16, 16, kH, kW, 3};
  const auto in = random_buffer(std::size_t(s.cin) * kH * kW, 6);
  const auto g = random_buffer(std::size_t(s.cout) * kH * kW, 7, -1.0f, 1.0f);
  std::vector<float> gw(std::size_t(s.cout) * s.cin * 9), gb(s.cout);
  for (auto _ : state) {
    if constexpr (Parallel)
      k::conv2d_backward_weight<float>(g, in, s, gw, gb);
    else
      k::serial::conv2d_backward_weight<float>(g, in, s, gw, gb);
    benchmark::DoNotOptimize(gw.data());
  }
}

template <bool Parallel>
void BM_MatchingCost(benchmark::State& state) {
  const auto L = k::Layout::interleaved(kH, kW, 3);
  const auto a = random_buffer(L.count(), 8), b = random_buffer(L.count(), 9);
  std::vector<float> cost(std::size_t(kH) * kW);
  for (auto _ : state) {
    if constexpr (Parallel)
      k::matching_cost<float>(a, b, L, 1, cost);
    else
      k::serial::matching_cost<float>(a, b, L, 1, cost);
    benchmark::DoNotOptimize(cost.data());
  }
}

template <bool Parallel>
void BM_CompositeOver(benchmark::State& state) {
  const int planes = 32;
  const auto L = k::Layout::interleaved(kH, kW, 3);
  const auto colors = random_buffer(L.count() * planes, 10);
  const auto alphas = random_buffer(std::size_t(kH) * kW * planes, 11);
  std::vector<float> out(L.count());
  for (auto _ : state) {
    if constexpr (Parallel)
      k::composite_over<float>(colors, alphas, planes, L, out);
    else
      k::serial::composite_over<float>(colors, alphas, planes, L, out);
    benchmark::DoNotOptimize(out.data());
  }
}

template <bool Parallel>
void BM_WarpHomography(benchmark::State& state) {
  const auto L = k::Layout::planar(4, kH, kW);
  const auto src = random_buffer(L.count(), 12);
  const std::array<double, 9> H{1.02, 0.01, -3.0, 0.0, 0.99, 1.5, 1e-5, 0.0, 1.0};
  std::vector<float> out(L.count());
  for (auto _ : state) {
    bool ok;
    if constexpr (Parallel)
      ok = k::warp_homography<float>(src, L, H, out);
    else
      ok = k::serial::warp_homography<float>(src, L, H, out);
    benchmark::DoNotOptimize(ok);
    benchmark::DoNotOptimize(out.data());
  }
}

}  // namespace

BENCHMARK(BM_WarpRows<false>)->Name("warp_rows/serial");
BENCHMARK(BM_WarpRows<true>)->Name("warp_rows/openmp")->UseRealTime();
BENCHMARK(BM_Conv2dForward<false>)->Name("conv2d_forward/serial");
BENCHMARK(BM_Conv2dForward<true>)->Name("conv2d_forward/openmp")->UseRealTime();
BENCHMARK(BM_Conv2dBackwardWeight<false>)->Name("conv2d_backward_weight/serial");
BENCHMARK(BM_Conv2dBackwardWeight<true>)->Name("conv2d_backward_weight/openmp")->UseRealTime();
BENCHMARK(BM_MatchingCost<false>)->Name("matching_cost/serial");
BENCHMARK(BM_MatchingCost<true>)->Name("matching_cost/openmp")->UseRealTime();
BENCHMARK(BM_CompositeOver<false>)->Name("composite_over/serial");
BENCHMARK(BM_CompositeOver<true>)->Name("composite_over/openmp")->UseRealTime();
BENCHMARK(BM_WarpHomography<false>)->Name("warp_homography/serial");
BENCHMARK(BM_WarpHomography<true>)->Name("warp_homography/openmp")->UseRealTime();

BENCHMARK_MAIN();
