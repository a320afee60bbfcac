// Serial reference vs OpenMP kernels on desk-scale and larger inputs.

#include <benchmark/benchmark.h>

#include <vector>

#include "multistroke/kernels.hpp"
#include "multistroke/rng.hpp"

namespace {

std::vector<double> noise(std::size_t n, std::uint64_t seed) {
  ms::Rng rng(seed);
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal();
  return v;
}

template <bool Parallel>
void BM_StrokeMix(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  const auto in = noise(3 * side * side, 1);
  std::vector<double> out(in.size());
  for (auto _ : state) {
    if constexpr (Parallel) ms::kernels::stroke_mix(in, out, 3, side, side, 2, 0.5);
    else ms::kernels::serial::stroke_mix(in, out, 3, side, side, 2, 0.5);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetBytesProcessed(static_cast<int64_t>(state.iterations() * in.size() * sizeof(double)));
}

template <bool Parallel>
void BM_SquaredNorm(benchmark::State& state) {
  const auto in = noise(static_cast<std::size_t>(state.range(0)), 2);
  for (auto _ : state) {
    double v = Parallel ? ms::kernels::squared_norm(in) : ms::kernels::serial::squared_norm(in);
    benchmark::DoNotOptimize(v);
  }
}

template <bool Parallel>
void BM_Affine(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto w = noise(n * n, 3), x = noise(n, 4), b = noise(n, 5);
  std::vector<double> y(n);
  for (auto _ : state) {
    if constexpr (Parallel) ms::kernels::affine(w, b, x, y, n, n);
    else ms::kernels::serial::affine(w, b, x, y, n, n);
    benchmark::DoNotOptimize(y.data());
  }
}

template <bool Parallel>
void BM_Dft2(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  const auto in = noise(side * side, 6);
  std::vector<double> re(in.size()), im(in.size());
  for (auto _ : state) {
    if constexpr (Parallel) ms::kernels::dft2(in, re, im, side, side);
    else ms::kernels::serial::dft2(in, re, im, side, side);
    benchmark::DoNotOptimize(re.data());
  }
}

}  // namespace

BENCHMARK(BM_StrokeMix<false>)->Arg(16)->Arg(128)->Arg(512);
BENCHMARK(BM_StrokeMix<true>)->Arg(16)->Arg(128)->Arg(512);
BENCHMARK(BM_SquaredNorm<false>)->Arg(1 << 10)->Arg(1 << 20);
BENCHMARK(BM_SquaredNorm<true>)->Arg(1 << 10)->Arg(1 << 20);
BENCHMARK(BM_Affine<false>)->Arg(256)->Arg(1024);
BENCHMARK(BM_Affine<true>)->Arg(256)->Arg(1024);
BENCHMARK(BM_Dft2<false>)->Arg(16)->Arg(32);
BENCHMARK(BM_Dft2<true>)->Arg(16)->Arg(32);

BENCHMARK_MAIN();
