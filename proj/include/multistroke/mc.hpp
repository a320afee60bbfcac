#pragma once

// Chunked Monte Carlo driver. Draws are split into fixed-size chunks, each
// with its own RNG stream derived from (seed, chunk index); chunk results are
// merged in index order. The estimate is therefore a function of the seed
// alone, never of the thread count.

#include <cmath>
#include <cstdint>
#include <vector>

#include "multistroke/rng.hpp"

namespace ms {

inline constexpr std::uint64_t kMcChunk = 1024;

/// Running mean/variance (Chan et al. pairwise merge).
struct Moments {
  std::uint64_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) noexcept {
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }
  void merge(const Moments& o) noexcept {
    if (o.n == 0) return;
    if (n == 0) {
      *this = o;
      return;
    }
    const double total = static_cast<double>(n + o.n);
    const double d = o.mean - mean;
    mean += d * static_cast<double>(o.n) / total;
    m2 += o.m2 + d * d * static_cast<double>(n) * static_cast<double>(o.n) / total;
    n += o.n;
  }
  double variance() const noexcept { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
  double std_error() const noexcept {
    return n > 1 ? std::sqrt(variance() / static_cast<double>(n)) : 0.0;
  }
};

/// `draw(rng, acc)` performs one sample and folds it into `acc`.
/// `Acc` must be copyable from `init` and provide `merge(const Acc&)`.
template <typename Acc, typename Draw>
Acc monte_carlo(std::uint64_t samples, std::uint64_t seed, const Acc& init, Draw draw,
                bool parallel = true) {
  const std::uint64_t nchunks = (samples + kMcChunk - 1) / kMcChunk;
  std::vector<Acc> partial(nchunks, init);
  const long long nc = static_cast<long long>(nchunks);
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (long long c = 0; c < nc; ++c) {
    const std::uint64_t cu = static_cast<std::uint64_t>(c);
    Rng rng(derive_seed(seed, cu));
    const std::uint64_t lo = cu * kMcChunk;
    const std::uint64_t hi = lo + kMcChunk < samples ? lo + kMcChunk : samples;
    Acc& acc = partial[cu];
    for (std::uint64_t i = lo; i < hi; ++i) draw(rng, acc);
  }
  Acc out = init;
  for (const Acc& p : partial) out.merge(p);
  return out;
}

}  // namespace ms
