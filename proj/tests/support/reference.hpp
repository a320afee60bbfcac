#pragma once

// Test-side oracles. Everything here is written from the definitions with
// plain loops so it shares no code path with the library kernels.

#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "multistroke/tensor.hpp"

namespace ref {

using ms::ImageTensor;
using ms::Shape;

inline ImageTensor random_tensor(Shape shape, std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  std::normal_distribution<double> nd;
  ImageTensor x(shape);
  for (double& v : x.values()) v = nd(eng);
  return x;
}

/// Block mean by explicit summation over each k x k block.
inline ImageTensor block_average(const ImageTensor& x, std::size_t k) {
  ImageTensor out(x.shape());
  for (std::size_t c = 0; c < x.channels(); ++c)
    for (std::size_t bi = 0; bi < x.height(); bi += k)
      for (std::size_t bj = 0; bj < x.width(); bj += k) {
        long double sum = 0;
        for (std::size_t i = 0; i < k; ++i)
          for (std::size_t j = 0; j < k; ++j) sum += x.at(c, bi + i, bj + j);
        const double mean = static_cast<double>(sum / static_cast<long double>(k * k));
        for (std::size_t i = 0; i < k; ++i)
          for (std::size_t j = 0; j < k; ++j) out.at(c, bi + i, bj + j) = mean;
      }
  return out;
}

inline double inner(const ImageTensor& a, const ImageTensor& b) {
  long double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<long double>(a[i]) * b[i];
  return static_cast<double>(s);
}

inline double norm2(const ImageTensor& a) { return inner(a, a); }

/// (1 - w) x + w * block_average(x).
inline ImageTensor mix(const ImageTensor& x, double w, std::size_t k) {
  const ImageTensor avg = block_average(x, k);
  ImageTensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = (1.0 - w) * x[i] + w * avg[i];
  return out;
}

/// Applies S_k to the complex mode exp(i(w1 r + w2 c)) on an H x W grid and
/// returns ||S u|| / ||u||, treating real and imaginary parts separately.
inline double measured_mode_ratio(double w1, double w2, std::size_t H, std::size_t W, std::size_t k,
                                  double mix_w = 1.0) {
  ImageTensor re({1, H, W}), im({1, H, W});
  for (std::size_t r = 0; r < H; ++r)
    for (std::size_t c = 0; c < W; ++c) {
      const double ph = w1 * static_cast<double>(r) + w2 * static_cast<double>(c);
      re.at(0, r, c) = std::cos(ph);
      im.at(0, r, c) = std::sin(ph);
    }
  const ImageTensor sre = mix(re, mix_w, k), sim = mix(im, mix_w, k);
  return std::sqrt((norm2(sre) + norm2(sim)) / (norm2(re) + norm2(im)));
}

/// Direct O(N^2) complex DFT, X(u, v) = sum x(r, c) exp(-2 pi i (u r / H + v c / W)).
inline std::vector<std::complex<double>> dft2(const std::vector<double>& g, std::size_t H, std::size_t W) {
  std::vector<std::complex<double>> out(H * W);
  for (std::size_t u = 0; u < H; ++u)
    for (std::size_t v = 0; v < W; ++v) {
      std::complex<double> acc{};
      for (std::size_t r = 0; r < H; ++r)
        for (std::size_t c = 0; c < W; ++c) {
          const double ph = -2.0 * std::numbers::pi *
                            (static_cast<double>(u * r) / static_cast<double>(H) +
                             static_cast<double>(v * c) / static_cast<double>(W));
          acc += g[r * W + c] * std::polar(1.0, ph);
        }
      out[u * W + v] = acc;
    }
  return out;
}

/// alpha_bar_t accumulated in log space.
inline double alpha_bar_logsum(std::size_t T, double b1, double bT, std::size_t t) {
  long double acc = 0;
  for (std::size_t s = 1; s <= t; ++s) {
    const double beta = T == 1 ? b1 : b1 + (bT - b1) * static_cast<double>(s - 1) / static_cast<double>(T - 1);
    acc += std::log1p(-static_cast<long double>(beta));
  }
  return static_cast<double>(std::exp(acc));
}

/// Scratch directory removed on destruction. The path itself does not exist
/// until a test creates it, so commands that demand a fresh directory work.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    root_ = std::filesystem::temp_directory_path() /
            ("mstest_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(root_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(root_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return root_; }
  std::filesystem::path operator/(const std::string& rel) const { return root_ / rel; }

 private:
  std::filesystem::path root_;
};

}  // namespace ref
