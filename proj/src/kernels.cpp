#include "multistroke/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ms::kernels {

namespace {

// Below this many output elements the fork/join overhead dominates.
constexpr std::size_t kParallelMin = 1 << 14;

}  // namespace

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void block_average(std::span<const double> in, std::span<double> out, std::size_t channels,
                   std::size_t height, std::size_t width, std::size_t k) {
  const std::size_t bh = height / k;
  const std::size_t bw = width / k;
  const std::size_t blocks = channels * bh * bw;
  const double inv = 1.0 / static_cast<double>(k * k);
  const long long nblocks = static_cast<long long>(blocks);
#pragma omp parallel for schedule(static) if (in.size() >= kParallelMin)
  for (long long b = 0; b < nblocks; ++b) {
    const std::size_t c = static_cast<std::size_t>(b) / (bh * bw);
    const std::size_t p = (static_cast<std::size_t>(b) / bw) % bh;
    const std::size_t q = static_cast<std::size_t>(b) % bw;
    const std::size_t base = c * height * width;
    double sum = 0.0;
    for (std::size_t r = 0; r < k; ++r) {
      const double* row = in.data() + base + (p * k + r) * width + q * k;
      for (std::size_t s = 0; s < k; ++s) sum += row[s];
    }
    const double mean = sum * inv;
    for (std::size_t r = 0; r < k; ++r) {
      double* row = out.data() + base + (p * k + r) * width + q * k;
      for (std::size_t s = 0; s < k; ++s) row[s] = mean;
    }
  }
}

void stroke_mix(std::span<const double> in, std::span<double> out, std::size_t channels,
                std::size_t height, std::size_t width, std::size_t k, double w) {
  const std::size_t bh = height / k;
  const std::size_t bw = width / k;
  const double inv = 1.0 / static_cast<double>(k * k);
  const long long nblocks = static_cast<long long>(channels * bh * bw);
#pragma omp parallel for schedule(static) if (in.size() >= kParallelMin)
  for (long long b = 0; b < nblocks; ++b) {
    const std::size_t c = static_cast<std::size_t>(b) / (bh * bw);
    const std::size_t p = (static_cast<std::size_t>(b) / bw) % bh;
    const std::size_t q = static_cast<std::size_t>(b) % bw;
    const std::size_t base = c * height * width;
    double sum = 0.0;
    for (std::size_t r = 0; r < k; ++r) {
      const double* row = in.data() + base + (p * k + r) * width + q * k;
      for (std::size_t s = 0; s < k; ++s) sum += row[s];
    }
    const double coarse = w * (sum * inv);
    for (std::size_t r = 0; r < k; ++r) {
      const std::size_t off = base + (p * k + r) * width + q * k;
      for (std::size_t s = 0; s < k; ++s) out[off + s] = (1.0 - w) * in[off + s] + coarse;
    }
  }
}

namespace {

template <typename Term>
double chunked_sum(std::size_t n, Term term) {
  const std::size_t nchunks = (n + kReduceChunk - 1) / kReduceChunk;
  if (nchunks <= 1) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += term(i);
    return s;
  }
  std::vector<double> partial(nchunks, 0.0);
  const long long nc = static_cast<long long>(nchunks);
#pragma omp parallel for schedule(static)
  for (long long c = 0; c < nc; ++c) {
    const std::size_t lo = static_cast<std::size_t>(c) * kReduceChunk;
    const std::size_t hi = std::min(n, lo + kReduceChunk);
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += term(i);
    partial[static_cast<std::size_t>(c)] = s;
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

}  // namespace

double dot(std::span<const double> a, std::span<const double> b) {
  return chunked_sum(a.size(), [&](std::size_t i) { return a[i] * b[i]; });
}

double squared_norm(std::span<const double> a) {
  return chunked_sum(a.size(), [&](std::size_t i) { return a[i] * a[i]; });
}

void affine(std::span<const double> weights, std::span<const double> bias,
            std::span<const double> x, std::span<double> y, std::size_t rows, std::size_t cols) {
  const long long nr = static_cast<long long>(rows);
#pragma omp parallel for schedule(static) if (rows * cols >= kParallelMin)
  for (long long r = 0; r < nr; ++r) {
    const double* wr = weights.data() + static_cast<std::size_t>(r) * cols;
    double s = bias[static_cast<std::size_t>(r)];
    for (std::size_t c = 0; c < cols; ++c) s += wr[c] * x[c];
    y[static_cast<std::size_t>(r)] = s;
  }
}

void affine_backward(std::span<const double> weights, std::span<const double> x,
                     std::span<const double> y_grad, std::span<double> x_grad,
                     std::span<double> w_grad, std::span<double> b_grad, std::size_t rows,
                     std::size_t cols) {
  const bool par = rows * cols >= kParallelMin;
  const long long nr = static_cast<long long>(rows);
  const long long nc = static_cast<long long>(cols);
#pragma omp parallel if (par)
  {
#pragma omp for schedule(static)
    for (long long r = 0; r < nr; ++r) {
      const std::size_t ru = static_cast<std::size_t>(r);
      const double g = y_grad[ru];
      b_grad[ru] += g;
      double* wg = w_grad.data() + ru * cols;
      for (std::size_t c = 0; c < cols; ++c) wg[c] += g * x[c];
    }
    if (!x_grad.empty()) {
#pragma omp for schedule(static)
      for (long long c = 0; c < nc; ++c) {
        const std::size_t cu = static_cast<std::size_t>(c);
        double s = 0.0;
        for (std::size_t r = 0; r < rows; ++r) s += weights[r * cols + cu] * y_grad[r];
        x_grad[cu] += s;
      }
    }
  }
}

void dft2(std::span<const double> in, std::span<double> re, std::span<double> im,
          std::size_t height, std::size_t width) {
  const double two_pi = 2.0 * std::numbers::pi;
  std::vector<double> cw(width), sw(width), ch(height), sh(height);
  for (std::size_t n = 0; n < width; ++n) {
    cw[n] = std::cos(two_pi * static_cast<double>(n) / static_cast<double>(width));
    sw[n] = std::sin(two_pi * static_cast<double>(n) / static_cast<double>(width));
  }
  for (std::size_t n = 0; n < height; ++n) {
    ch[n] = std::cos(two_pi * static_cast<double>(n) / static_cast<double>(height));
    sh[n] = std::sin(two_pi * static_cast<double>(n) / static_cast<double>(height));
  }
  // Row transforms: R[i, v] = sum_j x[i, j] e^{-2 pi i v j / W}.
  std::vector<double> rr(height * width), ri(height * width);
  const long long nh = static_cast<long long>(height);
  const long long nw = static_cast<long long>(width);
  const bool par = height * width * (height + width) >= kParallelMin;
#pragma omp parallel for schedule(static) if (par)
  for (long long i = 0; i < nh; ++i) {
    for (std::size_t v = 0; v < width; ++v) {
      double sr = 0.0, si = 0.0;
      for (std::size_t j = 0; j < width; ++j) {
        const std::size_t idx = (v * j) % width;
        const double x = in[static_cast<std::size_t>(i) * width + j];
        sr += x * cw[idx];
        si -= x * sw[idx];
      }
      rr[static_cast<std::size_t>(i) * width + v] = sr;
      ri[static_cast<std::size_t>(i) * width + v] = si;
    }
  }
  // Column transforms.
#pragma omp parallel for schedule(static) if (par)
  for (long long v = 0; v < nw; ++v) {
    const std::size_t vu = static_cast<std::size_t>(v);
    for (std::size_t u = 0; u < height; ++u) {
      double sr = 0.0, si = 0.0;
      for (std::size_t i = 0; i < height; ++i) {
        const std::size_t idx = (u * i) % height;
        const double a = rr[i * width + vu];
        const double b = ri[i * width + vu];
        // (a + ib)(c - is)
        sr += a * ch[idx] + b * sh[idx];
        si += b * ch[idx] - a * sh[idx];
      }
      re[u * width + vu] = sr;
      im[u * width + vu] = si;
    }
  }
}

namespace serial {

void block_average(std::span<const double> in, std::span<double> out, std::size_t channels,
                   std::size_t height, std::size_t width, std::size_t k) {
  const double inv = 1.0 / static_cast<double>(k * k);
  for (std::size_t c = 0; c < channels; ++c) {
    const std::size_t base = c * height * width;
    for (std::size_t p = 0; p < height / k; ++p) {
      for (std::size_t q = 0; q < width / k; ++q) {
        double sum = 0.0;
        for (std::size_t r = 0; r < k; ++r)
          for (std::size_t s = 0; s < k; ++s) sum += in[base + (p * k + r) * width + q * k + s];
        for (std::size_t r = 0; r < k; ++r)
          for (std::size_t s = 0; s < k; ++s)
            out[base + (p * k + r) * width + q * k + s] = sum * inv;
      }
    }
  }
}

void stroke_mix(std::span<const double> in, std::span<double> out, std::size_t channels,
                std::size_t height, std::size_t width, std::size_t k, double w) {
  std::vector<double> coarse(in.size());
  block_average(in, coarse, channels, height, width, k);
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = (1.0 - w) * in[i] + w * coarse[i];
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double squared_norm(std::span<const double> a) { return dot(a, a); }

void affine(std::span<const double> weights, std::span<const double> bias,
            std::span<const double> x, std::span<double> y, std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    double s = bias[r];
    for (std::size_t c = 0; c < cols; ++c) s += weights[r * cols + c] * x[c];
    y[r] = s;
  }
}

void affine_backward(std::span<const double> weights, std::span<const double> x,
                     std::span<const double> y_grad, std::span<double> x_grad,
                     std::span<double> w_grad, std::span<double> b_grad, std::size_t rows,
                     std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    b_grad[r] += y_grad[r];
    for (std::size_t c = 0; c < cols; ++c) w_grad[r * cols + c] += y_grad[r] * x[c];
  }
  if (x_grad.empty()) return;
  for (std::size_t c = 0; c < cols; ++c) {
    double s = 0.0;
    for (std::size_t r = 0; r < rows; ++r) s += weights[r * cols + c] * y_grad[r];
    x_grad[c] += s;
  }
}

// Textbook O((HW)^2) double sum; independent of the separable path above.
void dft2(std::span<const double> in, std::span<double> re, std::span<double> im,
          std::size_t height, std::size_t width) {
  const double two_pi = 2.0 * std::numbers::pi;
  for (std::size_t u = 0; u < height; ++u) {
    for (std::size_t v = 0; v < width; ++v) {
      double sr = 0.0, si = 0.0;
      for (std::size_t i = 0; i < height; ++i) {
        for (std::size_t j = 0; j < width; ++j) {
          const double phase = two_pi * (static_cast<double>(u * i) / static_cast<double>(height) +
                                         static_cast<double>(v * j) / static_cast<double>(width));
          sr += in[i * width + j] * std::cos(phase);
          si -= in[i * width + j] * std::sin(phase);
        }
      }
      re[u * width + v] = sr;
      im[u * width + v] = si;
    }
  }
}

}  // namespace serial

}  // namespace ms::kernels
