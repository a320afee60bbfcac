#pragma once

// Data-parallel inner loops. Every kernel has a serial reference in
// ms::kernels::serial with the same signature; the default versions use
// OpenMP when the problem is large enough to pay for the fork.
//
// Reductions are computed over fixed-size chunks whose partial sums are
// combined in chunk order, so the parallel result does not depend on the
// thread count. The serial reference sums strictly left to right.

#include <cstddef>
#include <span>

namespace ms::kernels {

inline constexpr std::size_t kReduceChunk = 4096;

/// out[c, i, j] = mean of the k x k block containing (i, j). Sizes are not
/// validated here; callers check divisibility.
void block_average(std::span<const double> in, std::span<double> out, std::size_t channels,
                   std::size_t height, std::size_t width, std::size_t k);

/// out = (1 - w) * in + w * block_average(in).
void stroke_mix(std::span<const double> in, std::span<double> out, std::size_t channels,
                std::size_t height, std::size_t width, std::size_t k, double w);

double dot(std::span<const double> a, std::span<const double> b);
double squared_norm(std::span<const double> a);

/// y = W x + b for a row-major (rows x cols) matrix W.
void affine(std::span<const double> weights, std::span<const double> bias,
            std::span<const double> x, std::span<double> y, std::size_t rows, std::size_t cols);

/// x_grad += W^T y_grad ; W_grad += y_grad x^T ; b_grad += y_grad.
void affine_backward(std::span<const double> weights, std::span<const double> x,
                     std::span<const double> y_grad, std::span<double> x_grad,
                     std::span<double> w_grad, std::span<double> b_grad, std::size_t rows,
                     std::size_t cols);

/// Direct 2-D DFT of a real height x width grid into (re, im) outputs.
void dft2(std::span<const double> in, std::span<double> re, std::span<double> im,
          std::size_t height, std::size_t width);

namespace serial {
void block_average(std::span<const double> in, std::span<double> out, std::size_t channels,
                   std::size_t height, std::size_t width, std::size_t k);
void stroke_mix(std::span<const double> in, std::span<double> out, std::size_t channels,
                std::size_t height, std::size_t width, std::size_t k, double w);
double dot(std::span<const double> a, std::span<const double> b);
double squared_norm(std::span<const double> a);
void affine(std::span<const double> weights, std::span<const double> bias,
            std::span<const double> x, std::span<double> y, std::size_t rows, std::size_t cols);
void affine_backward(std::span<const double> weights, std::span<const double> x,
                     std::span<const double> y_grad, std::span<double> x_grad,
                     std::span<double> w_grad, std::span<double> b_grad, std::size_t rows,
                     std::size_t cols);
void dft2(std::span<const double> in, std::span<double> re, std::span<double> im,
          std::size_t height, std::size_t width);
}  // namespace serial

/// Number of OpenMP threads available (1 when built without OpenMP).
int max_threads();

}  // namespace ms::kernels
