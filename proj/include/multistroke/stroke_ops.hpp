#pragma once

// The stroke operator S_k (k x k block-average pooling followed by
// nearest-neighbour upsampling), its coarse/detail projectors, the mixing map
// A = (1 - w) I + w S_k and the roughness schedule that picks w per timestep.
//
// S_k is the orthogonal projector onto block-constant signals, so
//   Q_c = S_k,  Q_d = I - S_k,  A = Q_c + (1 - w) Q_d,  A^T A = Q_c + (1 - w)^2 Q_d.

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "multistroke/tensor.hpp"

namespace ms {

/// Raised when an image axis is not divisible by the stroke block size.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class StrokeOperator {
 public:
  explicit StrokeOperator(std::size_t k);

  std::size_t k() const noexcept { return k_; }

  /// Throws DimensionError naming the axis that k does not divide.
  void check(const Shape& shape) const;
  bool divides(const Shape& shape) const noexcept;

  /// Dimension of range(S_k) and ker(S_k) for a given shape.
  std::size_t coarse_dim(const Shape& shape) const;
  std::size_t detail_dim(const Shape& shape) const;

 private:
  std::size_t k_;
};

class RoughnessSchedule {
 public:
  RoughnessSchedule(std::size_t total_steps, double rough_fraction, double w_max);

  std::size_t total_steps() const noexcept { return total_; }
  double rough_fraction() const noexcept { return rough_fraction_; }
  double w_max() const noexcept { return w_max_; }
  /// Last timestep with w = 0; floor((1 - f_rough) T).
  std::size_t cut() const noexcept { return cut_; }

  /// w_t for t in [0, T]; w_0 = 0.
  double weight(std::size_t t) const;
  const std::vector<double>& weights() const noexcept { return weights_; }

 private:
  std::size_t total_;
  double rough_fraction_;
  double w_max_;
  std::size_t cut_;
  std::vector<double> weights_;  // index 0..T
};

ImageTensor apply_stroke(const ImageTensor& x, const StrokeOperator& op);
inline ImageTensor coarse_project(const ImageTensor& x, const StrokeOperator& op) {
  return apply_stroke(x, op);
}
ImageTensor detail_project(const ImageTensor& x, const StrokeOperator& op);

/// (1 - w) x + w S_k x, w in [0, 1).
ImageTensor mix(const ImageTensor& x, double w, const StrokeOperator& op);
/// Inverse of mix: Q_c x + Q_d x / (1 - w).
ImageTensor mix_inverse(const ImageTensor& x, double w, const StrokeOperator& op);

double roughness_weight(std::size_t t, const RoughnessSchedule& sched);

/// |sin(k w / 2) / (k sin(w / 2))|, with the limit value 1 where sin(w/2) ~ 0.
double attenuation_gamma(double omega, std::size_t k);

/// Energy retained by A for a mode with coarse retention ratio rho.
double mode_energy_ratio(double rho, double w);

/// ||Q_c x||^2 + k^{2s} ||Q_d x||^2.
double multires_complexity(const ImageTensor& x, const StrokeOperator& op, double s);

}  // namespace ms
