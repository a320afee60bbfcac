#include "multistroke/stroke_ops.hpp"

#include <cmath>

#include "multistroke/kernels.hpp"

namespace ms {

StrokeOperator::StrokeOperator(std::size_t k) : k_(k) {
  if (k < 1) throw std::invalid_argument("StrokeOperator: block size k must be >= 1");
}

bool StrokeOperator::divides(const Shape& shape) const noexcept {
  return shape.height % k_ == 0 && shape.width % k_ == 0;
}

void StrokeOperator::check(const Shape& shape) const {
  if (shape.height % k_ != 0)
    throw DimensionError("stroke block size " + std::to_string(k_) + " does not divide height " +
                         std::to_string(shape.height));
  if (shape.width % k_ != 0)
    throw DimensionError("stroke block size " + std::to_string(k_) + " does not divide width " +
                         std::to_string(shape.width));
}

std::size_t StrokeOperator::coarse_dim(const Shape& shape) const {
  check(shape);
  return shape.channels * (shape.height / k_) * (shape.width / k_);
}

std::size_t StrokeOperator::detail_dim(const Shape& shape) const {
  return shape.size() - coarse_dim(shape);
}

RoughnessSchedule::RoughnessSchedule(std::size_t total_steps, double rough_fraction, double w_max)
    : total_(total_steps), rough_fraction_(rough_fraction), w_max_(w_max) {
  if (total_steps < 1) throw std::invalid_argument("RoughnessSchedule: T must be >= 1");
  if (!(rough_fraction >= 0.0 && rough_fraction <= 1.0))
    throw std::invalid_argument("RoughnessSchedule: f_rough must lie in [0, 1]");
  if (!(w_max >= 0.0 && w_max < 1.0))
    throw std::invalid_argument("RoughnessSchedule: w_max must lie in [0, 1)");
  cut_ = static_cast<std::size_t>(std::floor((1.0 - rough_fraction) * static_cast<double>(total_)));
  weights_.assign(total_ + 1, 0.0);
  for (std::size_t t = cut_ + 1; t <= total_; ++t)
    weights_[t] = w_max_ * static_cast<double>(t - cut_) / static_cast<double>(total_ - cut_);
}

double RoughnessSchedule::weight(std::size_t t) const {
  if (t > total_)
    throw std::out_of_range("roughness weight: t=" + std::to_string(t) + " outside [0, " +
                            std::to_string(total_) + "]");
  return weights_[t];
}

ImageTensor apply_stroke(const ImageTensor& x, const StrokeOperator& op) {
  op.check(x.shape());
  ImageTensor out(x.shape());
  kernels::block_average(x.values(), out.values(), x.channels(), x.height(), x.width(), op.k());
  return out;
}

ImageTensor detail_project(const ImageTensor& x, const StrokeOperator& op) {
  return x - apply_stroke(x, op);
}

namespace {
void check_weight(double w) {
  if (!(w >= 0.0 && w < 1.0))
    throw std::invalid_argument("stroke mixing weight w=" + std::to_string(w) +
                                " outside [0, 1)");
}
}  // namespace

ImageTensor mix(const ImageTensor& x, double w, const StrokeOperator& op) {
  check_weight(w);
  op.check(x.shape());
  if (w == 0.0) return x;
  ImageTensor out(x.shape());
  kernels::stroke_mix(x.values(), out.values(), x.channels(), x.height(), x.width(), op.k(), w);
  return out;
}

ImageTensor mix_inverse(const ImageTensor& x, double w, const StrokeOperator& op) {
  check_weight(w);
  const ImageTensor coarse = apply_stroke(x, op);
  return lincomb(1.0, coarse, 1.0 / (1.0 - w), x - coarse);
}

double roughness_weight(std::size_t t, const RoughnessSchedule& sched) { return sched.weight(t); }

double attenuation_gamma(double omega, std::size_t k) {
  if (k < 1) throw std::invalid_argument("attenuation_gamma: k must be >= 1");
  const double den = std::sin(0.5 * omega);
  if (std::abs(den) < 1e-9) return 1.0;
  const double kd = static_cast<double>(k);
  return std::abs(std::sin(0.5 * kd * omega) / (kd * den));
}

double mode_energy_ratio(double rho, double w) {
  if (!(rho >= 0.0 && rho <= 1.0))
    throw std::invalid_argument("mode_energy_ratio: rho must lie in [0, 1]");
  check_weight(w);
  const double rho2 = rho * rho;
  return rho2 + (1.0 - w) * (1.0 - w) * (1.0 - rho2);
}

double multires_complexity(const ImageTensor& x, const StrokeOperator& op, double s) {
  if (!(s >= 0.0)) throw std::invalid_argument("multires_complexity: smoothness s must be >= 0");
  const ImageTensor coarse = apply_stroke(x, op);
  const ImageTensor detail = x - coarse;
  return squared_norm(coarse) +
         std::pow(static_cast<double>(op.k()), 2.0 * s) * squared_norm(detail);
}

}  // namespace ms
