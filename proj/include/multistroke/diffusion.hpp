#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "multistroke/stroke_ops.hpp"
#include "multistroke/tensor.hpp"

namespace ms {

enum class VarianceConvention { kFixedLarge, kFixedSmall };

/// beta / alpha / alpha_bar tables indexed 0..T with alpha_bar_0 = 1.
/// Index 0 of beta and alpha is unused (beta_0 = 0, alpha_0 = 1).
class NoiseSchedule {
 public:
  explicit NoiseSchedule(std::vector<double> betas);  // betas for t = 1..T

  std::size_t total_steps() const noexcept { return beta_.size() - 1; }
  double beta(std::size_t t) const { return beta_.at(t); }
  double alpha(std::size_t t) const { return alpha_.at(t); }
  double alpha_bar(std::size_t t) const { return alpha_bar_.at(t); }

  /// Throws std::out_of_range unless 1 <= t <= T.
  void check_step(std::size_t t) const;

 private:
  std::vector<double> beta_;
  std::vector<double> alpha_;
  std::vector<double> alpha_bar_;
};

NoiseSchedule linear_beta_schedule(std::size_t total_steps, double beta_first, double beta_last);

ImageTensor forward_sample(const ImageTensor& x0, std::size_t t, const ImageTensor& eps,
                           const NoiseSchedule& sched);
double snr(std::size_t t, const NoiseSchedule& sched);
ImageTensor score_from_eps(const ImageTensor& eps_hat, std::size_t t, const NoiseSchedule& sched);

ImageTensor reverse_mean(const ImageTensor& x, const ImageTensor& eps_hat, std::size_t t,
                         const NoiseSchedule& sched);
double reverse_variance(std::size_t t, const NoiseSchedule& sched, VarianceConvention conv);

/// alpha_bar_t / alpha_bar_s, 0 <= s < t <= T.
double jump_alpha(std::size_t t, std::size_t s, const NoiseSchedule& sched);

struct JumpStep {
  ImageTensor mean;
  double variance = 0.0;
};
JumpStep jump_mean_variance(const ImageTensor& x, const ImageTensor& eps_hat, std::size_t t,
                            std::size_t s, const NoiseSchedule& sched, VarianceConvention conv);

/// ||eps_pred - eps||^2 for one sample.
double ddpm_loss(const ImageTensor& eps_pred, const ImageTensor& eps);
/// ||A_w (eps_pred - eps)||^2 for one sample.
double ms_loss(const ImageTensor& eps_pred, const ImageTensor& eps, double w,
               const StrokeOperator& op);

/// Which roughness index the stroke-space target uses.
enum class TargetAlignment {
  kCurrent,   // w_t
  kNextState  // w_{t-1}, the fine-tuning variant
};

ImageTensor ms_input(const ImageTensor& x_t, std::size_t t, const RoughnessSchedule& rough,
                     const StrokeOperator& op);
ImageTensor ms_target(const ImageTensor& eps, std::size_t t, const RoughnessSchedule& rough,
                      const StrokeOperator& op,
                      TargetAlignment align = TargetAlignment::kCurrent);

}  // namespace ms
