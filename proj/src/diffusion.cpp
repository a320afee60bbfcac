#include "multistroke/diffusion.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace ms {

NoiseSchedule::NoiseSchedule(std::vector<double> betas) {
  if (betas.empty()) throw std::invalid_argument("NoiseSchedule: need at least one step");
  const std::size_t total = betas.size();
  beta_.assign(total + 1, 0.0);
  alpha_.assign(total + 1, 1.0);
  alpha_bar_.assign(total + 1, 1.0);
  for (std::size_t t = 1; t <= total; ++t) {
    const double b = betas[t - 1];
    if (!(b > 0.0 && b < 1.0))
      throw std::invalid_argument("NoiseSchedule: beta_" + std::to_string(t) + "=" +
                                  std::to_string(b) + " outside (0, 1)");
    beta_[t] = b;
    alpha_[t] = 1.0 - b;
    alpha_bar_[t] = alpha_bar_[t - 1] * alpha_[t];
  }
}

void NoiseSchedule::check_step(std::size_t t) const {
  if (t < 1 || t > total_steps())
    throw std::out_of_range("timestep t=" + std::to_string(t) + " outside [1, " +
                            std::to_string(total_steps()) + "]");
}

NoiseSchedule linear_beta_schedule(std::size_t total_steps, double beta_first, double beta_last) {
  if (total_steps < 1) throw std::invalid_argument("linear_beta_schedule: T must be >= 1");
  if (!(beta_first > 0.0 && beta_first <= beta_last && beta_last < 1.0))
    throw std::invalid_argument("linear_beta_schedule: need 0 < beta_1 <= beta_T < 1");
  std::vector<double> betas(total_steps);
  if (total_steps == 1) {
    betas[0] = beta_first;
  } else {
    const double span = beta_last - beta_first;
    for (std::size_t i = 0; i < total_steps; ++i)
      betas[i] = beta_first + span * static_cast<double>(i) / static_cast<double>(total_steps - 1);
  }
  return NoiseSchedule(std::move(betas));
}

ImageTensor forward_sample(const ImageTensor& x0, std::size_t t, const ImageTensor& eps,
                           const NoiseSchedule& sched) {
  sched.check_step(t);
  const double ab = sched.alpha_bar(t);
  return lincomb(std::sqrt(ab), x0, std::sqrt(1.0 - ab), eps);
}

double snr(std::size_t t, const NoiseSchedule& sched) {
  sched.check_step(t);
  const double ab = sched.alpha_bar(t);
  if (ab >= 1.0) throw std::domain_error("snr: alpha_bar equals 1, SNR undefined");
  return ab / (1.0 - ab);
}

ImageTensor score_from_eps(const ImageTensor& eps_hat, std::size_t t, const NoiseSchedule& sched) {
  sched.check_step(t);
  return (-1.0 / std::sqrt(1.0 - sched.alpha_bar(t))) * eps_hat;
}

ImageTensor reverse_mean(const ImageTensor& x, const ImageTensor& eps_hat, std::size_t t,
                         const NoiseSchedule& sched) {
  sched.check_step(t);
  const double a = sched.alpha(t);
  const double inv = 1.0 / std::sqrt(a);
  return lincomb(inv, x, -inv * (1.0 - a) / std::sqrt(1.0 - sched.alpha_bar(t)), eps_hat);
}

double reverse_variance(std::size_t t, const NoiseSchedule& sched, VarianceConvention conv) {
  sched.check_step(t);
  const double one_minus_a = 1.0 - sched.alpha(t);
  if (conv == VarianceConvention::kFixedLarge) return one_minus_a;
  return (1.0 - sched.alpha_bar(t - 1)) / (1.0 - sched.alpha_bar(t)) * one_minus_a;
}

namespace {
void check_jump(std::size_t t, std::size_t s, const NoiseSchedule& sched) {
  sched.check_step(t);
  if (s >= t)
    throw std::invalid_argument("jump step requires s < t, got t=" + std::to_string(t) +
                                " s=" + std::to_string(s));
}
}  // namespace

double jump_alpha(std::size_t t, std::size_t s, const NoiseSchedule& sched) {
  check_jump(t, s, sched);
  return sched.alpha_bar(t) / sched.alpha_bar(s);
}

JumpStep jump_mean_variance(const ImageTensor& x, const ImageTensor& eps_hat, std::size_t t,
                            std::size_t s, const NoiseSchedule& sched, VarianceConvention conv) {
  const double a = jump_alpha(t, s, sched);
  const double inv = 1.0 / std::sqrt(a);
  JumpStep out;
  out.mean = lincomb(inv, x, -inv * (1.0 - a) / std::sqrt(1.0 - sched.alpha_bar(t)), eps_hat);
  out.variance = conv == VarianceConvention::kFixedLarge
                     ? 1.0 - a
                     : (1.0 - sched.alpha_bar(s)) / (1.0 - sched.alpha_bar(t)) * (1.0 - a);
  return out;
}

double ddpm_loss(const ImageTensor& eps_pred, const ImageTensor& eps) {
  return squared_norm(eps_pred - eps);
}

double ms_loss(const ImageTensor& eps_pred, const ImageTensor& eps, double w,
               const StrokeOperator& op) {
  return squared_norm(mix(eps_pred - eps, w, op));
}

ImageTensor ms_input(const ImageTensor& x_t, std::size_t t, const RoughnessSchedule& rough,
                     const StrokeOperator& op) {
  return mix(x_t, rough.weight(t), op);
}

ImageTensor ms_target(const ImageTensor& eps, std::size_t t, const RoughnessSchedule& rough,
                      const StrokeOperator& op, TargetAlignment align) {
  if (align == TargetAlignment::kNextState && t == 0)
    throw std::out_of_range("ms_target: next-state alignment needs t >= 1");
  const std::size_t idx = align == TargetAlignment::kCurrent ? t : t - 1;
  return mix(eps, rough.weight(idx), op);
}

}  // namespace ms
