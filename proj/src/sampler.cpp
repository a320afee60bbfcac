#include "multistroke/sampler.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace ms {

void SamplePlan::validate(std::size_t total_steps) const {
  if (timesteps.size() < 2) throw std::invalid_argument("SamplePlan: need at least one step");
  if (timesteps.front() > total_steps)
    throw std::invalid_argument("SamplePlan: first timestep " + std::to_string(timesteps.front()) +
                                " exceeds T=" + std::to_string(total_steps));
  if (timesteps.back() != 0) throw std::invalid_argument("SamplePlan: schedule must end at 0");
  for (std::size_t i = 1; i < timesteps.size(); ++i)
    if (timesteps[i] >= timesteps[i - 1])
      throw std::invalid_argument("SamplePlan: schedule must be strictly decreasing");
}

std::vector<std::size_t> subsample_schedule(std::size_t total_steps, std::size_t num_steps) {
  if (num_steps < 1 || num_steps > total_steps)
    throw std::invalid_argument("subsample_schedule: N=" + std::to_string(num_steps) +
                                " outside [1, T=" + std::to_string(total_steps) + "]");
  std::vector<std::size_t> out;
  out.reserve(num_steps + 1);
  for (std::size_t i = 0; i <= num_steps; ++i) {
    // round-half-up of T (N - i) / N in integer arithmetic
    const std::size_t tau = (2 * total_steps * (num_steps - i) + num_steps) / (2 * num_steps);
    if (out.empty() || tau < out.back()) out.push_back(tau);
  }
  out.front() = total_steps;
  if (out.back() != 0) out.push_back(0);
  return out;
}

namespace {

void check_plan(const NoiseSchedule& sched, const SamplePlan& plan, SampleMode expected) {
  if (plan.mode != expected)
    throw std::invalid_argument("sampler: plan mode does not match the requested sampler");
  plan.validate(sched.total_steps());
}

}  // namespace

ImageTensor sample_ddpm(const NoisePredictor& model, const NoiseSchedule& sched,
                        const SamplePlan& plan, Shape shape, std::size_t label, Rng& rng) {
  check_plan(sched, plan, SampleMode::kDdpm);
  ImageTensor x = rng.normal_tensor(shape);
  for (std::size_t i = 0; i + 1 < plan.timesteps.size(); ++i) {
    const std::size_t t = plan.timesteps[i];
    const std::size_t s = plan.timesteps[i + 1];
    const ImageTensor eps_hat = model.predict(x, t, label);
    JumpStep step = jump_mean_variance(x, eps_hat, t, s, sched, plan.variance);
    if (s == 0) {
      x = std::move(step.mean);
    } else {
      const ImageTensor eta = rng.normal_tensor(shape);
      x = lincomb(1.0, step.mean, std::sqrt(step.variance), eta);
    }
  }
  return x;
}

ImageTensor sample_multistroke(const NoisePredictor& model, const NoiseSchedule& sched,
                               const RoughnessSchedule& rough, const StrokeOperator& op,
                               const SamplePlan& plan, Shape shape, std::size_t label, Rng& rng) {
  check_plan(sched, plan, SampleMode::kMultiStroke);
  if (rough.total_steps() != sched.total_steps())
    throw std::invalid_argument("sampler: roughness and noise schedules disagree on T");
  op.check(shape);
  ImageTensor x = mix(rng.normal_tensor(shape), rough.weight(plan.timesteps.front()), op);
  for (std::size_t i = 0; i + 1 < plan.timesteps.size(); ++i) {
    const std::size_t t = plan.timesteps[i];
    const std::size_t s = plan.timesteps[i + 1];
    const ImageTensor x_ms = mix(x, rough.weight(t), op);
    const ImageTensor eps_hat = model.predict(x_ms, t, label);
    JumpStep step = jump_mean_variance(x_ms, eps_hat, t, s, sched, plan.variance);
    if (s == 0) {
      x = std::move(step.mean);
    } else {
      const ImageTensor eta = mix(rng.normal_tensor(shape), rough.weight(s), op);
      x = lincomb(1.0, step.mean, std::sqrt(step.variance), eta);
    }
  }
  return x;
}

ImageTensor sample(const NoisePredictor& model, const NoiseSchedule& sched,
                   const RoughnessSchedule& rough, const StrokeOperator& op,
                   const SamplePlan& plan, Shape shape, std::size_t label, Rng& rng) {
  if (plan.mode == SampleMode::kMultiStroke)
    return sample_multistroke(model, sched, rough, op, plan, shape, label, rng);
  return sample_ddpm(model, sched, plan, shape, label, rng);
}

}  // namespace ms
