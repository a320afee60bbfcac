#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "multistroke/denoiser.hpp"
#include "multistroke/diffusion.hpp"
#include "multistroke/rng.hpp"

namespace ms {

enum class SampleMode { kDdpm, kMultiStroke };

struct SamplePlan {
  std::vector<std::size_t> timesteps;  // tau_0 > ... > tau_N = 0
  VarianceConvention variance = VarianceConvention::kFixedLarge;
  SampleMode mode = SampleMode::kDdpm;
  std::uint64_t seed = 0;

  /// Strictly decreasing, ends at 0, starts at most at T.
  void validate(std::size_t total_steps) const;
};

/// N + 1 indices: round(T (N - i) / N) for i = 0..N, strictly decreasing.
std::vector<std::size_t> subsample_schedule(std::size_t total_steps, std::size_t num_steps);

/// Anything that maps (x, t, label) to a noise prediction.
class NoisePredictor {
 public:
  virtual ~NoisePredictor() = default;
  virtual ImageTensor predict(const ImageTensor& x, std::size_t t, std::size_t label) const = 0;
};

class ModelPredictor final : public NoisePredictor {
 public:
  explicit ModelPredictor(const DenoiserModel& model) : model_(&model) {}
  ImageTensor predict(const ImageTensor& x, std::size_t t, std::size_t label) const override {
    return forward(*model_, x, t, label);
  }

 private:
  const DenoiserModel* model_;
};

/// Ancestral DDPM over the plan's (possibly jumped) schedule. The state at
/// index 0 is returned as is; no noise is added on the step into 0.
ImageTensor sample_ddpm(const NoisePredictor& model, const NoiseSchedule& sched,
                        const SamplePlan& plan, Shape shape, std::size_t label, Rng& rng);

/// Stroke-controlled sampler: x_T <- A_T(x_T); per step t -> s the network
/// sees A_t(x_t), the mean is taken at A_t(x_t), and the injected noise is
/// mixed with the destination weight w_s.
ImageTensor sample_multistroke(const NoisePredictor& model, const NoiseSchedule& sched,
                               const RoughnessSchedule& rough, const StrokeOperator& op,
                               const SamplePlan& plan, Shape shape, std::size_t label, Rng& rng);

/// Dispatches on plan.mode.
ImageTensor sample(const NoisePredictor& model, const NoiseSchedule& sched,
                   const RoughnessSchedule& rough, const StrokeOperator& op,
                   const SamplePlan& plan, Shape shape, std::size_t label, Rng& rng);

}  // namespace ms
