#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "multistroke/diffusion.hpp"
#include "multistroke/params.hpp"
#include "multistroke/tape.hpp"
#include "multistroke/tensor.hpp"

namespace ms {

struct ModelConfig {
  Shape image{1, 8, 8};
  std::size_t num_classes = 4;  // labels 1..K, 0 is the null class
  std::size_t time_embedding = 32;
  std::size_t class_embedding = 16;
  std::size_t hidden = 256;
  std::size_t total_steps = 500;

  bool operator==(const ModelConfig&) const = default;
};

/// Conditional noise predictor eps_theta(x, t, y).
///
/// Image, sinusoidal timestep embedding and class embedding are concatenated
/// and pushed through two SiLU hidden layers and a linear head reshaped back
/// to the image. The head starts at zero so the initial prediction is 0.
class DenoiserModel {
 public:
  enum Block : std::size_t { kClassTable = 0, kW1, kB1, kW2, kB2, kW3, kB3, kNumBlocks };

  DenoiserModel(const ModelConfig& config, std::uint64_t seed);
  DenoiserModel(const ModelConfig& config, ParameterSet params);

  const ModelConfig& config() const noexcept { return config_; }
  const ParameterSet& parameters() const noexcept { return params_; }
  ParameterSet& parameters() noexcept { return params_; }

  /// Records the network on `tape` and returns the output node.
  ad::NodeId record(ad::Tape& tape, std::span<const double> x_in, std::size_t t,
                    std::size_t label) const;

  void check_inputs(const Shape& shape, std::size_t t, std::size_t label) const;

 private:
  ModelConfig config_;
  ParameterSet params_;
};

std::vector<double> timestep_embedding(std::size_t t, std::size_t dim);

ImageTensor forward(const DenoiserModel& model, const ImageTensor& x_in, std::size_t t,
                    std::size_t label);

enum class LossMode { kDdpm, kMultiStroke };

/// One training example: clean image, timestep, noise and (possibly dropped) label.
struct TrainExample {
  ImageTensor x0;
  std::size_t t = 1;
  ImageTensor eps;
  std::size_t label = 0;
};

struct LossContext {
  const NoiseSchedule* schedule = nullptr;
  const RoughnessSchedule* rough = nullptr;
  StrokeOperator op{1};
  LossMode mode = LossMode::kDdpm;
  TargetAlignment align = TargetAlignment::kCurrent;
};

struct SampleLoss {
  double loss = 0.0;
  GradientSet grads;
};

/// Loss and exact parameter gradients for one example.
///
/// multistroke: input A_t(x_t), loss ||A_t(eps_theta - eps)||^2 (A at w_t, or
/// w_{t-1} for the next-state alignment). ddpm: input x_t, loss ||eps_theta - eps||^2.
SampleLoss example_loss_and_gradients(const DenoiserModel& model, const TrainExample& ex,
                                      const LossContext& ctx);

struct BatchLoss {
  double mean_loss = 0.0;
  std::vector<double> per_example;
  GradientSet grads;  // gradient of the mean loss
};

/// Mean loss over the batch. Per-example gradients may be computed in
/// parallel but are summed in example order.
BatchLoss loss_and_gradients(const DenoiserModel& model, std::span<const TrainExample> batch,
                             const LossContext& ctx);

}  // namespace ms
