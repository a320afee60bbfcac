#pragma once

#include <cstddef>
#include <stdexcept>

#include "multistroke/params.hpp"

namespace ms {

struct AdamWConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 1e-4;
  double clip_norm = 1.0;  // <= 0 disables clipping
};

struct AdamWState {
  GradientSet first;
  GradientSet second;
};

class NonFiniteGradient : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

AdamWState make_adamw_state(const ParameterSet& params);

/// Global-norm clip in place; returns the pre-clip norm.
double clip_global_norm(GradientSet& grads, double max_norm);

/// One AdamW step (step_index >= 1). Gradients are clipped to
/// config.clip_norm first, then
///   m = b1 m + (1-b1) g,  v = b2 v + (1-b2) g^2
///   p -= lr * (m / (1-b1^k)) / (sqrt(v / (1-b2^k)) + eps) + lr * wd * p
/// Returns the pre-clip gradient norm.
double optimizer_step(ParameterSet& params, GradientSet grads, AdamWState& state,
                      const AdamWConfig& config, std::size_t step_index);

}  // namespace ms
