#include "multistroke/optimizer.hpp"

#include <cmath>
#include <string>

namespace ms {

AdamWState make_adamw_state(const ParameterSet& params) {
  return AdamWState{zeros_like(params), zeros_like(params)};
}

double clip_global_norm(GradientSet& grads, double max_norm) {
  const double norm = global_norm(grads);
  if (max_norm > 0.0 && norm > max_norm) scale(grads, max_norm / norm);
  return norm;
}

double optimizer_step(ParameterSet& params, GradientSet grads, AdamWState& state,
                      const AdamWConfig& config, std::size_t step_index) {
  if (step_index < 1) throw std::invalid_argument("optimizer_step: step_index must be >= 1");
  for (std::size_t b = 0; b < grads.size(); ++b)
    for (std::size_t i = 0; i < grads[b].size(); ++i)
      if (!std::isfinite(grads[b][i]))
        throw NonFiniteGradient("non-finite gradient in block '" + params[b].name + "' at index " +
                                std::to_string(i) + " (step " + std::to_string(step_index) + ")");

  const double norm = clip_global_norm(grads, config.clip_norm);
  const double k = static_cast<double>(step_index);
  const double bc1 = 1.0 - std::pow(config.beta1, k);
  const double bc2 = 1.0 - std::pow(config.beta2, k);
  const double decay = 1.0 - config.learning_rate * config.weight_decay;

  for (std::size_t b = 0; b < params.size(); ++b) {
    auto& p = params[b].values;
    auto& m = state.first[b];
    auto& v = state.second[b];
    const auto& g = grads[b];
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g[i];
      v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g[i] * g[i];
      const double m_hat = m[i] / bc1;
      const double v_hat = v[i] / bc2;
      p[i] = p[i] * decay - config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
    }
  }
  return norm;
}

}  // namespace ms
