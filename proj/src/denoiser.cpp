#include "multistroke/denoiser.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

#include "multistroke/rng.hpp"

namespace ms {

namespace {

ParamBlock make_block(std::string name, std::vector<std::size_t> dims) {
  std::size_t n = 1;
  for (auto d : dims) n *= d;
  return ParamBlock{std::move(name), std::move(dims), std::vector<double>(n, 0.0)};
}

void uniform_fill(ParamBlock& block, double limit, Rng& rng) {
  for (double& v : block.values) v = (2.0 * rng.uniform() - 1.0) * limit;
}

ParameterSet layout(const ModelConfig& c) {
  const std::size_t in = c.image.size() + c.time_embedding + c.class_embedding;
  ParameterSet p;
  p.push_back(make_block("class_embedding", {c.num_classes + 1, c.class_embedding}));
  p.push_back(make_block("fc1.weight", {c.hidden, in}));
  p.push_back(make_block("fc1.bias", {c.hidden}));
  p.push_back(make_block("fc2.weight", {c.hidden, c.hidden}));
  p.push_back(make_block("fc2.bias", {c.hidden}));
  p.push_back(make_block("head.weight", {c.image.size(), c.hidden}));
  p.push_back(make_block("head.bias", {c.image.size()}));
  return p;
}

}  // namespace

DenoiserModel::DenoiserModel(const ModelConfig& config, std::uint64_t seed)
    : config_(config), params_(layout(config)) {
  if (config.hidden == 0 || config.total_steps == 0 || config.num_classes == 0)
    throw std::invalid_argument("ModelConfig: hidden, total_steps and num_classes must be positive");
  Rng rng(seed);
  for (double& v : params_[kClassTable].values) v = rng.normal();
  // Variance-scaled uniform: Var = 1 / fan_in.
  uniform_fill(params_[kW1], std::sqrt(3.0 / static_cast<double>(params_[kW1].dims[1])), rng);
  uniform_fill(params_[kW2], std::sqrt(3.0 / static_cast<double>(params_[kW2].dims[1])), rng);
  // Head stays zero.
}

DenoiserModel::DenoiserModel(const ModelConfig& config, ParameterSet params)
    : config_(config), params_(std::move(params)) {
  const ParameterSet expected = layout(config);
  if (params_.size() != expected.size())
    throw std::invalid_argument("DenoiserModel: expected " + std::to_string(expected.size()) +
                                " parameter blocks, got " + std::to_string(params_.size()));
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (params_[i].name != expected[i].name || params_[i].dims != expected[i].dims ||
        params_[i].values.size() != expected[i].values.size())
      throw std::invalid_argument("DenoiserModel: parameter block '" + params_[i].name +
                                  "' does not match expected '" + expected[i].name + "'");
  }
}

std::vector<double> timestep_embedding(std::size_t t, std::size_t dim) {
  std::vector<double> e(dim, 0.0);
  const std::size_t half = dim / 2;
  for (std::size_t i = 0; i < half; ++i) {
    const double freq = std::exp(-std::log(10000.0) * static_cast<double>(i) / static_cast<double>(half));
    e[i] = std::sin(static_cast<double>(t) * freq);
    e[i + half] = std::cos(static_cast<double>(t) * freq);
  }
  return e;
}

void DenoiserModel::check_inputs(const Shape& shape, std::size_t t, std::size_t label) const {
  if (shape != config_.image)
    throw std::invalid_argument("denoiser: input shape " + shape.str() + " does not match model " +
                                config_.image.str());
  if (t < 1 || t > config_.total_steps)
    throw std::out_of_range("denoiser: timestep " + std::to_string(t) + " outside [1, " +
                            std::to_string(config_.total_steps) + "]");
  if (label > config_.num_classes)
    throw std::out_of_range("denoiser: label " + std::to_string(label) + " outside [0, " +
                            std::to_string(config_.num_classes) + "]");
}

ad::NodeId DenoiserModel::record(ad::Tape& tape, std::span<const double> x_in, std::size_t t,
                                 std::size_t label) const {
  const auto temb = timestep_embedding(t, config_.time_embedding);
  const std::array<ad::NodeId, 3> parts{tape.constant(x_in), tape.constant(temb),
                                        tape.embedding(kClassTable, label)};
  ad::NodeId h = tape.concat(parts);
  h = tape.silu(tape.affine(kW1, kB1, h));
  h = tape.silu(tape.affine(kW2, kB2, h));
  return tape.affine(kW3, kB3, h);
}

ImageTensor forward(const DenoiserModel& model, const ImageTensor& x_in, std::size_t t,
                    std::size_t label) {
  model.check_inputs(x_in.shape(), t, label);
  ad::Tape tape(model.parameters());
  const ad::NodeId out = model.record(tape, x_in.values(), t, label);
  const auto v = tape.value(out);
  return ImageTensor(x_in.shape(), std::vector<double>(v.begin(), v.end()));
}

SampleLoss example_loss_and_gradients(const DenoiserModel& model, const TrainExample& ex,
                                      const LossContext& ctx) {
  require_same_shape(ex.x0, ex.eps, "loss_and_gradients");
  model.check_inputs(ex.x0.shape(), ex.t, ex.label);
  const ImageTensor x_t = forward_sample(ex.x0, ex.t, ex.eps, *ctx.schedule);

  ad::Tape tape(model.parameters());
  SampleLoss out{0.0, zeros_like(model.parameters())};
  ad::NodeId loss_node;
  if (ctx.mode == LossMode::kMultiStroke) {
    const ImageTensor x_ms = ms_input(x_t, ex.t, *ctx.rough, ctx.op);
    const std::size_t w_idx = ctx.align == TargetAlignment::kCurrent ? ex.t : ex.t - 1;
    const double w = ctx.rough->weight(w_idx);
    const ad::NodeId pred = model.record(tape, x_ms.values(), ex.t, ex.label);
    const ad::NodeId resid = tape.subtract_constant(pred, ex.eps.values());
    loss_node = tape.squared_norm(tape.stroke_mix(resid, ex.x0.shape(), ctx.op, w));
  } else {
    const ad::NodeId pred = model.record(tape, x_t.values(), ex.t, ex.label);
    loss_node = tape.squared_norm(tape.subtract_constant(pred, ex.eps.values()));
  }
  out.loss = tape.value(loss_node)[0];
  tape.backward(loss_node, out.grads);
  return out;
}

BatchLoss loss_and_gradients(const DenoiserModel& model, std::span<const TrainExample> batch,
                             const LossContext& ctx) {
  if (batch.empty()) throw std::invalid_argument("loss_and_gradients: empty batch");
  // Validate up front; exceptions must not escape the parallel region.
  for (const auto& ex : batch) {
    require_same_shape(ex.x0, ex.eps, "loss_and_gradients");
    model.check_inputs(ex.x0.shape(), ex.t, ex.label);
    if (ctx.mode == LossMode::kMultiStroke) ctx.op.check(ex.x0.shape());
  }
  std::vector<SampleLoss> per(batch.size());
  const long long n = static_cast<long long>(batch.size());
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < n; ++i)
    per[static_cast<std::size_t>(i)] =
        example_loss_and_gradients(model, batch[static_cast<std::size_t>(i)], ctx);

  BatchLoss out;
  out.grads = zeros_like(model.parameters());
  out.per_example.reserve(batch.size());
  double total = 0.0;
  for (const auto& s : per) {
    total += s.loss;
    out.per_example.push_back(s.loss);
    accumulate(out.grads, s.grads);
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  out.mean_loss = total * inv;
  scale(out.grads, inv);
  return out;
}

}  // namespace ms
