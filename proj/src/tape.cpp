#include "multistroke/tape.hpp"

#include <cmath>
#include <stdexcept>

#include "multistroke/kernels.hpp"

namespace ms {

GradientSet zeros_like(const ParameterSet& params) {
  GradientSet g;
  g.reserve(params.size());
  for (const auto& p : params) g.emplace_back(p.size(), 0.0);
  return g;
}

void set_zero(GradientSet& grads) {
  for (auto& g : grads) std::fill(g.begin(), g.end(), 0.0);
}

void accumulate(GradientSet& dst, const GradientSet& src) {
  for (std::size_t b = 0; b < dst.size(); ++b)
    for (std::size_t i = 0; i < dst[b].size(); ++i) dst[b][i] += src[b][i];
}

void scale(GradientSet& grads, double factor) {
  for (auto& g : grads)
    for (double& v : g) v *= factor;
}

double global_norm(const GradientSet& grads) {
  double s = 0.0;
  for (const auto& g : grads) s += kernels::squared_norm(g);
  return std::sqrt(s);
}

std::size_t parameter_count(const ParameterSet& params) {
  std::size_t n = 0;
  for (const auto& p : params) n += p.size();
  return n;
}

}  // namespace ms

namespace ms::ad {

namespace {
double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
}  // namespace

NodeId Tape::push(Node node) {
  node.grad.assign(node.value.size(), 0.0);
  nodes_.push_back(std::move(node));
  return nodes_.size() - 1;
}

NodeId Tape::constant(std::span<const double> values) {
  Node n{.op = Op::kConstant};
  n.value.assign(values.begin(), values.end());
  return push(std::move(n));
}

NodeId Tape::affine(std::size_t weight, std::size_t bias, NodeId x) {
  const ParamBlock& W = (*params_)[weight];
  const ParamBlock& b = (*params_)[bias];
  const std::size_t rows = W.dims.at(0);
  const std::size_t cols = W.dims.at(1);
  if (nodes_[x].value.size() != cols || b.size() != rows)
    throw std::invalid_argument("Tape::affine: " + W.name + " expects input of size " +
                                std::to_string(cols) + ", got " +
                                std::to_string(nodes_[x].value.size()));
  Node n{.op = Op::kAffine, .inputs = {x}, .p0 = weight, .p1 = bias};
  n.value.resize(rows);
  kernels::affine(W.values, b.values, nodes_[x].value, n.value, rows, cols);
  return push(std::move(n));
}

NodeId Tape::silu(NodeId x) {
  Node n{.op = Op::kSilu, .inputs = {x}};
  const auto& in = nodes_[x].value;
  n.value.resize(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) n.value[i] = in[i] * sigmoid(in[i]);
  return push(std::move(n));
}

NodeId Tape::concat(std::span<const NodeId> parts) {
  Node n{.op = Op::kConcat, .inputs = {parts.begin(), parts.end()}};
  for (NodeId p : parts) n.value.insert(n.value.end(), nodes_[p].value.begin(), nodes_[p].value.end());
  return push(std::move(n));
}

NodeId Tape::embedding(std::size_t table, std::size_t row) {
  const ParamBlock& E = (*params_)[table];
  const std::size_t rows = E.dims.at(0);
  const std::size_t cols = E.dims.at(1);
  if (row >= rows)
    throw std::out_of_range("Tape::embedding: row " + std::to_string(row) + " outside table " +
                            E.name + " with " + std::to_string(rows) + " rows");
  Node n{.op = Op::kEmbedding, .p0 = table, .p1 = row};
  n.value.assign(E.values.begin() + static_cast<std::ptrdiff_t>(row * cols),
                 E.values.begin() + static_cast<std::ptrdiff_t>((row + 1) * cols));
  return push(std::move(n));
}

NodeId Tape::stroke_mix(NodeId x, const Shape& shape, const StrokeOperator& op, double w) {
  if (nodes_[x].value.size() != shape.size())
    throw std::invalid_argument("Tape::stroke_mix: node size does not match image shape");
  op.check(shape);
  Node n{.op = Op::kStrokeMix, .inputs = {x}, .shape = shape, .k = op.k(), .w = w};
  n.value.resize(shape.size());
  kernels::stroke_mix(nodes_[x].value, n.value, shape.channels, shape.height, shape.width, op.k(), w);
  return push(std::move(n));
}

NodeId Tape::subtract_constant(NodeId x, std::span<const double> target) {
  if (nodes_[x].value.size() != target.size())
    throw std::invalid_argument("Tape::subtract_constant: size mismatch");
  Node n{.op = Op::kSubtract, .inputs = {x}};
  n.value.resize(target.size());
  for (std::size_t i = 0; i < target.size(); ++i) n.value[i] = nodes_[x].value[i] - target[i];
  return push(std::move(n));
}

NodeId Tape::squared_norm(NodeId x) {
  Node n{.op = Op::kSqNorm, .inputs = {x}};
  n.value = {kernels::serial::squared_norm(nodes_[x].value)};
  return push(std::move(n));
}

void Tape::backward(NodeId out, GradientSet& grads) {
  const double one = 1.0;
  backward(out, std::span<const double>(&one, 1), grads);
}

void Tape::backward(NodeId out, std::span<const double> seed, GradientSet& grads) {
  if (seed.size() != nodes_[out].value.size())
    throw std::invalid_argument("Tape::backward: seed size mismatch");
  for (auto& n : nodes_) std::fill(n.grad.begin(), n.grad.end(), 0.0);
  nodes_[out].grad.assign(seed.begin(), seed.end());

  for (std::size_t id = out + 1; id-- > 0;) {
    Node& n = nodes_[id];
    switch (n.op) {
      case Op::kConstant:
        break;
      case Op::kAffine: {
        const ParamBlock& W = (*params_)[n.p0];
        Node& in = nodes_[n.inputs[0]];
        kernels::affine_backward(W.values, in.value, n.grad, in.grad, grads[n.p0], grads[n.p1],
                                 W.dims[0], W.dims[1]);
        break;
      }
      case Op::kSilu: {
        Node& in = nodes_[n.inputs[0]];
        for (std::size_t i = 0; i < n.grad.size(); ++i) {
          const double s = sigmoid(in.value[i]);
          in.grad[i] += n.grad[i] * s * (1.0 + in.value[i] * (1.0 - s));
        }
        break;
      }
      case Op::kConcat: {
        std::size_t off = 0;
        for (NodeId p : n.inputs) {
          Node& in = nodes_[p];
          for (std::size_t i = 0; i < in.grad.size(); ++i) in.grad[i] += n.grad[off + i];
          off += in.grad.size();
        }
        break;
      }
      case Op::kEmbedding: {
        const std::size_t cols = (*params_)[n.p0].dims[1];
        auto& g = grads[n.p0];
        for (std::size_t i = 0; i < cols; ++i) g[n.p1 * cols + i] += n.grad[i];
        break;
      }
      case Op::kStrokeMix: {
        // The mixing map is self-adjoint, so its vector-Jacobian product is
        // the same map applied to the incoming gradient.
        Node& in = nodes_[n.inputs[0]];
        std::vector<double> back(n.grad.size());
        kernels::stroke_mix(n.grad, back, n.shape.channels, n.shape.height, n.shape.width, n.k, n.w);
        for (std::size_t i = 0; i < back.size(); ++i) in.grad[i] += back[i];
        break;
      }
      case Op::kSubtract: {
        Node& in = nodes_[n.inputs[0]];
        for (std::size_t i = 0; i < n.grad.size(); ++i) in.grad[i] += n.grad[i];
        break;
      }
      case Op::kSqNorm: {
        Node& in = nodes_[n.inputs[0]];
        for (std::size_t i = 0; i < in.value.size(); ++i) in.grad[i] += 2.0 * n.grad[0] * in.value[i];
        break;
      }
    }
  }
}

}  // namespace ms::ad
