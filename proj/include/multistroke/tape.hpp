#pragma once

// Reverse-mode differentiation over dense vectors.
//
// A Tape records every node produced during a forward evaluation. Calling
// backward() walks the nodes in reverse creation order and accumulates
// parameter gradients into a GradientSet. The op set is exactly what the
// denoiser and its losses need: dense affine maps, SiLU, concatenation,
// embedding-row lookup, the stroke mixing map, subtraction of a constant
// target, and a squared-norm reduction.

#include <cstddef>
#include <span>
#include <vector>

#include "multistroke/params.hpp"
#include "multistroke/stroke_ops.hpp"

namespace ms::ad {

using NodeId = std::size_t;

class Tape {
 public:
  explicit Tape(const ParameterSet& params) : params_(&params) {}

  /// Constant leaf; receives no gradient from the caller's point of view.
  NodeId constant(std::span<const double> values);
  /// y = W x + b with W = params[weight], b = params[bias].
  NodeId affine(std::size_t weight, std::size_t bias, NodeId x);
  NodeId silu(NodeId x);
  NodeId concat(std::span<const NodeId> parts);
  /// Row `row` of the (rows x cols) table params[table].
  NodeId embedding(std::size_t table, std::size_t row);
  /// (1 - w) x + w S_k x with x viewed as an image of `shape`.
  NodeId stroke_mix(NodeId x, const Shape& shape, const StrokeOperator& op, double w);
  NodeId subtract_constant(NodeId x, std::span<const double> target);
  /// Scalar ||x||^2.
  NodeId squared_norm(NodeId x);

  std::span<const double> value(NodeId id) const { return nodes_[id].value; }
  std::span<const double> grad(NodeId id) const { return nodes_[id].grad; }
  std::size_t size() const noexcept { return nodes_.size(); }

  /// Seeds d(out) = seed and back-propagates, adding into `grads`.
  void backward(NodeId out, std::span<const double> seed, GradientSet& grads);
  /// Convenience for scalar outputs: seed = 1.
  void backward(NodeId out, GradientSet& grads);

 private:
  enum class Op { kConstant, kAffine, kSilu, kConcat, kEmbedding, kStrokeMix, kSubtract, kSqNorm };

  struct Node {
    Op op;
    std::vector<NodeId> inputs{};
    std::size_t p0 = 0;  // weight / table index
    std::size_t p1 = 0;  // bias index / embedding row
    Shape shape{};
    std::size_t k = 1;
    double w = 0.0;
    std::vector<double> value{};
    std::vector<double> grad{};
  };

  NodeId push(Node node);

  const ParameterSet* params_;
  std::vector<Node> nodes_;
};

}  // namespace ms::ad
