#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace ms {

/// A named, shaped block of trainable values (row-major).
struct ParamBlock {
  std::string name;
  std::vector<std::size_t> dims;
  std::vector<double> values;

  std::size_t size() const noexcept { return values.size(); }
};

using ParameterSet = std::vector<ParamBlock>;

/// Gradient storage laid out exactly like a ParameterSet.
using GradientSet = std::vector<std::vector<double>>;

GradientSet zeros_like(const ParameterSet& params);
void set_zero(GradientSet& grads);
/// dst += src, block by block.
void accumulate(GradientSet& dst, const GradientSet& src);
void scale(GradientSet& grads, double factor);
double global_norm(const GradientSet& grads);
std::size_t parameter_count(const ParameterSet& params);

}  // namespace ms
