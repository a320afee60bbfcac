#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "multistroke/tensor.hpp"

namespace ms {

struct LabeledImages {
  Shape shape{};
  std::size_t num_classes = 0;
  std::vector<ImageTensor> images;
  std::vector<std::size_t> labels;  // 1..num_classes

  std::size_t size() const noexcept { return images.size(); }
};

/// Procedural class-conditional images in [-1, 1]: class 1 filled squares,
/// class 2 discs, class 3 horizontal stripes, class 4 vertical stripes (and
/// cyclically beyond), each at a class-dependent position with random jitter,
/// intensity and a little pixel noise.
LabeledImages make_synthetic_dataset(Shape shape, std::size_t num_classes, std::size_t count,
                                     std::uint64_t seed);

/// Images with label == cls.
std::vector<ImageTensor> images_of_class(const LabeledImages& data, std::size_t cls);

}  // namespace ms
