#include "multistroke/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "multistroke/rng.hpp"

namespace ms {

namespace {

void draw_shape(ImageTensor& img, std::size_t cls, Rng& rng) {
  const double h = static_cast<double>(img.height());
  const double w = static_cast<double>(img.width());
  const std::size_t kind = (cls - 1) % 4;
  const std::size_t variant = (cls - 1) / 4;
  const double intensity = 0.6 + 0.4 * rng.uniform();
  // Class-dependent anchor, jittered by up to one pixel.
  const double shift = 0.15 * static_cast<double>(variant % 3);
  const double cy = h * (kind % 2 == 0 ? 0.35 + shift : 0.6 - shift) + (rng.uniform() - 0.5) * 2.0;
  const double cx = w * (kind < 2 ? 0.4 + shift : 0.55 - shift) + (rng.uniform() - 0.5) * 2.0;
  const double radius = std::max(1.0, 0.22 * std::min(h, w) * (0.8 + 0.4 * rng.uniform()));
  const std::size_t period = std::max<std::size_t>(4, img.height() / 4);
  const std::size_t phase = static_cast<std::size_t>(rng.integer(0, period - 1));

  for (std::size_t c = 0; c < img.channels(); ++c) {
    const double tint = 1.0 - 0.15 * static_cast<double>(c);
    for (std::size_t i = 0; i < img.height(); ++i) {
      for (std::size_t j = 0; j < img.width(); ++j) {
        const double y = static_cast<double>(i) + 0.5;
        const double x = static_cast<double>(j) + 0.5;
        bool on = false;
        switch (kind) {
          case 0:
            on = std::abs(y - cy) <= radius && std::abs(x - cx) <= radius;
            break;
          case 1:
            on = (y - cy) * (y - cy) + (x - cx) * (x - cx) <= radius * radius;
            break;
          case 2:
            on = ((i + phase) / (period / 2)) % 2 == 0 && std::abs(x - cx) <= 1.5 * radius;
            break;
          default:
            on = ((j + phase) / (period / 2)) % 2 == 0 && std::abs(y - cy) <= 1.5 * radius;
            break;
        }
        img.at(c, i, j) = on ? intensity * tint : -1.0;
      }
    }
  }
}

}  // namespace

LabeledImages make_synthetic_dataset(Shape shape, std::size_t num_classes, std::size_t count,
                                     std::uint64_t seed) {
  if (num_classes == 0) throw std::invalid_argument("synthetic dataset: need at least one class");
  if (count == 0) throw std::invalid_argument("synthetic dataset: count must be positive");
  LabeledImages out;
  out.shape = shape;
  out.num_classes = num_classes;
  out.images.reserve(count);
  out.labels.reserve(count);
  Rng rng(seed);
  for (std::size_t n = 0; n < count; ++n) {
    const std::size_t cls = 1 + n % num_classes;
    ImageTensor img(shape, -1.0);
    draw_shape(img, cls, rng);
    for (double& v : img.values()) v = std::clamp(v + 0.05 * rng.normal(), -1.0, 1.0);
    out.images.push_back(std::move(img));
    out.labels.push_back(cls);
  }
  return out;
}

std::vector<ImageTensor> images_of_class(const LabeledImages& data, std::size_t cls) {
  std::vector<ImageTensor> out;
  for (std::size_t i = 0; i < data.size(); ++i)
    if (data.labels[i] == cls) out.push_back(data.images[i]);
  return out;
}

}  // namespace ms
