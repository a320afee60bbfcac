#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace ms {

struct Shape {
  std::size_t channels = 0;
  std::size_t height = 0;
  std::size_t width = 0;

  std::size_t size() const noexcept { return channels * height * width; }
  std::size_t plane() const noexcept { return height * width; }
  bool operator==(const Shape&) const = default;
  std::string str() const;
};

/// Real-valued (channels, height, width) array stored row-major.
///
/// Every signal in the toolkit (clean images, noise, predictions, projector
/// outputs) is carried by this type. Arithmetic is 64-bit throughout.
class ImageTensor {
 public:
  ImageTensor() = default;
  explicit ImageTensor(Shape shape, double fill = 0.0);
  ImageTensor(Shape shape, std::vector<double> values);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t channels() const noexcept { return shape_.channels; }
  std::size_t height() const noexcept { return shape_.height; }
  std::size_t width() const noexcept { return shape_.width; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& at(std::size_t c, std::size_t i, std::size_t j) {
    return data_[(c * shape_.height + i) * shape_.width + j];
  }
  double at(std::size_t c, std::size_t i, std::size_t j) const {
    return data_[(c * shape_.height + i) * shape_.width + j];
  }
  double& operator[](std::size_t idx) { return data_[idx]; }
  double operator[](std::size_t idx) const { return data_[idx]; }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }
  const std::vector<double>& vector() const noexcept { return data_; }

  bool all_finite() const noexcept;

  ImageTensor& operator+=(const ImageTensor& other);
  ImageTensor& operator-=(const ImageTensor& other);
  ImageTensor& operator*=(double scale) noexcept;

  friend bool operator==(const ImageTensor&, const ImageTensor&) = default;

 private:
  Shape shape_{};
  std::vector<double> data_;
};

ImageTensor operator+(ImageTensor a, const ImageTensor& b);
ImageTensor operator-(ImageTensor a, const ImageTensor& b);
ImageTensor operator*(double scale, ImageTensor a);

/// a*x + b*y, shapes must match.
ImageTensor lincomb(double a, const ImageTensor& x, double b, const ImageTensor& y);

double dot(const ImageTensor& a, const ImageTensor& b);
double squared_norm(const ImageTensor& a);
double max_abs_diff(const ImageTensor& a, const ImageTensor& b);

void require_same_shape(const ImageTensor& a, const ImageTensor& b, const char* context);

}  // namespace ms
