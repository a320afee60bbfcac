#include "multistroke/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "multistroke/kernels.hpp"

namespace ms {

std::string Shape::str() const {
  return std::to_string(channels) + "x" + std::to_string(height) + "x" + std::to_string(width);
}

ImageTensor::ImageTensor(Shape shape, double fill) : shape_(shape), data_(shape.size(), fill) {
  if (shape.channels == 0 || shape.height == 0 || shape.width == 0)
    throw std::invalid_argument("ImageTensor: all dimensions must be positive, got " + shape.str());
}

ImageTensor::ImageTensor(Shape shape, std::vector<double> values)
    : shape_(shape), data_(std::move(values)) {
  if (shape.channels == 0 || shape.height == 0 || shape.width == 0)
    throw std::invalid_argument("ImageTensor: all dimensions must be positive, got " + shape.str());
  if (data_.size() != shape.size())
    throw std::invalid_argument("ImageTensor: " + std::to_string(data_.size()) +
                                " values do not fill shape " + shape.str());
}

bool ImageTensor::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

ImageTensor& ImageTensor::operator+=(const ImageTensor& other) {
  require_same_shape(*this, other, "operator+=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

ImageTensor& ImageTensor::operator-=(const ImageTensor& other) {
  require_same_shape(*this, other, "operator-=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

ImageTensor& ImageTensor::operator*=(double scale) noexcept {
  for (double& v : data_) v *= scale;
  return *this;
}

ImageTensor operator+(ImageTensor a, const ImageTensor& b) { return a += b; }
ImageTensor operator-(ImageTensor a, const ImageTensor& b) { return a -= b; }
ImageTensor operator*(double scale, ImageTensor a) { return a *= scale; }

ImageTensor lincomb(double a, const ImageTensor& x, double b, const ImageTensor& y) {
  require_same_shape(x, y, "lincomb");
  ImageTensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = a * x[i] + b * y[i];
  return out;
}

double dot(const ImageTensor& a, const ImageTensor& b) {
  require_same_shape(a, b, "dot");
  return kernels::dot(a.values(), b.values());
}

double squared_norm(const ImageTensor& a) { return kernels::squared_norm(a.values()); }

double max_abs_diff(const ImageTensor& a, const ImageTensor& b) {
  require_same_shape(a, b, "max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

void require_same_shape(const ImageTensor& a, const ImageTensor& b, const char* context) {
  if (a.shape() != b.shape())
    throw std::invalid_argument(std::string(context) + ": shape mismatch " + a.shape().str() +
                                " vs " + b.shape().str());
}

}  // namespace ms
