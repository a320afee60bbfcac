#include "multistroke/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "multistroke/kernels.hpp"

namespace ms {

Grid grayscale(const ImageTensor& x) {
  Grid g{x.height(), x.width(), std::vector<double>(x.height() * x.width(), 0.0)};
  const double inv = 1.0 / static_cast<double>(x.channels());
  for (std::size_t c = 0; c < x.channels(); ++c)
    for (std::size_t i = 0; i < x.height(); ++i)
      for (std::size_t j = 0; j < x.width(); ++j) g.values[i * x.width() + j] += x.at(c, i, j);
  if (x.channels() > 1)
    for (double& v : g.values) v *= inv;
  return g;
}

Spectrum dft2(const Grid& g) {
  Spectrum s{g.height, g.width, std::vector<double>(g.values.size()), std::vector<double>(g.values.size())};
  kernels::dft2(g.values, s.re, s.im, g.height, g.width);
  return s;
}

Grid dft2_logmag(const Grid& g) {
  const Spectrum s = dft2(g);
  Grid out{g.height, g.width, std::vector<double>(g.values.size())};
  for (std::size_t u = 0; u < g.height; ++u) {
    for (std::size_t v = 0; v < g.width; ++v) {
      const std::size_t cu = (u + g.height / 2) % g.height;
      const std::size_t cv = (v + g.width / 2) % g.width;
      out.values[cu * g.width + cv] = std::log1p(std::sqrt(s.power(u, v)));
    }
  }
  return out;
}

double BandMask::normalized_radius(std::size_t u, std::size_t v, std::size_t height, std::size_t width) {
  // Signed centered frequency of each unshifted bin, in [-N/2, N/2).
  const auto centered = [](std::size_t k, std::size_t n) {
    const std::size_t shifted = (k + n / 2) % n;
    return static_cast<double>(shifted) - static_cast<double>(n / 2);
  };
  const double fy = centered(u, height);
  const double fx = centered(v, width);
  const double rmax = std::hypot(static_cast<double>(height / 2), static_cast<double>(width / 2));
  if (rmax == 0.0) return 0.0;
  return std::hypot(fy, fx) / rmax;
}

BandMask BandMask::make(std::size_t height, std::size_t width, Band band) {
  BandMask m{height, width, band, std::vector<bool>(height * width, false)};
  for (std::size_t u = 0; u < height; ++u) {
    for (std::size_t v = 0; v < width; ++v) {
      const double r = normalized_radius(u, v, height, width);
      m.mask[u * width + v] = band == Band::kLow ? r <= 0.3 : r >= 0.6;
    }
  }
  return m;
}

double band_snr(const std::vector<ImageTensor>& generated, const ImageTensor& reference_mean,
                const BandMask& band) {
  if (generated.empty()) throw std::invalid_argument("band_snr: generated set is empty");
  const Grid ref = grayscale(reference_mean);
  if (ref.height != band.height || ref.width != band.width)
    throw std::invalid_argument("band_snr: band mask does not match image size");
  const Spectrum mu = dft2(ref);
  double signal = 0.0;
  for (std::size_t u = 0; u < ref.height; ++u)
    for (std::size_t v = 0; v < ref.width; ++v)
      if (band.contains(u, v)) signal += mu.power(u, v);

  double total = 0.0;
  for (const auto& x : generated) {
    if (x.height() != reference_mean.height() || x.width() != reference_mean.width())
      throw std::invalid_argument("band_snr: image " + x.shape().str() +
                                  " does not match reference " + reference_mean.shape().str());
    Grid delta = grayscale(x);
    for (std::size_t i = 0; i < delta.values.size(); ++i) delta.values[i] -= ref.values[i];
    const Spectrum ds = dft2(delta);
    double noise = 0.0;
    for (std::size_t u = 0; u < ref.height; ++u)
      for (std::size_t v = 0; v < ref.width; ++v)
        if (band.contains(u, v)) noise += ds.power(u, v);
    const double db = 10.0 * std::log10(signal / (noise + kSnrStabilizer));
    total += std::min(db, kSnrCapDb);
  }
  return total / static_cast<double>(generated.size());
}

std::vector<double> pooled_features(const ImageTensor& x) {
  const ImageTensor pooled = apply_stroke(x, StrokeOperator(2));
  std::vector<double> f;
  f.reserve(x.size() / 4);
  for (std::size_t c = 0; c < x.channels(); ++c)
    for (std::size_t i = 0; i < x.height(); i += 2)
      for (std::size_t j = 0; j < x.width(); j += 2) f.push_back(pooled.at(c, i, j));
  return f;
}

ClassCalibration::ClassCalibration(const std::vector<ImageTensor>& train,
                                   const std::vector<std::size_t>& train_labels,
                                   const std::vector<ImageTensor>& calibration,
                                   const std::vector<std::size_t>& calibration_labels,
                                   std::size_t num_classes, FeatureMap features)
    : features_(std::move(features)) {
  if (train.size() != train_labels.size() || calibration.size() != calibration_labels.size())
    throw std::invalid_argument("ClassCalibration: images and labels differ in length");
  if (num_classes == 0) throw std::invalid_argument("ClassCalibration: need at least one class");
  centers_.assign(num_classes, {});
  std::vector<std::size_t> counts(num_classes, 0);
  for (std::size_t n = 0; n < train.size(); ++n) {
    const std::size_t y = train_labels[n];
    if (y < 1 || y > num_classes) throw std::out_of_range("ClassCalibration: label out of range");
    const auto f = features_(train[n]);
    auto& c = centers_[y - 1];
    if (c.empty()) c.assign(f.size(), 0.0);
    for (std::size_t i = 0; i < f.size(); ++i) c[i] += f[i];
    ++counts[y - 1];
  }
  for (std::size_t y = 0; y < num_classes; ++y) {
    if (counts[y] == 0)
      throw std::invalid_argument("ClassCalibration: class " + std::to_string(y + 1) +
                                  " has no training images");
    for (double& v : centers_[y]) v /= static_cast<double>(counts[y]);
  }
  tables_.assign(num_classes, {});
  for (std::size_t n = 0; n < calibration.size(); ++n) {
    const std::size_t y = calibration_labels[n];
    if (y < 1 || y > num_classes) throw std::out_of_range("ClassCalibration: label out of range");
    tables_[y - 1].push_back(squared_distance(calibration[n], y));
  }
  for (std::size_t y = 0; y < num_classes; ++y) {
    if (tables_[y].empty())
      throw std::invalid_argument("ClassCalibration: class " + std::to_string(y + 1) +
                                  " has no calibration images");
    std::sort(tables_[y].begin(), tables_[y].end());
  }
}

const std::vector<double>& ClassCalibration::center(std::size_t label) const {
  if (label < 1 || label > centers_.size())
    throw std::out_of_range("one-class score: unknown label " + std::to_string(label));
  return centers_[label - 1];
}

const std::vector<double>& ClassCalibration::table(std::size_t label) const {
  if (label < 1 || label > tables_.size())
    throw std::out_of_range("one-class score: unknown label " + std::to_string(label));
  return tables_[label - 1];
}

double ClassCalibration::squared_distance(const ImageTensor& x, std::size_t label) const {
  const auto& c = center(label);
  const auto f = features_(x);
  if (f.size() != c.size()) throw std::invalid_argument("one-class score: feature size mismatch");
  double d2 = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) d2 += (f[i] - c[i]) * (f[i] - c[i]);
  return d2;
}

double one_class_score_from_distance(double d2, std::size_t label, const ClassCalibration& calib) {
  const auto& tab = calib.table(label);
  const auto rank = std::upper_bound(tab.begin(), tab.end(), d2) - tab.begin();
  return 1.0 - static_cast<double>(rank) / static_cast<double>(tab.size());
}

double one_class_score(const ImageTensor& x, std::size_t label, const ClassCalibration& calib) {
  return one_class_score_from_distance(calib.squared_distance(x, label), label, calib);
}

}  // namespace ms
