#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "multistroke/stroke_ops.hpp"
#include "multistroke/tensor.hpp"

namespace ms {

/// Real height x width grid, row-major.
struct Grid {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> values;

  double at(std::size_t i, std::size_t j) const { return values[i * width + j]; }
};

struct Spectrum {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> re;
  std::vector<double> im;

  double power(std::size_t u, std::size_t v) const {
    const std::size_t i = u * width + v;
    return re[i] * re[i] + im[i] * im[i];
  }
};

/// Unweighted mean over channels.
Grid grayscale(const ImageTensor& x);

Spectrum dft2(const Grid& g);

/// Centered (zero frequency at (H/2, W/2)) log(1 + |X(u, v)|).
Grid dft2_logmag(const Grid& g);

enum class Band { kLow, kHigh };

/// Radial band mask on the centered frequency grid, indexed by the
/// unshifted DFT bin (u, v). r_norm = radius / max radius on the grid;
/// low: r_norm <= 0.3, high: r_norm >= 0.6.
struct BandMask {
  std::size_t height = 0;
  std::size_t width = 0;
  Band band = Band::kLow;
  std::vector<bool> mask;

  static BandMask make(std::size_t height, std::size_t width, Band band);
  bool contains(std::size_t u, std::size_t v) const { return mask[u * width + v]; }
  /// Normalized radius of unshifted bin (u, v).
  static double normalized_radius(std::size_t u, std::size_t v, std::size_t height, std::size_t width);
};

inline constexpr double kSnrStabilizer = 1e-12;
inline constexpr double kSnrCapDb = 120.0;

/// Mean over images of 10 log10(sum_B |mu^|^2 / (sum_B |delta^|^2 + 1e-12)),
/// delta = gray(x) - gray(reference). Each per-image value is capped at +120 dB.
double band_snr(const std::vector<ImageTensor>& generated, const ImageTensor& reference_mean,
                const BandMask& band);

using FeatureMap = std::function<std::vector<double>(const ImageTensor&)>;

/// k = 2 block-pooled pixels, flattened (C * H/2 * W/2 values).
std::vector<double> pooled_features(const ImageTensor& x);

class ClassCalibration {
 public:
  /// Centers from `train` (per class mean feature), sorted squared-distance
  /// tables from `calibration`. Labels are 1..K.
  ClassCalibration(const std::vector<ImageTensor>& train, const std::vector<std::size_t>& train_labels,
                   const std::vector<ImageTensor>& calibration,
                   const std::vector<std::size_t>& calibration_labels, std::size_t num_classes,
                   FeatureMap features = pooled_features);

  std::size_t num_classes() const noexcept { return centers_.size(); }
  const std::vector<double>& center(std::size_t label) const;
  const std::vector<double>& table(std::size_t label) const;
  const FeatureMap& features() const noexcept { return features_; }

  double squared_distance(const ImageTensor& x, std::size_t label) const;

 private:
  std::vector<std::vector<double>> centers_;
  std::vector<std::vector<double>> tables_;
  FeatureMap features_;
};

/// 1 - F_label(d^2), F the empirical CDF of the calibration table. In [0, 1].
double one_class_score(const ImageTensor& x, std::size_t label, const ClassCalibration& calib);
/// Same, from a precomputed squared distance.
double one_class_score_from_distance(double d2, std::size_t label, const ClassCalibration& calib);

}  // namespace ms
