#pragma once

// Flat key=value run configuration shared by the train, sample, simulate
// and audit commands. Parsing is all-or-nothing: every malformed line is
// collected with its line number and reported in one ConfigError, and no
// field of the result is touched unless the whole text parses and validates.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "multistroke/diffusion.hpp"
#include "multistroke/sampler.hpp"
#include "multistroke/surrogate.hpp"
#include "multistroke/train.hpp"

namespace ms {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ReferenceMean { kPerClass, kGlobal };

struct RunConfig {
  std::uint64_t seed = 0;

  // Data and model.
  Shape image{1, 8, 8};
  std::size_t classes = 4;
  std::string dataset = "synthetic";  // or a path to an (N, C, H, W) tensor file
  std::string labels;                 // label tensor file, required with a dataset path
  std::size_t dataset_size = 512;
  std::size_t hidden = 256;
  std::size_t time_embedding = 32;
  std::size_t class_embedding = 16;

  // Schedules.
  std::size_t total_steps = 500;
  double beta_first = 1e-4;
  double beta_last = 2.8e-2;
  std::size_t k = 2;
  double f_rough = 0.75;
  double w_max = 0.5;

  // Training.
  LossMode mode = LossMode::kMultiStroke;
  TargetAlignment alignment = TargetAlignment::kCurrent;
  double lr = 1e-4;
  double weight_decay = 1e-4;
  double clip_norm = 1.0;
  std::size_t batch_size = 32;
  std::size_t steps = 2000;
  double label_drop = 0.1;
  std::size_t buckets = 5;

  // Sampling.
  std::string checkpoint;
  std::vector<std::size_t> sample_steps{50};
  std::size_t num_samples = 16;
  VarianceConvention variance = VarianceConvention::kFixedLarge;
  long long label = -1;  // -1 cycles through 1..K
  bool export_pgm = false;

  // Surrogate simulation.
  Shape surrogate_shape{1, 4, 4};
  std::size_t surrogate_k = 2;
  std::size_t chain_length = 5;
  double rho = 0.5;
  double kappa = 0.0;
  double bias_energy = 0.0;
  double sigma = 0.1;
  double surrogate_w = 0.5;
  std::size_t mc_samples = 100000;
  DetailBlockKind detail_block = DetailBlockKind::kRandomOrthogonal;
  double coarse_gain = 1.0;

  // Audit.
  std::vector<std::string> sample_dirs;
  ReferenceMean reference_mean = ReferenceMean::kPerClass;
  double calibration_fraction = 0.5;

  /// Keys that appeared in the parsed text.
  std::set<std::string> explicit_keys;

  NoiseSchedule noise_schedule() const;
  RoughnessSchedule roughness() const;
  ModelConfig model_config() const;
  TrainConfig train_config() const;
  SurrogateInputs surrogate_inputs() const;

  /// Cross-field checks; throws ConfigError.
  void validate() const;
};

/// Parses `text`; `origin` prefixes error messages and relative paths are
/// resolved against `base_dir`.
RunConfig parse_config(const std::string& text, const std::string& origin = "config",
                       const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

/// All accepted keys, in documentation order.
const std::vector<std::string>& config_keys();

/// key=value dump of every field, parseable by parse_config.
void write_config(std::ostream& os, const RunConfig& c);

}  // namespace ms
