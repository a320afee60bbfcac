#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include "multistroke/dataset.hpp"
#include "multistroke/denoiser.hpp"
#include "multistroke/optimizer.hpp"

namespace ms {

struct TrainConfig {
  AdamWConfig optim{};
  std::size_t batch_size = 32;
  std::size_t steps = 2000;
  double label_drop = 0.1;
  std::uint64_t seed = 0;
  std::size_t buckets = 5;
  LossMode mode = LossMode::kMultiStroke;
  TargetAlignment align = TargetAlignment::kCurrent;

  void validate() const;
};

/// Running loss means over B equal contiguous timestep ranges of {1..T}.
class LossBuckets {
 public:
  LossBuckets(std::size_t total_steps, std::size_t buckets);

  std::size_t bucket_of(std::size_t t) const;
  /// Inclusive [first, last] timesteps of bucket b.
  std::pair<std::size_t, std::size_t> range(std::size_t b) const;
  std::size_t size() const noexcept { return sum_.size(); }
  std::size_t total_steps() const noexcept { return total_; }

  void add(std::size_t t, double loss);
  void merge(const LossBuckets& other);
  std::size_t count(std::size_t b) const { return count_.at(b); }
  /// NaN for an empty bucket.
  double mean(std::size_t b) const;

 private:
  std::size_t total_;
  std::vector<double> sum_;
  std::vector<std::size_t> count_;
};

struct StepRecord {
  std::size_t step = 0;
  double loss = 0.0;
  double grad_norm = 0.0;     // before clipping
  double clipped_norm = 0.0;  // after clipping
  LossBuckets buckets{1, 1};  // this step's examples only
};

struct TrainResult {
  std::vector<StepRecord> history;
  LossBuckets totals{1, 1};

  /// Pooled bucket means over steps [first_step, last_step].
  LossBuckets window(std::size_t first_step, std::size_t last_step) const;
};

/// Deterministic given config.seed. Batches, timesteps, noise and label
/// drops depend only on the seed, so ddpm and multistroke runs with the same
/// seed see identical draws.
TrainResult train(DenoiserModel& model, const LabeledImages& data, const NoiseSchedule& sched,
                  const RoughnessSchedule& rough, const StrokeOperator& op,
                  const TrainConfig& config);

/// step,loss,grad_norm,bucket_0..bucket_{B-1}; empty cell for an empty bucket.
void write_metrics_csv(std::ostream& os, const TrainResult& result);

}  // namespace ms
