#include "multistroke/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "multistroke/rng.hpp"

namespace ms {

void TrainConfig::validate() const {
  if (batch_size == 0) throw std::invalid_argument("train: batch_size must be positive");
  if (buckets == 0) throw std::invalid_argument("train: buckets must be positive");
  if (!(label_drop >= 0.0 && label_drop <= 1.0))
    throw std::invalid_argument("train: label_drop must lie in [0, 1]");
  if (!(optim.learning_rate > 0.0)) throw std::invalid_argument("train: lr must be positive");
  if (!(optim.weight_decay >= 0.0)) throw std::invalid_argument("train: weight_decay must be >= 0");
  if (!(optim.clip_norm > 0.0)) throw std::invalid_argument("train: clip_norm must be positive");
}

LossBuckets::LossBuckets(std::size_t total_steps, std::size_t buckets)
    : total_(total_steps), sum_(buckets, 0.0), count_(buckets, 0) {
  if (total_steps == 0 || buckets == 0 || buckets > total_steps)
    throw std::invalid_argument("LossBuckets: need 1 <= buckets <= T");
}

std::size_t LossBuckets::bucket_of(std::size_t t) const {
  if (t < 1 || t > total_) throw std::out_of_range("LossBuckets: timestep outside [1, T]");
  return ((t - 1) * sum_.size()) / total_;
}

std::pair<std::size_t, std::size_t> LossBuckets::range(std::size_t b) const {
  if (b >= sum_.size()) throw std::out_of_range("LossBuckets: bucket index");
  // Smallest t with bucket_of(t) == b, and the one before the next bucket's.
  const std::size_t n = sum_.size();
  const auto first = [&](std::size_t bb) { return (bb * total_ + n - 1) / n + 1; };
  return {first(b), b + 1 == n ? total_ : first(b + 1) - 1};
}

void LossBuckets::add(std::size_t t, double loss) {
  const std::size_t b = bucket_of(t);
  sum_[b] += loss;
  ++count_[b];
}

void LossBuckets::merge(const LossBuckets& other) {
  if (other.sum_.size() != sum_.size() || other.total_ != total_)
    throw std::invalid_argument("LossBuckets::merge: incompatible bucketing");
  for (std::size_t b = 0; b < sum_.size(); ++b) {
    sum_[b] += other.sum_[b];
    count_[b] += other.count_[b];
  }
}

double LossBuckets::mean(std::size_t b) const {
  if (count_.at(b) == 0) return std::numeric_limits<double>::quiet_NaN();
  return sum_[b] / static_cast<double>(count_[b]);
}

LossBuckets TrainResult::window(std::size_t first_step, std::size_t last_step) const {
  LossBuckets out(totals.total_steps(), totals.size());
  for (const auto& rec : history)
    if (rec.step >= first_step && rec.step <= last_step) out.merge(rec.buckets);
  return out;
}

TrainResult train(DenoiserModel& model, const LabeledImages& data, const NoiseSchedule& sched,
                  const RoughnessSchedule& rough, const StrokeOperator& op,
                  const TrainConfig& config) {
  config.validate();
  if (data.size() == 0) throw std::invalid_argument("train: dataset is empty");
  const std::size_t T = sched.total_steps();
  if (T != model.config().total_steps || rough.total_steps() != T)
    throw std::invalid_argument("train: model, noise schedule and roughness schedule disagree on T");
  if (data.shape != model.config().image)
    throw std::invalid_argument("train: dataset shape " + data.shape.str() +
                                " does not match model " + model.config().image.str());
  op.check(data.shape);

  const LossContext ctx{&sched, &rough, op, config.mode, config.align};
  AdamWState state = make_adamw_state(model.parameters());
  Rng rng(config.seed);

  TrainResult result;
  result.totals = LossBuckets(T, config.buckets);
  result.history.reserve(config.steps);
  std::vector<TrainExample> batch(config.batch_size);

  for (std::size_t step = 1; step <= config.steps; ++step) {
    for (auto& ex : batch) {
      const std::size_t idx = static_cast<std::size_t>(rng.integer(0, data.size() - 1));
      ex.x0 = data.images[idx];
      ex.t = static_cast<std::size_t>(rng.integer(1, T));
      ex.eps = rng.normal_tensor(data.shape);
      const bool drop = rng.uniform() < config.label_drop;
      ex.label = drop ? 0 : data.labels[idx];
    }
    BatchLoss bl = loss_and_gradients(model, batch, ctx);

    StepRecord rec;
    rec.step = step;
    rec.loss = bl.mean_loss;
    rec.buckets = LossBuckets(T, config.buckets);
    for (std::size_t i = 0; i < batch.size(); ++i) rec.buckets.add(batch[i].t, bl.per_example[i]);

    rec.grad_norm = optimizer_step(model.parameters(), std::move(bl.grads), state, config.optim, step);
    rec.clipped_norm = std::min(rec.grad_norm, config.optim.clip_norm);
    result.totals.merge(rec.buckets);
    result.history.push_back(std::move(rec));
  }
  return result;
}

void write_metrics_csv(std::ostream& os, const TrainResult& result) {
  const std::size_t nb = result.totals.size();
  os << "step,loss,grad_norm";
  for (std::size_t b = 0; b < nb; ++b) os << ",bucket_" << b;
  os << '\n';
  os.precision(17);
  for (const auto& rec : result.history) {
    os << rec.step << ',' << rec.loss << ',' << rec.grad_norm;
    for (std::size_t b = 0; b < nb; ++b) {
      os << ',';
      if (rec.buckets.count(b) > 0) os << rec.buckets.mean(b);
    }
    os << '\n';
  }
}

}  // namespace ms
