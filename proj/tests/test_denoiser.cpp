#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "multistroke/dataset.hpp"
#include "multistroke/denoiser.hpp"
#include "multistroke/optimizer.hpp"
#include "multistroke/rng.hpp"
#include "multistroke/tape.hpp"
#include "multistroke/train.hpp"
#include "support/reference.hpp"

using namespace ms;

namespace {

ModelConfig micro_config() {
  ModelConfig c;
  c.image = {1, 2, 2};
  c.num_classes = 2;
  c.time_embedding = 2;
  c.class_embedding = 2;
  c.hidden = 2;
  c.total_steps = 10;
  return c;
}

// Random values everywhere, including the head, so no gradient is trivially zero.
DenoiserModel randomized_micro(std::uint64_t seed) {
  DenoiserModel m(micro_config(), seed);
  Rng rng(seed + 1);
  for (auto& b : m.parameters())
    for (double& v : b.values) v = 0.7 * rng.normal();
  return m;
}

std::vector<TrainExample> micro_batch(std::size_t t, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<TrainExample> batch(3);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    batch[i].x0 = rng.normal_tensor({1, 2, 2});
    batch[i].eps = rng.normal_tensor({1, 2, 2});
    batch[i].t = t;
    batch[i].label = i % 3;
  }
  return batch;
}

double rel_error(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-4}); }

struct FdCase {
  LossMode mode;
  std::size_t t;  // t = 2 sits at w = 0, t = 10 at w = 0.5 for the schedule below
};

class FiniteDifference : public ::testing::TestWithParam<FdCase> {};

}  // namespace

TEST_P(FiniteDifference, EveryParameterMatches) {
  const auto [mode, t] = GetParam();
  const NoiseSchedule sched = linear_beta_schedule(10, 1e-2, 0.2);
  const RoughnessSchedule rough(10, 0.75, 0.5);
  const LossContext ctx{&sched, &rough, StrokeOperator(2), mode, TargetAlignment::kCurrent};
  DenoiserModel model = randomized_micro(42);
  const auto batch = micro_batch(t, 7);
  const BatchLoss analytic = loss_and_gradients(model, batch, ctx);

  const double h = 1e-4;
  double worst = 0.0;
  std::size_t checked = 0;
  for (std::size_t b = 0; b < model.parameters().size(); ++b)
    for (std::size_t i = 0; i < model.parameters()[b].size(); ++i) {
      double& p = model.parameters()[b].values[i];
      const double saved = p;
      p = saved + h;
      const double up = loss_and_gradients(model, batch, ctx).mean_loss;
      p = saved - h;
      const double down = loss_and_gradients(model, batch, ctx).mean_loss;
      p = saved;
      const double numeric = (up - down) / (2 * h);
      worst = std::max(worst, rel_error(analytic.grads[b][i], numeric));
      ++checked;
    }
  EXPECT_EQ(checked, parameter_count(model.parameters()));
  EXPECT_LE(worst, 1e-5);
}

INSTANTIATE_TEST_SUITE_P(Modes, FiniteDifference,
                         ::testing::Values(FdCase{LossMode::kDdpm, 2}, FdCase{LossMode::kDdpm, 10},
                                           FdCase{LossMode::kMultiStroke, 2}, FdCase{LossMode::kMultiStroke, 10}));

TEST(Denoiser, ZeroHeadPredictsZero) {
  const DenoiserModel model(ModelConfig{}, 3);
  const ImageTensor x = ref::random_tensor({1, 8, 8}, 1);
  const ImageTensor y = forward(model, x, 250, 2);
  EXPECT_EQ(y, ImageTensor({1, 8, 8}, 0.0));
}

TEST(Denoiser, DeterministicForward) {
  const DenoiserModel model = randomized_micro(5);
  const ImageTensor x = ref::random_tensor({1, 2, 2}, 2);
  EXPECT_EQ(forward(model, x, 3, 1), forward(model, x, 3, 1));
  EXPECT_NE(forward(model, x, 3, 1), forward(model, x, 3, 2));
}

TEST(Denoiser, RejectsBadInputs) {
  const DenoiserModel model = randomized_micro(5);
  const ImageTensor x({1, 2, 2});
  EXPECT_THROW((void)forward(model, x, 0, 1), std::out_of_range);
  EXPECT_THROW((void)forward(model, x, 11, 1), std::out_of_range);
  EXPECT_THROW((void)forward(model, x, 1, 3), std::out_of_range);
  EXPECT_THROW((void)forward(model, ImageTensor({1, 4, 4}), 1, 1), std::invalid_argument);
}

TEST(Denoiser, ZeroHeadLossIsStrokeEnergyOfNoise) {
  const NoiseSchedule sched = linear_beta_schedule(10, 1e-2, 0.2);
  const RoughnessSchedule rough(10, 0.75, 0.5);
  const StrokeOperator op(2);
  const DenoiserModel model(micro_config(), 9);
  const auto batch = micro_batch(10, 8);
  const BatchLoss bl = loss_and_gradients(model, batch, {&sched, &rough, op, LossMode::kMultiStroke});
  double want = 0.0;
  for (const auto& ex : batch) want += ref::norm2(ref::mix(ex.eps, 0.5, 2));
  EXPECT_NEAR(bl.mean_loss, want / 3.0, 1e-12);
}

TEST(Denoiser, ZeroWeightMatchesPlainLossGradients) {
  const NoiseSchedule sched = linear_beta_schedule(10, 1e-2, 0.2);
  const RoughnessSchedule rough(10, 0.75, 0.5);
  const DenoiserModel model = randomized_micro(11);
  const auto batch = micro_batch(2, 12);  // w_2 = 0
  const BatchLoss a = loss_and_gradients(model, batch, {&sched, &rough, StrokeOperator(2), LossMode::kMultiStroke});
  const BatchLoss b = loss_and_gradients(model, batch, {&sched, &rough, StrokeOperator(2), LossMode::kDdpm});
  EXPECT_EQ(a.mean_loss, b.mean_loss);
  EXPECT_EQ(a.grads, b.grads);
}

TEST(Tape, StrokeNormBackwardIsTwiceAsquaredR) {
  const ParameterSet none;
  const StrokeOperator op(2);
  const Shape shape{2, 4, 4};
  const ImageTensor r = ref::random_tensor(shape, 13);
  for (const double w : {0.0, 0.3, 0.5}) {
    ad::Tape tape(none);
    const ad::NodeId in = tape.constant(r.values());
    const ad::NodeId out = tape.squared_norm(tape.stroke_mix(in, shape, op, w));
    GradientSet g;
    tape.backward(out, g);
    const ImageTensor got(shape, std::vector<double>(tape.grad(in).begin(), tape.grad(in).end()));
    const ImageTensor avg = ref::block_average(r, 2);
    ImageTensor want(shape);
    for (std::size_t i = 0; i < r.size(); ++i) want[i] = 2.0 * (avg[i] + (1 - w) * (1 - w) * (r[i] - avg[i]));
    EXPECT_LT(max_abs_diff(got, want), 1e-12) << "w=" << w;
  }
}

TEST(Timestep, EmbeddingValues) {
  const auto e = timestep_embedding(3, 4);
  ASSERT_EQ(e.size(), 4u);
  EXPECT_NEAR(e[0], std::sin(3.0), 1e-15);
  EXPECT_NEAR(e[1], std::sin(3.0 * 0.01), 1e-15);
  EXPECT_NEAR(e[2], std::cos(3.0), 1e-15);
}

TEST(Optimizer, HandRolledThreeSteps) {
  ParameterSet p{{"x", {1}, {0.5}}};
  AdamWState st = make_adamw_state(p);
  AdamWConfig cfg;
  cfg.learning_rate = 0.1;
  cfg.weight_decay = 0.01;
  cfg.clip_norm = 0.0;
  const double g = 0.3;
  // Hand rollout with a constant gradient.
  double x = 0.5, m = 0, v = 0;
  for (int k = 1; k <= 3; ++k) {
    m = 0.9 * m + 0.1 * g;
    v = 0.999 * v + 0.001 * g * g;
    const double mh = m / (1 - std::pow(0.9, k)), vh = v / (1 - std::pow(0.999, k));
    x = x * (1 - 0.1 * 0.01) - 0.1 * mh / (std::sqrt(vh) + 1e-8);
    optimizer_step(p, GradientSet{{g}}, st, cfg, static_cast<std::size_t>(k));
    EXPECT_NEAR(p[0].values[0], x, 1e-15) << "step " << k;
  }
  // With a constant gradient m_hat / sqrt(v_hat) = 1: each step moves by about lr.
  EXPECT_NEAR(x, 0.5 * std::pow(0.999, 3) - 0.3 * (1 - 1e-7), 1e-3);
}

TEST(Optimizer, ZeroGradientNoDecayIsNoop) {
  ParameterSet p{{"a", {3}, {1.0, -2.0, 3.0}}};
  const ParameterSet before = p;
  AdamWState st = make_adamw_state(p);
  AdamWConfig cfg;
  cfg.weight_decay = 0.0;
  for (std::size_t k = 1; k <= 5; ++k) optimizer_step(p, zeros_like(p), st, cfg, k);
  EXPECT_EQ(p[0].values, before[0].values);
}

TEST(Optimizer, ClipScalesByNormRatio) {
  GradientSet g{{6.0, 8.0}};
  EXPECT_DOUBLE_EQ(clip_global_norm(g, 1.0), 10.0);
  EXPECT_NEAR(g[0][0], 0.6, 1e-15);
  EXPECT_NEAR(g[0][1], 0.8, 1e-15);
  GradientSet small{{0.3}};
  clip_global_norm(small, 1.0);
  EXPECT_EQ(small[0][0], 0.3);
}

TEST(Optimizer, RejectsNonFinite) {
  ParameterSet p{{"a", {1}, {1.0}}};
  AdamWState st = make_adamw_state(p);
  EXPECT_THROW(optimizer_step(p, GradientSet{{std::nan("")}}, st, {}, 1), NonFiniteGradient);
  EXPECT_THROW(optimizer_step(p, GradientSet{{1.0}}, st, {}, 0), std::invalid_argument);
}

namespace {

struct TrainSetup {
  ModelConfig mc;
  NoiseSchedule sched = linear_beta_schedule(50, 1e-4, 2e-2);
  RoughnessSchedule rough{50, 0.75, 0.5};
  StrokeOperator op{2};
  LabeledImages data;
  TrainSetup() {
    mc.image = {1, 4, 4};
    mc.total_steps = 50;
    mc.hidden = 16;
    mc.time_embedding = 4;
    mc.class_embedding = 2;
    data = make_synthetic_dataset(mc.image, 4, 32, 3);
  }
  TrainConfig config(std::size_t steps) const {
    TrainConfig c;
    c.steps = steps;
    c.batch_size = 8;
    c.seed = 17;
    return c;
  }
};

}  // namespace

TEST(Train, ZeroStepsLeavesModelUnchanged) {
  TrainSetup s;
  DenoiserModel model(s.mc, 1);
  const ParameterSet before = model.parameters();
  const TrainResult r = train(model, s.data, s.sched, s.rough, s.op, s.config(0));
  EXPECT_TRUE(r.history.empty());
  for (std::size_t b = 0; b < before.size(); ++b) EXPECT_EQ(model.parameters()[b].values, before[b].values);
}

TEST(Train, BitReproducible) {
  TrainSetup s;
  DenoiserModel a(s.mc, 1), b(s.mc, 1);
  const TrainResult ra = train(a, s.data, s.sched, s.rough, s.op, s.config(20));
  const TrainResult rb = train(b, s.data, s.sched, s.rough, s.op, s.config(20));
  for (std::size_t i = 0; i < a.parameters().size(); ++i) EXPECT_EQ(a.parameters()[i].values, b.parameters()[i].values);
  ASSERT_EQ(ra.history.size(), 20u);
  for (std::size_t i = 0; i < 20; ++i) {
    EXPECT_EQ(ra.history[i].loss, rb.history[i].loss);
    EXPECT_TRUE(std::isfinite(ra.history[i].grad_norm));
    EXPECT_LE(ra.history[i].clipped_norm, 1.0);
  }
}

TEST(Train, LabelDropOneOnlyTrainsNullEmbedding) {
  TrainSetup s;
  DenoiserModel model(s.mc, 1);
  const auto before = model.parameters()[DenoiserModel::kClassTable].values;
  TrainConfig cfg = s.config(5);
  cfg.label_drop = 1.0;
  cfg.optim.weight_decay = 0.0;
  train(model, s.data, s.sched, s.rough, s.op, cfg);
  const auto& after = model.parameters()[DenoiserModel::kClassTable].values;
  const std::size_t width = s.mc.class_embedding;
  bool null_row_moved = false;
  for (std::size_t i = 0; i < after.size(); ++i) {
    if (i < width) null_row_moved = null_row_moved || after[i] != before[i];
    else EXPECT_EQ(after[i], before[i]) << "row " << i / width << " received gradient";
  }
  EXPECT_TRUE(null_row_moved);
}

TEST(Train, MetricsCsvHeaderAndRows) {
  TrainSetup s;
  DenoiserModel model(s.mc, 1);
  const TrainResult r = train(model, s.data, s.sched, s.rough, s.op, s.config(3));
  std::ostringstream os;
  write_metrics_csv(os, r);
  const std::string text = os.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "step,loss,grad_norm,bucket_0,bucket_1,bucket_2,bucket_3,bucket_4");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 4);
}

TEST(Buckets, Ranges) {
  const LossBuckets b(500, 5);
  EXPECT_EQ(b.range(0), (std::pair<std::size_t, std::size_t>{1, 100}));
  EXPECT_EQ(b.range(4), (std::pair<std::size_t, std::size_t>{401, 500}));
  EXPECT_EQ(b.bucket_of(100), 0u);
  EXPECT_EQ(b.bucket_of(101), 1u);
  EXPECT_EQ(b.bucket_of(500), 4u);
  const LossBuckets odd(7, 3);
  std::size_t covered = 0;
  for (std::size_t i = 0; i < 3; ++i) covered += odd.range(i).second - odd.range(i).first + 1;
  EXPECT_EQ(covered, 7u);
  EXPECT_TRUE(std::isnan(odd.mean(0)));
}

TEST(Dataset, SyntheticProperties) {
  const LabeledImages d = make_synthetic_dataset({1, 8, 8}, 4, 64, 5);
  ASSERT_EQ(d.size(), 64u);
  for (std::size_t i = 0; i < d.size(); ++i) {
    EXPECT_GE(d.labels[i], 1u);
    EXPECT_LE(d.labels[i], 4u);
    for (const double v : d.images[i].values()) {
      EXPECT_GE(v, -1.0);
      EXPECT_LE(v, 1.0);
    }
  }
  const LabeledImages again = make_synthetic_dataset({1, 8, 8}, 4, 64, 5);
  EXPECT_EQ(again.images, d.images);
  EXPECT_EQ(again.labels, d.labels);
  for (std::size_t c = 1; c <= 4; ++c) EXPECT_FALSE(images_of_class(d, c).empty());
}
