#include <gtest/gtest.h>

#include <cmath>

#include "multistroke/mc.hpp"
#include "multistroke/sampler.hpp"
#include "support/reference.hpp"

using namespace ms;

namespace {

class ZeroPredictor final : public NoisePredictor {
 public:
  ImageTensor predict(const ImageTensor& x, std::size_t, std::size_t) const override {
    return ImageTensor(x.shape());
  }
};

// eps_hat = c_t x + small label-dependent offset.
class AffinePredictor final : public NoisePredictor {
 public:
  ImageTensor predict(const ImageTensor& x, std::size_t t, std::size_t label) const override {
    ImageTensor out = (0.1 + 0.003 * static_cast<double>(t)) * x;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += 0.02 * static_cast<double>(label) * std::cos(static_cast<double>(i));
    return out;
  }
};

SamplePlan plan_of(std::vector<std::size_t> ts, SampleMode mode,
                   VarianceConvention v = VarianceConvention::kFixedLarge) {
  return SamplePlan{std::move(ts), v, mode, 0};
}

}  // namespace

TEST(Subsample, FullChain) {
  const auto s = subsample_schedule(20, 20);
  ASSERT_EQ(s.size(), 21u);
  for (std::size_t i = 0; i <= 20; ++i) EXPECT_EQ(s[i], 20 - i);
}

TEST(Subsample, TenOfFiveHundred) {
  const auto s = subsample_schedule(500, 10);
  ASSERT_EQ(s.size(), 11u);
  EXPECT_EQ(s.front(), 500u);
  EXPECT_EQ(s.back(), 0u);
  for (std::size_t i = 1; i < s.size(); ++i) {
    const long gap = static_cast<long>(s[i - 1]) - static_cast<long>(s[i]);
    EXPECT_GE(gap, 49);
    EXPECT_LE(gap, 51);
  }
}

TEST(Subsample, SingleJumpAndProperty) {
  EXPECT_EQ(subsample_schedule(37, 1), (std::vector<std::size_t>{37, 0}));
  EXPECT_THROW(subsample_schedule(10, 0), std::invalid_argument);
  EXPECT_THROW(subsample_schedule(10, 11), std::invalid_argument);
  for (std::size_t T : {1u, 7u, 100u, 499u})
    for (std::size_t N = 1; N <= T; N += (T > 20 ? 13 : 1)) {
      const auto s = subsample_schedule(T, N);
      ASSERT_EQ(s.size(), N + 1) << T << ' ' << N;
      const double ideal = static_cast<double>(T) / static_cast<double>(N);
      for (std::size_t i = 1; i < s.size(); ++i) {
        ASSERT_LT(s[i], s[i - 1]);
        ASSERT_LE(std::abs(static_cast<double>(s[i - 1] - s[i]) - ideal), 1.0);
      }
      EXPECT_NO_THROW(SamplePlan{s}.validate(T));
    }
}

TEST(Plan, Validation) {
  EXPECT_THROW(plan_of({5}, SampleMode::kDdpm).validate(10), std::invalid_argument);
  EXPECT_THROW(plan_of({11, 0}, SampleMode::kDdpm).validate(10), std::invalid_argument);
  EXPECT_THROW(plan_of({5, 1}, SampleMode::kDdpm).validate(10), std::invalid_argument);
  EXPECT_THROW(plan_of({5, 5, 0}, SampleMode::kDdpm).validate(10), std::invalid_argument);
  const NoiseSchedule s = linear_beta_schedule(10, 1e-3, 0.1);
  Rng rng(1);
  EXPECT_THROW(sample_ddpm(ZeroPredictor{}, s, plan_of({10, 0}, SampleMode::kMultiStroke), {1, 2, 2}, 1, rng),
               std::invalid_argument);
}

TEST(Ddpm, SingleStepClosedForm) {
  const NoiseSchedule s = linear_beta_schedule(50, 1e-3, 0.05);
  Rng rng(3), copy(3);
  const ImageTensor out = sample_ddpm(ZeroPredictor{}, s, plan_of({50, 0}, SampleMode::kDdpm), {1, 4, 4}, 1, rng);
  const ImageTensor xT = copy.normal_tensor({1, 4, 4});
  EXPECT_LT(max_abs_diff(out, (1.0 / std::sqrt(s.alpha_bar(50))) * xT), 1e-13);
}

TEST(Ddpm, MatchesHandRolloutWithNoiselessFinalStep) {
  const NoiseSchedule s = linear_beta_schedule(30, 1e-3, 0.05);
  const AffinePredictor model;
  const std::vector<std::size_t> ts{30, 21, 9, 0};
  for (const auto conv : {VarianceConvention::kFixedLarge, VarianceConvention::kFixedSmall}) {
    Rng rng(4), copy(4);
    const ImageTensor got = sample_ddpm(model, s, plan_of(ts, SampleMode::kDdpm, conv), {1, 4, 4}, 2, rng);
    ImageTensor x = copy.normal_tensor({1, 4, 4});
    for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
      const std::size_t t = ts[i], d = ts[i + 1];
      const double a = s.alpha_bar(t) / s.alpha_bar(d);
      const ImageTensor e = model.predict(x, t, 2);
      ImageTensor mean(x.shape());
      for (std::size_t j = 0; j < x.size(); ++j) mean[j] = (x[j] - (1 - a) / std::sqrt(1 - s.alpha_bar(t)) * e[j]) / std::sqrt(a);
      double var = 1 - a;
      if (conv == VarianceConvention::kFixedSmall) var *= (1 - s.alpha_bar(d)) / (1 - s.alpha_bar(t));
      if (d == 0) {
        x = mean;
      } else {
        const ImageTensor eta = copy.normal_tensor(x.shape());
        for (std::size_t j = 0; j < x.size(); ++j) x[j] = mean[j] + std::sqrt(var) * eta[j];
      }
    }
    EXPECT_LT(max_abs_diff(got, x), 1e-12);
  }
}

TEST(Ddpm, DeterministicForSeed) {
  const NoiseSchedule s = linear_beta_schedule(40, 1e-3, 0.05);
  const auto plan = plan_of(subsample_schedule(40, 40), SampleMode::kDdpm);
  Rng a(8), b(8);
  EXPECT_EQ(sample_ddpm(AffinePredictor{}, s, plan, {1, 4, 4}, 1, a), sample_ddpm(AffinePredictor{}, s, plan, {1, 4, 4}, 1, b));
}

TEST(MultiStroke, ZeroRoughnessIsBitwiseDdpm) {
  const NoiseSchedule s = linear_beta_schedule(60, 1e-3, 0.05);
  const RoughnessSchedule flat(60, 0.75, 0.0);
  for (const std::size_t n : {60u, 7u}) {
    auto plan = plan_of(subsample_schedule(60, n), SampleMode::kDdpm);
    Rng a(9), b(9);
    const ImageTensor d = sample(AffinePredictor{}, s, flat, StrokeOperator(2), plan, {2, 4, 4}, 1, a);
    plan.mode = SampleMode::kMultiStroke;
    const ImageTensor m = sample(AffinePredictor{}, s, flat, StrokeOperator(2), plan, {2, 4, 4}, 1, b);
    EXPECT_EQ(d, m) << "N=" << n;
  }
}

TEST(MultiStroke, MatchesHandRollout) {
  const NoiseSchedule s = linear_beta_schedule(40, 1e-3, 0.05);
  const RoughnessSchedule rough(40, 0.75, 0.5);
  const AffinePredictor model;
  const std::vector<std::size_t> ts{40, 33, 20, 8, 0};
  Rng rng(10), copy(10);
  const ImageTensor got = sample_multistroke(model, s, rough, StrokeOperator(2), plan_of(ts, SampleMode::kMultiStroke),
                                             {1, 4, 4}, 3, rng);
  ImageTensor x = ref::mix(copy.normal_tensor({1, 4, 4}), rough.weight(40), 2);
  for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
    const std::size_t t = ts[i], d = ts[i + 1];
    const ImageTensor xm = ref::mix(x, rough.weight(t), 2);
    const ImageTensor e = model.predict(xm, t, 3);
    const double a = s.alpha_bar(t) / s.alpha_bar(d);
    ImageTensor mean(x.shape());
    for (std::size_t j = 0; j < x.size(); ++j) mean[j] = (xm[j] - (1 - a) / std::sqrt(1 - s.alpha_bar(t)) * e[j]) / std::sqrt(a);
    if (d == 0) {
      x = mean;
    } else {
      const ImageTensor eta = ref::mix(copy.normal_tensor(x.shape()), rough.weight(d), 2);
      for (std::size_t j = 0; j < x.size(); ++j) x[j] = mean[j] + std::sqrt(1 - a) * eta[j];
    }
  }
  EXPECT_LT(max_abs_diff(got, x), 1e-12);
}

TEST(MultiStroke, RejectsIndivisibleShape) {
  const NoiseSchedule s = linear_beta_schedule(10, 1e-3, 0.05);
  Rng rng(1);
  EXPECT_THROW(sample_multistroke(ZeroPredictor{}, s, RoughnessSchedule(10, 0.5, 0.5), StrokeOperator(2),
                                  plan_of({10, 0}, SampleMode::kMultiStroke), {1, 3, 4}, 1, rng),
               DimensionError);
}

TEST(MultiStroke, InjectedNoiseDetailVariance) {
  // T = 10, f = 1, w_max = 0.625: w_10 = 0.625, w_8 = 0.5.
  const NoiseSchedule s = linear_beta_schedule(10, 1e-3, 0.05);
  const RoughnessSchedule rough(10, 1.0, 0.625);
  ASSERT_DOUBLE_EQ(rough.weight(8), 0.5);
  const StrokeOperator op(2);
  const Shape shape{1, 4, 4};
  const double a_t = s.alpha_bar(10) / s.alpha_bar(8), a_s = s.alpha_bar(8);
  const auto plan = plan_of({10, 8, 0}, SampleMode::kMultiStroke);
  struct Acc {
    Moments detail, coarse;
    double coarse_gap = 0;
    void merge(const Acc& o) {
      detail.merge(o.detail);
      coarse.merge(o.coarse);
      coarse_gap = std::max(coarse_gap, o.coarse_gap);
    }
  };
  const Acc acc = monte_carlo(100000, 21, Acc{}, [&](Rng& rng, Acc& out) {
    Rng copy = rng;
    const ImageTensor x0 = sample_multistroke(ZeroPredictor{}, s, rough, op, plan, shape, 1, rng);
    // Undo the noiseless last step, then the deterministic part of the first.
    const ImageTensor x8 = mix_inverse(std::sqrt(a_s) * x0, 0.5, op);
    const ImageTensor start = ref::mix(copy.normal_tensor(shape), 0.625, 2);
    const ImageTensor mean = (1.0 / std::sqrt(a_t)) * ref::mix(start, 0.625, 2);
    const ImageTensor eta_mixed = (1.0 / std::sqrt(1 - a_t)) * (x8 - mean);
    const ImageTensor eta = copy.normal_tensor(shape);
    out.detail.add(squared_norm(detail_project(eta_mixed, op)));
    out.coarse.add(squared_norm(coarse_project(eta_mixed, op)));
    out.coarse_gap = std::max(out.coarse_gap, max_abs_diff(coarse_project(eta_mixed, op), coarse_project(eta, op)));
  });
  // unmixed detail energy is d_detail = 12
  EXPECT_NEAR(acc.detail.mean / 12.0, 0.25, 0.25 * 0.02);
  EXPECT_NEAR(acc.coarse.mean, 4.0, 4.0 * 0.02);
  EXPECT_LT(acc.coarse_gap, 1e-9);
}

TEST(MultiStroke, StateMixingPreservesCoarse) {
  const StrokeOperator op(2);
  const ImageTensor x = ref::random_tensor({3, 8, 8}, 5);
  for (const double w : {0.1, 0.5, 0.9})
    EXPECT_LT(max_abs_diff(coarse_project(mix(x, w, op), op), coarse_project(x, op)), 1e-14);
}
