#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "multistroke/stroke_ops.hpp"
#include "support/reference.hpp"

using namespace ms;

namespace {

constexpr double kPi = std::numbers::pi;

struct AlgebraCase {
  Shape shape;
  std::size_t k;
};

class StrokeAlgebra : public ::testing::TestWithParam<AlgebraCase> {};

}  // namespace

TEST(StrokeOps, BlockAverageSmallExample) {
  const ImageTensor x({1, 2, 2}, {1, 3, 5, 7});
  const StrokeOperator op(2);
  EXPECT_EQ(apply_stroke(x, op), ImageTensor({1, 2, 2}, 4.0));
  EXPECT_EQ(detail_project(x, op), ImageTensor({1, 2, 2}, {-3, -1, 1, 3}));
}

TEST(StrokeOps, KOneIsIdentity) {
  const ImageTensor x = ref::random_tensor({2, 5, 3}, 1);
  EXPECT_EQ(apply_stroke(x, StrokeOperator(1)), x);
}

TEST(StrokeOps, MatchesNaiveBlockMean) {
  for (const std::size_t k : {1u, 2u, 4u, 8u}) {
    const ImageTensor x = ref::random_tensor({3, 16, 8}, 10 + k);
    EXPECT_LT(max_abs_diff(apply_stroke(x, StrokeOperator(k)), ref::block_average(x, k)), 1e-14) << "k=" << k;
  }
}

TEST(StrokeOps, RejectsBadSizes) {
  EXPECT_THROW(StrokeOperator(0), std::invalid_argument);
  const StrokeOperator op(3);
  try {
    (void)apply_stroke(ImageTensor({1, 6, 4}), op);
    FAIL() << "expected DimensionError";
  } catch (const DimensionError& e) {
    EXPECT_NE(std::string(e.what()).find("width"), std::string::npos);
  }
  try {
    (void)apply_stroke(ImageTensor({1, 4, 6}), op);
    FAIL() << "expected DimensionError";
  } catch (const DimensionError& e) {
    EXPECT_NE(std::string(e.what()).find("height"), std::string::npos);
  }
  EXPECT_THROW((void)mix(ImageTensor({1, 2, 2}), 1.0, StrokeOperator(2)), std::invalid_argument);
  EXPECT_THROW((void)mix(ImageTensor({1, 2, 2}), -0.1, StrokeOperator(2)), std::invalid_argument);
}

TEST(StrokeOps, NonExpansiveOnEveryDraw) {
  const StrokeOperator op(2);
  for (std::uint64_t i = 0; i < 10000; ++i) {
    const ImageTensor x = ref::random_tensor({1, 4, 4}, 1000 + i);
    ASSERT_LE(squared_norm(apply_stroke(x, op)), squared_norm(x) * (1 + 1e-15)) << "draw " << i;
  }
}

TEST(StrokeOps, BlockConstantHasNoDetail) {
  const StrokeOperator op(2);
  const ImageTensor x = apply_stroke(ref::random_tensor({2, 8, 8}, 3), op);
  EXPECT_LT(std::sqrt(squared_norm(detail_project(x, op))), 1e-14);
  for (const double w : {0.0, 0.3, 0.9}) EXPECT_LT(max_abs_diff(mix(x, w, op), x), 1e-14);
}

TEST(StrokeOps, CoarseDetailOrthogonalK4) {
  const StrokeOperator op(4);
  const ImageTensor x = ref::random_tensor({1, 8, 8}, 4);
  EXPECT_LT(std::abs(ref::inner(coarse_project(x, op), detail_project(x, op))), 1e-12);
}

TEST(StrokeOps, MixZeroIsIdentityAndEnergyIdentity) {
  const StrokeOperator op(2);
  const ImageTensor x = ref::random_tensor({1, 8, 8}, 5);
  EXPECT_EQ(mix(x, 0.0, op), x);
  const double lhs = squared_norm(mix(x, 0.5, op));
  const double rhs = ref::norm2(ref::block_average(x, 2)) + 0.25 * ref::norm2(x - ref::block_average(x, 2));
  EXPECT_NEAR(lhs, rhs, 1e-12 * rhs);
}

TEST(StrokeOps, MixMatchesReferenceAndInverse) {
  const StrokeOperator op(4);
  const ImageTensor x = ref::random_tensor({3, 16, 16}, 6);
  for (const double w : {0.0, 0.25, 0.5, 0.95}) {
    EXPECT_LT(max_abs_diff(mix(x, w, op), ref::mix(x, w, 4)), 1e-14);
    EXPECT_LT(max_abs_diff(mix_inverse(mix(x, w, op), w, op), x), 1e-12);
  }
}

TEST(StrokeOps, DimensionsOfSubspaces) {
  const StrokeOperator op(2);
  EXPECT_EQ(op.coarse_dim({1, 4, 4}), 4u);
  EXPECT_EQ(op.detail_dim({1, 4, 4}), 12u);
  EXPECT_EQ(StrokeOperator(4).coarse_dim({3, 16, 16}), 48u);
}

TEST_P(StrokeAlgebra, ProjectorIdentities) {
  const auto [shape, k] = GetParam();
  const StrokeOperator op(k);
  for (std::uint64_t trial = 0; trial < 25; ++trial) {
    const ImageTensor x = ref::random_tensor(shape, 100 * k + trial);
    const ImageTensor y = ref::random_tensor(shape, 7000 + 100 * k + trial);
    const ImageTensor sx = apply_stroke(x, op);
    const ImageTensor dx = detail_project(x, op);
    const double scale = squared_norm(x);
    // idempotence
    EXPECT_LT(max_abs_diff(apply_stroke(sx, op), sx), 1e-12);
    EXPECT_LT(max_abs_diff(detail_project(dx, op), dx), 1e-12);
    EXPECT_LT(std::sqrt(squared_norm(coarse_project(dx, op))), 1e-12);
    // self-adjointness
    EXPECT_NEAR(ref::inner(sx, y), ref::inner(x, apply_stroke(y, op)), 1e-12 * std::sqrt(scale * squared_norm(y)));
    // Pythagoras and reconstruction
    EXPECT_NEAR(scale, squared_norm(sx) + squared_norm(dx), 1e-12 * scale);
    EXPECT_LT(max_abs_diff(sx + dx, x), 1e-12);
    EXPECT_LT(std::abs(ref::inner(sx, dx)), 1e-12 * scale);
    // A^T A = Q_c + (1 - w)^2 Q_d
    const double w = 0.1 + 0.8 * static_cast<double>(trial) / 25.0;
    const ImageTensor ata = mix(mix(x, w, op), w, op);
    const ImageTensor want = lincomb(1.0, sx, (1 - w) * (1 - w), dx);
    EXPECT_LT(max_abs_diff(ata, want), 1e-12);
    EXPECT_NEAR(squared_norm(mix(x, w, op)), squared_norm(sx) + (1 - w) * (1 - w) * squared_norm(dx), 1e-12 * scale);
  }
}

INSTANTIATE_TEST_SUITE_P(Shapes, StrokeAlgebra,
                         ::testing::Values(AlgebraCase{{1, 8, 8}, 2}, AlgebraCase{{1, 8, 8}, 4},
                                           AlgebraCase{{3, 16, 16}, 2}, AlgebraCase{{3, 16, 16}, 4}));

TEST(Roughness, ScheduleValues) {
  const RoughnessSchedule r(500, 0.75, 0.5);
  EXPECT_EQ(r.cut(), 125u);
  EXPECT_EQ(roughness_weight(125, r), 0.0);
  EXPECT_EQ(roughness_weight(0, r), 0.0);
  EXPECT_DOUBLE_EQ(roughness_weight(500, r), 0.5);
  EXPECT_NEAR(roughness_weight(313, r), 0.5 * 188.0 / 375.0, 1e-15);
  EXPECT_THROW((void)roughness_weight(501, r), std::out_of_range);
}

TEST(Roughness, MonotoneAndBounded) {
  for (const double f : {0.0, 0.3, 0.75, 1.0}) {
    const RoughnessSchedule r(97, f, 0.6);
    for (std::size_t t = 1; t <= 97; ++t) {
      EXPECT_GE(r.weight(t), r.weight(t - 1));
      EXPECT_LE(r.weight(t), 0.6);
    }
  }
  EXPECT_THROW(RoughnessSchedule(10, 1.5, 0.5), std::invalid_argument);
  EXPECT_THROW(RoughnessSchedule(10, 0.5, 1.0), std::invalid_argument);
}

TEST(Attenuation, ExamplesAndMeasurement) {
  EXPECT_EQ(attenuation_gamma(0.0, 3), 1.0);
  EXPECT_EQ(attenuation_gamma(2 * kPi, 2), 1.0);
  EXPECT_LT(attenuation_gamma(kPi, 2), 1e-15);
  // Measured on an explicit complex sinusoid grid (one axis carries the mode).
  const double measured = ref::measured_mode_ratio(kPi / 2, 0.0, 8, 8, 2);
  EXPECT_NEAR(measured, 0.7071068, 5e-8);
  EXPECT_NEAR(attenuation_gamma(kPi / 2, 2), measured, 1e-12);
}

TEST(Attenuation, MatchesMeasurementOnAllAlignedModes) {
  for (const std::size_t k : {2u, 4u})
    for (std::size_t m1 = 0; m1 < 8; ++m1)
      for (std::size_t m2 = 0; m2 < 8; ++m2) {
        const double w1 = 2 * kPi * static_cast<double>(m1) / 8.0;
        const double w2 = 2 * kPi * static_cast<double>(m2) / 8.0;
        const double g = attenuation_gamma(w1, k) * attenuation_gamma(w2, k);
        EXPECT_NEAR(ref::measured_mode_ratio(w1, w2, 8, 8, k), g, 1e-10) << k << ' ' << m1 << ' ' << m2;
        // energy through the mixing map
        for (const double w : {0.3, 0.5}) {
          const double r = ref::measured_mode_ratio(w1, w2, 8, 8, k, w);
          EXPECT_NEAR(r * r, mode_energy_ratio(g, w), 1e-10);
        }
      }
}

TEST(Attenuation, ZerosAtMultiplesOfBlockFrequency) {
  for (const std::size_t k : {2u, 3u, 4u})
    for (std::size_t m = 1; m < k; ++m) EXPECT_LT(attenuation_gamma(2 * kPi * static_cast<double>(m) / static_cast<double>(k), k), 1e-14);
}

TEST(Attenuation, BoundedProperty) {
  for (int i = 0; i <= 2000; ++i) {
    const double om = -10.0 + 20.0 * i / 2000.0;
    for (const std::size_t k : {1u, 2u, 5u}) {
      const double g = attenuation_gamma(om, k);
      ASSERT_GE(g, 0.0);
      ASSERT_LE(g, 1.0 + 1e-15);
    }
  }
}

TEST(ModeEnergy, Examples) {
  EXPECT_DOUBLE_EQ(mode_energy_ratio(1.0, 0.7), 1.0);
  EXPECT_DOUBLE_EQ(mode_energy_ratio(0.0, 0.5), 0.25);
  EXPECT_THROW((void)mode_energy_ratio(1.5, 0.5), std::invalid_argument);
}

TEST(Complexity, Examples) {
  const StrokeOperator op(2);
  const ImageTensor blocky = apply_stroke(ref::random_tensor({1, 4, 4}, 8), op);
  for (const double s : {0.0, 1.0, 2.5}) EXPECT_NEAR(multires_complexity(blocky, op, s), squared_norm(blocky), 1e-12);
  const ImageTensor detail = detail_project(ref::random_tensor({1, 4, 4}, 9), op);
  EXPECT_NEAR(multires_complexity(detail, op, 1.0), 4.0 * squared_norm(detail), 1e-12);
  EXPECT_THROW((void)multires_complexity(detail, op, -1.0), std::invalid_argument);

  const ImageTensor x = ref::random_tensor({1, 8, 8}, 10);
  const double after = multires_complexity(mix(x, 0.5, op), op, 1.0);
  const double want = ref::norm2(ref::block_average(x, 2)) + 4.0 * 0.25 * ref::norm2(x - ref::block_average(x, 2));
  EXPECT_NEAR(after, want, 1e-12 * want);
  EXPECT_LT(after, multires_complexity(x, op, 1.0));
}
