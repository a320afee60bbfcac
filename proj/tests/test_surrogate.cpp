#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "multistroke/surrogate.hpp"
#include "support/reference.hpp"

using namespace ms;

namespace {

SurrogateInputs chain(std::size_t L, double rho, double kappa, double w, double sigma, std::uint64_t seed,
                      std::size_t samples = 20000) {
  SurrogateInputs in;
  in.rho.assign(L, rho);
  in.kappa.assign(L, kappa);
  in.bias_detail_energy.assign(L, 0.0);
  in.sigma.assign(L, sigma);
  in.weights.assign(L + 1, w);
  in.samples = samples;
  in.seed = seed;
  return in;
}

}  // namespace

TEST(SpectralNorm, DiagonalAndRandom) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(3, 3);
  d.diagonal() << 0.5, -2.0, 1.5;
  EXPECT_NEAR(spectral_norm(d), 2.0, 1e-8);
  Eigen::MatrixXd m(4, 3);
  m << 1, 2, 0, -1, 0.5, 3, 2, 2, 2, 0, 1, -1;
  const double svd = Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues()(0);
  EXPECT_NEAR(spectral_norm(m), svd, 1e-8 * svd);
}

TEST(Projectors, DenseMatricesMatchBlockAverage) {
  const Shape shape{1, 4, 4};
  const StrokeOperator op(2);
  const Eigen::MatrixXd Qc = coarse_projector_matrix(shape, op);
  const ImageTensor x = ref::random_tensor(shape, 2);
  const Eigen::VectorXd y = Qc * Eigen::Map<const Eigen::VectorXd>(x.values().data(), 16);
  const ImageTensor want = ref::block_average(x, 2);
  for (std::size_t i = 0; i < 16; ++i) EXPECT_NEAR(y(static_cast<Eigen::Index>(i)), want[i], 1e-14);
  EXPECT_LT((Qc * Qc - Qc).norm(), 1e-14);
  EXPECT_LT((Qc - Qc.transpose()).norm(), 1e-14);
  EXPECT_NEAR(Qc.trace(), 4.0, 1e-14);
}

TEST(Build, BlocksHaveDeclaredNorms) {
  const auto spec = build_surrogate(chain(3, 0.7, 0.4, 0.5, 0.1, 3));
  EXPECT_EQ(spec.d_coarse, 4u);
  EXPECT_EQ(spec.d_detail, 12u);
  const Eigen::MatrixXd Qc = coarse_projector_matrix(spec.shape, spec.op);
  const Eigen::MatrixXd Qd = Eigen::MatrixXd::Identity(16, 16) - Qc;
  for (const auto& st : spec.steps) {
    EXPECT_NEAR(Eigen::JacobiSVD<Eigen::MatrixXd>(Qd * st.M * Qd).singularValues()(0), 0.7, 1e-8);
    EXPECT_NEAR(Eigen::JacobiSVD<Eigen::MatrixXd>(Qd * st.M * Qc).singularValues()(0), 0.4, 1e-8);
    EXPECT_NEAR(st.certified_rho, 0.7, 1e-8);
  }
}

TEST(Build, ZeroKappaAndUnitRho) {
  const auto spec = build_surrogate(chain(2, 1.0, 0.0, 0.5, 0.1, 4));
  const Eigen::MatrixXd Qc = coarse_projector_matrix(spec.shape, spec.op);
  const Eigen::MatrixXd Qd = Eigen::MatrixXd::Identity(16, 16) - Qc;
  for (const auto& st : spec.steps) {
    EXPECT_LT((Qd * st.M * Qc).norm(), 1e-14);
    EXPECT_GE(st.certified_rho, 1 - 1e-8);
    EXPECT_LE(st.certified_rho, 1 + 1e-8);
    EXPECT_EQ(st.bias_detail_energy, 0.0);
    EXPECT_LT((Qd * st.bias).norm(), 1e-14);
  }
}

TEST(Build, RejectsInconsistentTables) {
  auto in = chain(3, 0.5, 0.0, 0.5, 0.1, 1);
  in.sigma.pop_back();
  EXPECT_THROW(build_surrogate(in), std::invalid_argument);
  in = chain(3, 0.5, 0.0, 0.5, 0.1, 1);
  in.weights[1] = 1.0;
  EXPECT_THROW(build_surrogate(in), std::invalid_argument);
  in = chain(3, -0.5, 0.0, 0.5, 0.1, 1);
  EXPECT_THROW(build_surrogate(in), std::invalid_argument);
}

TEST(Simulate, CollapsesWithoutNoiseOrDetailMap) {
  const auto spec = build_surrogate(chain(3, 0.0, 0.0, 0.3, 0.0, 5, 2000));
  const auto tr = simulate(spec);
  EXPECT_GT(tr.E(3), 1.0);
  for (std::size_t t = 0; t < 3; ++t) EXPECT_LT(tr.E(t), 1e-20);
}

TEST(Simulate, CleanScalarRecursion) {
  auto in = chain(1, 0.5, 0.0, 0.5, 0.1, 6, 100000);
  in.weights = {0.3, 0.5};
  in.detail_block = DetailBlockKind::kScaledIdentity;
  const auto spec = build_surrogate(in);
  const auto tr = simulate(spec);
  const double predicted = 0.25 * 0.25 * tr.E(1) + 0.01 * 0.49 * 12.0;
  EXPECT_NEAR(tr.E(0), predicted, 0.01 * predicted);
  EXPECT_NEAR(tr.E(1), 12.0 * 0.25, 0.02 * 3.0);
  EXPECT_NEAR(tr.noise_detail[1].mean, 12.0, 0.12);
  // The factor-3 bound holds with visible room.
  const auto rows = check_bound(tr, spec);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_TRUE(rows[0].holds);
  EXPECT_GT(rows[0].bound, rows[0].energy);
}

TEST(Bound, LargeKappaDominates) {
  const auto spec = build_surrogate(chain(3, 0.0, 2.0, 0.5, 0.1, 7));
  const auto tr = simulate(spec);
  for (const auto& r : check_bound(tr, spec)) {
    EXPECT_TRUE(r.holds) << "t=" << r.t;
    const double kappa_term = 3 * 4.0 * tr.C2(r.t);  // 3 kappa^2 C with kappa = 2
    EXPECT_GT(kappa_term, 0.5 * r.bound);
  }
}

TEST(Bound, HoldsWithoutStrokes) {
  const auto spec = build_surrogate(chain(4, 0.9, 0.5, 0.0, 0.1, 8));
  for (const auto& r : check_bound(simulate(spec), spec)) EXPECT_TRUE(r.holds) << "t=" << r.t;
}

TEST(Iterated, ContractionAndPreconditions) {
  const auto spec = build_surrogate(chain(10, 0.5, 0.0, 0.5, 0.0, 9));
  const auto tr = simulate(spec);
  const auto rep = iterated_bound(tr, spec, 10, 0);
  EXPECT_DOUBLE_EQ(rep.q, 0.0625);
  EXPECT_TRUE(rep.holds);
  EXPECT_LT(rep.exit, 1e-10);

  // single step block is the clean per-step bound
  const auto one = iterated_bound(tr, spec, 4, 3);
  EXPECT_NEAR(one.bound, 0.0625 * tr.E(4), 1e-15);

  const auto base = build_surrogate(chain(2, 0.5, 0.0, 0.0, 0.0, 10, 1000));
  const auto btr = simulate(base);
  EXPECT_THROW(iterated_bound(btr, base, 2, 0), std::invalid_argument);
  EXPECT_NO_THROW(iterated_bound(btr, base, 2, 0, true));
  const auto kap = build_surrogate(chain(2, 0.5, 0.3, 0.5, 0.0, 11, 1000));
  EXPECT_THROW(iterated_bound(simulate(kap), kap, 2, 0), std::invalid_argument);
}

TEST(Simulate, SeedDeterminism) {
  const auto spec = build_surrogate(chain(2, 0.5, 0.2, 0.4, 0.1, 12, 3000));
  const auto a = simulate(spec), b = simulate(spec);
  for (std::size_t t = 0; t <= 2; ++t) {
    EXPECT_EQ(a.E(t), b.E(t));
    EXPECT_EQ(a.C2(t), b.C2(t));
  }
}

TEST(EnergyCsv, RowsPerState) {
  const auto spec = build_surrogate(chain(3, 0.5, 0.0, 0.5, 0.1, 13, 1000));
  const auto tr = simulate(spec);
  std::ostringstream os;
  write_energy_csv(os, tr, check_bound(tr, spec));
  const std::string s = os.str();
  EXPECT_EQ(s.substr(0, s.find('\n')), "step,E,C2,N,bound,margin");
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 5);
}
