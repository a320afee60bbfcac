#pragma once

// Independent checks of the population-minimizer and target-complexity
// statements: a linear-Gaussian toy where E[eps | x_t] has a closed form, a
// discrete toy small enough to enumerate, and direct evaluation of the
// coarse/detail decomposition of a regression target.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "multistroke/diffusion.hpp"
#include "multistroke/stroke_ops.hpp"

namespace ms {

/// One line of a machine-readable report.
struct CheckResult {
  std::string name;
  double statistic = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string detail;
};

void write_check_csv(std::ostream& os, const std::vector<CheckResult>& results);
void write_check_text(std::ostream& os, const std::vector<CheckResult>& results);

/// Independent per-pixel prior x0 ~ N(mu0, var0).
struct GaussianToyData {
  ImageTensor mu0;
  double var0 = 1.0;
};

/// Slope of E[eps | x_t] in (x_t - sqrt(abar) mu0):
/// sqrt(1 - abar) / (abar var0 + 1 - abar).
double gaussian_posterior_coefficient(double alpha_bar, double var0);

ImageTensor gaussian_eps_posterior_mean(const ImageTensor& x_t, std::size_t t,
                                        const GaussianToyData& toy, const NoiseSchedule& sched);

struct RegressionSlope {
  double slope = 0.0;
  double std_error = 0.0;
};

/// Pooled per-pixel OLS slope of eps on x_t from `samples` forward draws.
RegressionSlope mc_regression_slope(const GaussianToyData& toy, std::size_t t,
                                    const NoiseSchedule& sched, std::size_t samples,
                                    std::uint64_t seed);

struct PopulationMinimizerReport {
  // Affine predictors eps ~ W z + c with z = A(x_t); W is d x d, c has d entries.
  std::vector<double> ddpm_coefficients;  // row-major [W | c]
  std::vector<double> ms_coefficients;
  std::vector<double> analytic_coefficients;
  std::vector<double> std_errors;          // OLS standard errors of ddpm_coefficients
  double max_ms_vs_ddpm_se = 0.0;          // max |ms - ddpm| / se
  double max_ddpm_vs_analytic_se = 0.0;    // max |ddpm - analytic| / se
  bool pass = false;
};

/// Fits the best affine predictor of eps from A_w(x_t) under the plain
/// squared loss and under the stroke-space loss ||A_w(f - eps)||^2 (the
/// latter through its own Kronecker-weighted normal equations), and compares
/// both with the analytic posterior mean W = coef A_w^{-1}.
PopulationMinimizerReport check_population_minimizer(const GaussianToyData& toy, std::size_t t,
                                                     double w, const StrokeOperator& op,
                                                     const NoiseSchedule& sched,
                                                     std::size_t samples, std::uint64_t seed);

/// Finite joint distribution of (x0, eps) on a tiny image.
struct DiscreteToyDistribution {
  Shape shape{1, 2, 2};
  std::vector<ImageTensor> x0_support;
  std::vector<double> x0_prob;
  std::vector<double> eps_nodes;  // per-pixel grid, pixels independent
  std::vector<double> eps_prob;

  std::size_t joint_size() const;
};

/// 4 support points for x0 and an 8-point Gaussian-weighted eps grid.
DiscreteToyDistribution default_discrete_toy();

struct DiscreteMinimizerReport {
  std::size_t cells = 0;
  double max_minimizer_gap = 0.0;     // brute-force minimizer vs conditional mean
  double pythagoras_gap = 0.0;        // |risk(g) - risk(f*) - excess(g)| / risk(g)
  double risk_conditional_mean = 0.0;
  bool pass = false;
};

/// Enumerates the joint support, partitions x_t into cells of width
/// `cell_width`, and checks per cell that the minimizer of
/// sum p ||A_w(f - eps)||^2 equals the conditional mean of eps, plus the L^2
/// projection identity for a perturbed predictor.
DiscreteMinimizerReport check_discrete_minimizer(const DiscreteToyDistribution& toy, double alpha_bar,
                                                 double w, const StrokeOperator& op,
                                                 double cell_width = 0.25);

struct TargetDecompositionReport {
  double projector_form_error = 0.0;  // max |mix(f) - (Q_c f + (1-w) Q_d f)|
  double complexity_error = 0.0;      // |C(mix f) - closed form| / max(1, C(f))
  double complexity_before = 0.0;
  double complexity_after = 0.0;
  bool strict_decrease = false;
  bool pass = false;
};

TargetDecompositionReport check_target_decomposition(const ImageTensor& f, double w,
                                                     const StrokeOperator& op, double s);

}  // namespace ms
