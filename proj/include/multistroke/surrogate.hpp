#pragma once

// Affine surrogate of the stroke-controlled reverse chain,
//
//   x_{t-1} = M_t A_{w_t}(x_t) + b_t + sigma_t A_{w_{t-1}}(eta_t),
//
// with M_t assembled from coarse/detail blocks of declared operator norm
// (rho_t for detail->detail, kappa_t for coarse->detail). Monte Carlo
// trajectories estimate the detail and coarse energies so the per-step and
// iterated detail-energy bounds can be checked against them.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "multistroke/mc.hpp"
#include "multistroke/stroke_ops.hpp"

namespace ms {

enum class DetailBlockKind {
  kRandomOrthogonal,  // rho * (random orthogonal map on the detail subspace)
  kScaledIdentity     // rho * Q_d
};

/// Everything needed to build a chain of length L. Per-step tables are
/// indexed by t - 1 for t = 1..L; `weights` holds w_0..w_L.
struct SurrogateInputs {
  Shape shape{1, 4, 4};
  std::size_t k = 2;
  std::vector<double> rho;
  std::vector<double> kappa;
  std::vector<double> bias_detail_energy;  // B_t
  std::vector<double> sigma;
  std::vector<double> weights;
  double coarse_gain = 1.0;
  double bias_coarse_norm = 0.0;
  DetailBlockKind detail_block = DetailBlockKind::kRandomOrthogonal;
  std::size_t samples = 100000;
  std::uint64_t seed = 0;

  std::size_t length() const noexcept { return rho.size(); }
};

struct SurrogateStep {
  Eigen::MatrixXd M;
  Eigen::VectorXd bias;
  double rho = 0.0;
  double kappa = 0.0;
  double bias_detail_energy = 0.0;
  double sigma = 0.0;
  double certified_rho = 0.0;    // power-iteration estimate of ||Q_d M Q_d||
  double certified_kappa = 0.0;  // power-iteration estimate of ||Q_d M Q_c||
};

struct SurrogateChainSpec {
  Shape shape{};
  StrokeOperator op{1};
  std::size_t d_coarse = 0;
  std::size_t d_detail = 0;
  std::vector<SurrogateStep> steps;  // steps[t - 1]
  std::vector<double> weights;       // w_0..w_L
  std::size_t samples = 0;
  std::uint64_t seed = 0;

  std::size_t length() const noexcept { return steps.size(); }
  const SurrogateStep& step(std::size_t t) const { return steps.at(t - 1); }
};

/// Largest singular value by power iteration on M^T M. Throws
/// std::runtime_error if the relative change does not drop below `rel_tol`
/// within `max_iter` iterations.
double spectral_norm(const Eigen::MatrixXd& M, double rel_tol = 1e-8, std::size_t max_iter = 10000,
                     std::uint64_t seed = 1);

/// Dense matrices of Q_c = S_k and Q_d = I - S_k for a shape.
Eigen::MatrixXd coarse_projector_matrix(const Shape& shape, const StrokeOperator& op);

SurrogateChainSpec build_surrogate(const SurrogateInputs& in);

struct EnergyTrace {
  // Indexed by state t = 0..L.
  std::vector<Moments> detail;       // ||Q_d x_t||^2
  std::vector<Moments> coarse;       // ||Q_c x_t||^2
  std::vector<Moments> noise_detail; // ||Q_d eta_t||^2 for the noise drawn at step t (t >= 1)
  std::size_t d_detail = 0;

  double E(std::size_t t) const { return detail.at(t).mean; }
  double C2(std::size_t t) const { return coarse.at(t).mean; }
};

/// Runs spec.samples trajectories from x_L = A_{w_L}(z), z ~ N(0, I).
EnergyTrace simulate(const SurrogateChainSpec& spec);

/// Absolute cushion for exact-zero cases (sigma = 0, rho = 0) where the
/// simulated energy is pure floating-point residue of the basis change.
inline constexpr double kRoundoffFloor = 1e-12;

struct BoundRow {
  std::size_t t = 0;      // source step; the bound is on E_{t-1}
  double energy = 0.0;    // empirical E_{t-1}
  double bound = 0.0;     // 3k^2 C_t + 3r^2(1-w_t)^2 E_t + 3B_t + s^2(1-w_{t-1})^2 N
  double clean = 0.0;     // r^2(1-w_t)^2 E_t + s^2(1-w_{t-1})^2 N
  double slack = 0.0;     // 3-standard-error cushion
  double margin = 0.0;    // bound + slack - energy
  bool holds = false;
};

std::vector<BoundRow> check_bound(const EnergyTrace& trace, const SurrogateChainSpec& spec);

struct IteratedReport {
  std::size_t t_in = 0;
  std::size_t t_out = 0;
  double rho = 0.0;
  double w_min = 0.0;
  double q = 0.0;
  double entry = 0.0;
  double exit = 0.0;
  double bound = 0.0;
  double slack = 0.0;
  bool holds = false;
};

/// Geometric contraction over steps t_in -> t_out (t_in > t_out). Requires
/// kappa = 0, B = 0, rho < 1 and w >= w_min > 0 on the block; w_min = 0 is
/// accepted only when `allow_zero_wmin` declares the baseline case.
IteratedReport iterated_bound(const EnergyTrace& trace, const SurrogateChainSpec& spec,
                              std::size_t t_in, std::size_t t_out, bool allow_zero_wmin = false);

/// step,E,C2,N,bound,margin; one row per state index t = L..0.
void write_energy_csv(std::ostream& os, const EnergyTrace& trace,
                      const std::vector<BoundRow>& rows);

}  // namespace ms
