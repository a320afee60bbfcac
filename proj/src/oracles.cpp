#include "multistroke/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <stdexcept>

#include <Eigen/Dense>

#include "multistroke/mc.hpp"
#include "multistroke/surrogate.hpp"

namespace ms {

void write_check_csv(std::ostream& os, const std::vector<CheckResult>& results) {
  os << "check,statistic,tolerance,result\n";
  os.precision(10);
  for (const auto& r : results)
    os << r.name << ',' << r.statistic << ',' << r.tolerance << ',' << (r.pass ? "pass" : "fail")
       << '\n';
}

void write_check_text(std::ostream& os, const std::vector<CheckResult>& results) {
  for (const auto& r : results) {
    os << (r.pass ? "[PASS] " : "[FAIL] ") << r.name << "  stat=" << r.statistic
       << "  tol=" << r.tolerance;
    if (!r.detail.empty()) os << "  (" << r.detail << ')';
    os << '\n';
  }
}

double gaussian_posterior_coefficient(double alpha_bar, double var0) {
  return std::sqrt(1.0 - alpha_bar) / (alpha_bar * var0 + (1.0 - alpha_bar));
}

ImageTensor gaussian_eps_posterior_mean(const ImageTensor& x_t, std::size_t t,
                                        const GaussianToyData& toy, const NoiseSchedule& sched) {
  sched.check_step(t);
  require_same_shape(x_t, toy.mu0, "gaussian_eps_posterior_mean");
  const double ab = sched.alpha_bar(t);
  const double coef = gaussian_posterior_coefficient(ab, toy.var0);
  return lincomb(coef, x_t, -coef * std::sqrt(ab), toy.mu0);
}

namespace {

struct SlopeAcc {
  double suu = 0.0, sue = 0.0, see = 0.0;
  std::uint64_t n = 0;
  void merge(const SlopeAcc& o) {
    suu += o.suu;
    sue += o.sue;
    see += o.see;
    n += o.n;
  }
};

}  // namespace

RegressionSlope mc_regression_slope(const GaussianToyData& toy, std::size_t t,
                                    const NoiseSchedule& sched, std::size_t samples,
                                    std::uint64_t seed) {
  sched.check_step(t);
  if (!(toy.var0 > 0.0)) throw std::invalid_argument("Gaussian toy: var0 must be positive");
  const double ab = sched.alpha_bar(t);
  const double sa = std::sqrt(ab), sn = std::sqrt(1.0 - ab), s0 = std::sqrt(toy.var0);
  const std::size_t d = toy.mu0.size();
  // Regress eps on u = x_t - sqrt(abar) mu0; both have known zero mean.
  const SlopeAcc acc = monte_carlo(samples, seed, SlopeAcc{}, [&](Rng& rng, SlopeAcc& a) {
    for (std::size_t i = 0; i < d; ++i) {
      const double x0_dev = s0 * rng.normal();
      const double eps = rng.normal();
      const double u = sa * x0_dev + sn * eps;
      a.suu += u * u;
      a.sue += u * eps;
      a.see += eps * eps;
      ++a.n;
    }
  });
  RegressionSlope out;
  out.slope = acc.sue / acc.suu;
  const double rss = acc.see - out.slope * acc.sue;
  out.std_error = std::sqrt(rss / static_cast<double>(acc.n - 1) / acc.suu);
  return out;
}

namespace {

struct NormalAcc {
  Eigen::MatrixXd G;  // sum phi phi^T
  Eigen::MatrixXd R;  // sum eps phi^T
  Eigen::VectorXd E2; // sum eps_i^2
  void merge(const NormalAcc& o) {
    G += o.G;
    R += o.R;
    E2 += o.E2;
  }
};

}  // namespace

PopulationMinimizerReport check_population_minimizer(const GaussianToyData& toy, std::size_t t,
                                                     double w, const StrokeOperator& op,
                                                     const NoiseSchedule& sched,
                                                     std::size_t samples, std::uint64_t seed) {
  sched.check_step(t);
  if (!(w >= 0.0 && w < 1.0)) throw std::invalid_argument("check_population_minimizer: w must lie in [0, 1)");
  const Shape shape = toy.mu0.shape();
  op.check(shape);
  const auto d = static_cast<Eigen::Index>(shape.size());
  const Eigen::Index p = d + 1;
  const double ab = sched.alpha_bar(t);
  const double sa = std::sqrt(ab), sn = std::sqrt(1.0 - ab), s0 = std::sqrt(toy.var0);

  const Eigen::MatrixXd Pc = coarse_projector_matrix(shape, op);
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(d, d);
  const Eigen::MatrixXd A = Pc + (1.0 - w) * (I - Pc);

  const NormalAcc zero{Eigen::MatrixXd::Zero(p, p), Eigen::MatrixXd::Zero(d, p), Eigen::VectorXd::Zero(d)};
  const NormalAcc acc = monte_carlo(samples, seed, zero, [&](Rng& rng, NormalAcc& a) {
    Eigen::VectorXd xt(d), eps(d), phi(p);
    for (Eigen::Index i = 0; i < d; ++i) {
      const double x0 = toy.mu0[static_cast<std::size_t>(i)] + s0 * rng.normal();
      eps(i) = rng.normal();
      xt(i) = sa * x0 + sn * eps(i);
    }
    phi.head(d) = A * xt;
    phi(d) = 1.0;
    a.G.selfadjointView<Eigen::Lower>().rankUpdate(phi);
    a.R.noalias() += eps * phi.transpose();
    a.E2 += eps.cwiseProduct(eps);
  });
  const Eigen::MatrixXd G = acc.G.selfadjointView<Eigen::Lower>();

  // (a) plain least squares: W G = R.
  Eigen::LDLT<Eigen::MatrixXd> gsolve(G);
  if (gsolve.info() != Eigen::Success || !gsolve.isPositive())
    throw std::runtime_error("check_population_minimizer: singular normal equations");
  const Eigen::MatrixXd Wa = gsolve.solve(acc.R.transpose()).transpose();

  // (b) stroke-space least squares: (G kron K) vec(W) = vec(K R), K = A^T A.
  const Eigen::MatrixXd K = A.transpose() * A;
  Eigen::MatrixXd big(d * p, d * p);
  for (Eigen::Index a = 0; a < p; ++a)
    for (Eigen::Index b = 0; b < p; ++b) big.block(a * d, b * d, d, d) = G(a, b) * K;
  const Eigen::MatrixXd KR = K * acc.R;
  const Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(KR.data(), d * p);
  Eigen::LDLT<Eigen::MatrixXd> bsolve(big);
  if (bsolve.info() != Eigen::Success)
    throw std::runtime_error("check_population_minimizer: singular weighted normal equations");
  const Eigen::VectorXd vecW = bsolve.solve(rhs);
  const Eigen::MatrixXd Wb = Eigen::Map<const Eigen::MatrixXd>(vecW.data(), d, p);

  // Analytic: E[eps | x_t] = coef (A^{-1} z - sqrt(abar) mu0).
  const double coef = gaussian_posterior_coefficient(ab, toy.var0);
  Eigen::MatrixXd Wt(d, p);
  Wt.leftCols(d) = coef * (Pc + (I - Pc) / (1.0 - w));
  for (Eigen::Index i = 0; i < d; ++i) Wt(i, d) = -coef * sa * toy.mu0[static_cast<std::size_t>(i)];

  // OLS standard errors.
  const Eigen::MatrixXd Ginv = gsolve.solve(Eigen::MatrixXd::Identity(p, p));
  const double dof = static_cast<double>(samples) - static_cast<double>(p);
  Eigen::MatrixXd se(d, p);
  for (Eigen::Index i = 0; i < d; ++i) {
    const double rss = acc.E2(i) - 2.0 * Wa.row(i).dot(acc.R.row(i)) + Wa.row(i) * G * Wa.row(i).transpose();
    const double s2 = std::max(rss, 0.0) / dof;
    for (Eigen::Index j = 0; j < p; ++j) se(i, j) = std::sqrt(s2 * Ginv(j, j));
  }

  PopulationMinimizerReport rep;
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) {
      rep.ddpm_coefficients.push_back(Wa(i, j));
      rep.ms_coefficients.push_back(Wb(i, j));
      rep.analytic_coefficients.push_back(Wt(i, j));
      rep.std_errors.push_back(se(i, j));
      rep.max_ms_vs_ddpm_se = std::max(rep.max_ms_vs_ddpm_se, std::abs(Wb(i, j) - Wa(i, j)) / se(i, j));
      rep.max_ddpm_vs_analytic_se =
          std::max(rep.max_ddpm_vs_analytic_se, std::abs(Wa(i, j) - Wt(i, j)) / se(i, j));
    }
  }
  rep.pass = rep.max_ms_vs_ddpm_se <= 3.0 && rep.max_ddpm_vs_analytic_se <= 3.0;
  return rep;
}

std::size_t DiscreteToyDistribution::joint_size() const {
  std::size_t n = x0_support.size();
  for (std::size_t i = 0; i < shape.size(); ++i) n *= eps_nodes.size();
  return n;
}

DiscreteToyDistribution default_discrete_toy() {
  DiscreteToyDistribution toy;
  const Shape s{1, 2, 2};
  toy.shape = s;
  toy.x0_support = {ImageTensor(s, {-1.0, -1.0, 1.0, 1.0}), ImageTensor(s, {1.0, 1.0, -1.0, -1.0}),
                    ImageTensor(s, {0.5, -0.5, 0.5, -0.5}), ImageTensor(s, {0.0, 0.0, 0.0, 0.0})};
  toy.x0_prob = {0.1, 0.2, 0.3, 0.4};
  constexpr std::size_t kNodes = 8;
  double total = 0.0;
  for (std::size_t i = 0; i < kNodes; ++i) {
    const double z = -2.5 + 5.0 * static_cast<double>(i) / static_cast<double>(kNodes - 1);
    toy.eps_nodes.push_back(z);
    toy.eps_prob.push_back(std::exp(-0.5 * z * z));
    total += toy.eps_prob.back();
  }
  for (double& p : toy.eps_prob) p /= total;
  return toy;
}

DiscreteMinimizerReport check_discrete_minimizer(const DiscreteToyDistribution& toy, double alpha_bar,
                                                 double w, const StrokeOperator& op,
                                                 double cell_width) {
  if (!(w >= 0.0 && w < 1.0)) throw std::invalid_argument("check_discrete_minimizer: w must lie in [0, 1)");
  if (!(alpha_bar > 0.0 && alpha_bar < 1.0))
    throw std::invalid_argument("check_discrete_minimizer: alpha_bar must lie in (0, 1)");
  if (toy.x0_support.size() != toy.x0_prob.size() || toy.eps_nodes.size() != toy.eps_prob.size())
    throw std::invalid_argument("check_discrete_minimizer: support/probability size mismatch");
  double psum = 0.0;
  for (double p : toy.x0_prob) psum += p;
  double esum = 0.0;
  for (double p : toy.eps_prob) esum += p;
  if (std::abs(psum - 1.0) > 1e-12 || std::abs(esum - 1.0) > 1e-12)
    throw std::invalid_argument("check_discrete_minimizer: probabilities must sum to 1");

  const std::size_t d = toy.shape.size();
  const auto de = static_cast<Eigen::Index>(d);
  const std::size_t m = toy.eps_nodes.size();
  const double sa = std::sqrt(alpha_bar), sn = std::sqrt(1.0 - alpha_bar);
  const Eigen::MatrixXd Pc = coarse_projector_matrix(toy.shape, op);
  const Eigen::MatrixXd A = Pc + (1.0 - w) * (Eigen::MatrixXd::Identity(de, de) - Pc);
  const Eigen::MatrixXd K = A.transpose() * A;

  struct Atom {
    double p;
    Eigen::VectorXd eps;
    std::vector<long> key;
  };
  std::vector<Atom> atoms;
  atoms.reserve(toy.joint_size());
  std::size_t combos = 1;
  for (std::size_t i = 0; i < d; ++i) combos *= m;
  for (std::size_t a = 0; a < toy.x0_support.size(); ++a) {
    for (std::size_t c = 0; c < combos; ++c) {
      Atom at{toy.x0_prob[a], Eigen::VectorXd(de), std::vector<long>(d)};
      std::size_t rem = c;
      for (std::size_t i = 0; i < d; ++i) {
        const std::size_t node = rem % m;
        rem /= m;
        at.p *= toy.eps_prob[node];
        at.eps(static_cast<Eigen::Index>(i)) = toy.eps_nodes[node];
        const double xt = sa * toy.x0_support[a][i] + sn * toy.eps_nodes[node];
        at.key[i] = static_cast<long>(std::floor(xt / cell_width));
      }
      atoms.push_back(std::move(at));
    }
  }

  struct Cell {
    double mass = 0.0;
    Eigen::VectorXd weighted_eps;
    std::vector<std::size_t> members;
  };
  std::map<std::vector<long>, Cell> cells;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    Cell& cell = cells[atoms[i].key];
    if (cell.members.empty()) cell.weighted_eps = Eigen::VectorXd::Zero(de);
    cell.mass += atoms[i].p;
    cell.weighted_eps += atoms[i].p * atoms[i].eps;
    cell.members.push_back(i);
  }

  DiscreteMinimizerReport rep;
  rep.cells = cells.size();
  double risk_star = 0.0, risk_g = 0.0, excess = 0.0;
  std::uint64_t salt = 1;
  for (auto& [key, cell] : cells) {
    // Conditional mean by direct averaging.
    const Eigen::VectorXd cond = cell.weighted_eps / cell.mass;
    // Minimizer of sum p ||A(f - eps)||^2 from its normal equations
    // (mass K) f = K sum p eps, solved without dividing by the mass first.
    const Eigen::MatrixXd H = cell.mass * K;
    const Eigen::VectorXd g = K * cell.weighted_eps;
    const Eigen::VectorXd fmin = H.ldlt().solve(g);
    rep.max_minimizer_gap = std::max(rep.max_minimizer_gap, (fmin - cond).cwiseAbs().maxCoeff());

    // A deterministic perturbation of the conditional mean.
    Eigen::VectorXd pert(de);
    for (Eigen::Index i = 0; i < de; ++i) {
      salt = mix_seed(salt);
      pert(i) = static_cast<double>(salt % 2001) / 1000.0 - 1.0;
    }
    const Eigen::VectorXd gpred = cond + pert;
    for (std::size_t idx : cell.members) {
      const Atom& at = atoms[idx];
      risk_star += at.p * (A * (cond - at.eps)).squaredNorm();
      risk_g += at.p * (A * (gpred - at.eps)).squaredNorm();
    }
    excess += cell.mass * (A * pert).squaredNorm();
  }
  rep.risk_conditional_mean = risk_star;
  rep.pythagoras_gap = std::abs(risk_g - risk_star - excess) / risk_g;
  rep.pass = rep.max_minimizer_gap <= 1e-12 && rep.pythagoras_gap <= 1e-12;
  return rep;
}

TargetDecompositionReport check_target_decomposition(const ImageTensor& f, double w,
                                                     const StrokeOperator& op, double s) {
  const ImageTensor coarse = coarse_project(f, op);
  const ImageTensor detail = detail_project(f, op);
  const ImageTensor mixed = mix(f, w, op);
  const ImageTensor projector_form = lincomb(1.0, coarse, 1.0 - w, detail);

  TargetDecompositionReport rep;
  rep.projector_form_error = max_abs_diff(mixed, projector_form);
  rep.complexity_before = multires_complexity(f, op, s);
  rep.complexity_after = multires_complexity(mixed, op, s);
  const double closed = squared_norm(coarse) + std::pow(static_cast<double>(op.k()), 2.0 * s) *
                                                   (1.0 - w) * (1.0 - w) * squared_norm(detail);
  rep.complexity_error = std::abs(rep.complexity_after - closed) / std::max(1.0, rep.complexity_before);
  rep.strict_decrease = rep.complexity_after < rep.complexity_before;
  const bool expect_strict = w > 0.0 && squared_norm(detail) > 0.0;
  rep.pass = rep.projector_form_error <= 1e-12 && rep.complexity_error <= 1e-12 &&
             (!expect_strict || rep.strict_decrease) && rep.complexity_after <= rep.complexity_before;
  return rep;
}

}  // namespace ms
