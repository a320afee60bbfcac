#include "multistroke/checks.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>

#include "multistroke/diffusion.hpp"
#include "multistroke/mc.hpp"
#include "multistroke/sampler.hpp"
#include "multistroke/stroke_ops.hpp"
#include "multistroke/surrogate.hpp"

namespace ms {

namespace {

using StrokeFn = ImageTensor (*)(const ImageTensor&, const StrokeOperator&);

StrokeFn stroke_fn(const VerifyOptions& o) { return o.inject_fault ? misaligned_stroke : apply_stroke; }

CheckResult at_most(std::string name, double stat, double tol, std::string detail = {}) {
  return CheckResult{std::move(name), stat, tol, stat <= tol, std::move(detail)};
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

// The randomized tensors of the operator-algebra suite.
struct AlgebraCase {
  Shape shape;
  std::size_t k;
};
const std::vector<AlgebraCase>& algebra_cases() {
  static const std::vector<AlgebraCase> cases{{{1, 8, 8}, 2}, {{1, 8, 8}, 4}, {{3, 16, 16}, 2}, {{3, 16, 16}, 4}};
  return cases;
}
constexpr int kAlgebraTrials = 25;

template <typename F>
double worst_over_cases(const VerifyOptions& o, F&& f) {
  double worst = 0.0;
  std::uint64_t stream = 0;
  for (const auto& c : algebra_cases()) {
    const StrokeOperator op(c.k);
    Rng rng(derive_seed(o.seed, stream++));
    for (int trial = 0; trial < kAlgebraTrials; ++trial)
      worst = std::max(worst, f(rng.normal_tensor(c.shape), rng.normal_tensor(c.shape), op));
  }
  return worst;
}

std::vector<CheckResult> stroke_idempotence(const VerifyOptions& o) {
  const StrokeFn S = stroke_fn(o);
  return {at_most("stroke.idempotence",
                  worst_over_cases(o, [&](const ImageTensor& x, const ImageTensor&, const StrokeOperator& op) {
                    const ImageTensor sx = S(x, op);
                    return max_abs_diff(S(sx, op), sx);
                  }),
                  1e-12)};
}

std::vector<CheckResult> stroke_self_adjoint(const VerifyOptions& o) {
  const StrokeFn S = stroke_fn(o);
  return {at_most("stroke.self_adjoint",
                  worst_over_cases(o, [&](const ImageTensor& x, const ImageTensor& y, const StrokeOperator& op) {
                    return std::abs(dot(S(x, op), y) - dot(x, S(y, op)));
                  }),
                  1e-12, "|<Sx,y> - <x,Sy>|")};
}

std::vector<CheckResult> stroke_pythagoras(const VerifyOptions& o) {
  const StrokeFn S = stroke_fn(o);
  bool expansive = false;
  const double gap = worst_over_cases(o, [&](const ImageTensor& x, const ImageTensor&, const StrokeOperator& op) {
    const ImageTensor sx = S(x, op);
    const double nx = squared_norm(x), ns = squared_norm(sx), nd = squared_norm(x - sx);
    expansive = expansive || ns > nx;
    return std::abs(nx - ns - nd) / std::max(1.0, nx);
  });
  auto r = at_most("stroke.pythagoras", gap, 1e-12, "relative to max(1, ||x||^2)");
  if (expansive) {
    r.pass = false;
    r.detail += "; ||Sx|| > ||x|| observed";
  }
  return {r};
}

std::vector<CheckResult> stroke_projector_algebra(const VerifyOptions& o) {
  const StrokeFn S = stroke_fn(o);
  std::vector<CheckResult> out;
  for (const double w : {0.3, 0.5}) {
    const double worst = worst_over_cases(o, [&](const ImageTensor& x, const ImageTensor&, const StrokeOperator& op) {
      const ImageTensor qc = S(x, op);
      const ImageTensor qd = x - qc;
      const ImageTensor m = mix(x, w, op);
      const ImageTensor mc = S(m, op);
      double e = max_abs_diff(S(qd, op), ImageTensor(x.shape()));
      e = std::max(e, max_abs_diff(m, lincomb(1.0, qc, 1.0 - w, qd)));
      e = std::max(e, max_abs_diff(m - mc, (1.0 - w) * qd));
      e = std::max(e, max_abs_diff(mc, qc));
      return e;
    });
    out.push_back(at_most("stroke.projector_algebra[w=" + fmt(w) + "]", worst, 1e-12));
  }
  return out;
}

std::vector<CheckResult> stroke_energy_identity(const VerifyOptions& o) {
  std::vector<CheckResult> out;
  for (const double w : {0.3, 0.5}) {
    bool dominated = true;
    const double worst = worst_over_cases(o, [&](const ImageTensor& x, const ImageTensor&, const StrokeOperator& op) {
      const double lhs = squared_norm(mix(x, w, op));
      const double rhs = squared_norm(coarse_project(x, op)) + (1 - w) * (1 - w) * squared_norm(detail_project(x, op));
      dominated = dominated && lhs <= squared_norm(x);
      return std::abs(lhs - rhs) / std::max(1.0, squared_norm(x));
    });
    auto r = at_most("stroke.energy_identity[w=" + fmt(w) + "]", worst, 1e-12);
    r.pass = r.pass && dominated;
    out.push_back(r);
  }
  return out;
}

std::vector<CheckResult> stroke_mix_inverse(const VerifyOptions& o) {
  return {at_most("stroke.mix_inverse",
                  worst_over_cases(o, [&](const ImageTensor& x, const ImageTensor&, const StrokeOperator& op) {
                    return max_abs_diff(mix(mix_inverse(x, 0.5, op), 0.5, op), x);
                  }),
                  1e-12)};
}

// Aligned complex modes exp(i (w1 r + w2 c)) carried as (re, im) tensors.
struct Mode {
  ImageTensor re, im;
};
Mode aligned_mode(std::size_t n, std::size_t m1, std::size_t m2) {
  Mode u{ImageTensor({1, n, n}), ImageTensor({1, n, n})};
  const double w1 = 2.0 * std::numbers::pi * static_cast<double>(m1) / static_cast<double>(n);
  const double w2 = 2.0 * std::numbers::pi * static_cast<double>(m2) / static_cast<double>(n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) {
      const double phase = w1 * static_cast<double>(r) + w2 * static_cast<double>(c);
      u.re.at(0, r, c) = std::cos(phase);
      u.im.at(0, r, c) = std::sin(phase);
    }
  return u;
}

std::vector<CheckResult> gamma_envelope(const VerifyOptions& o) {
  const StrokeFn S = stroke_fn(o);
  constexpr std::size_t n = 8;
  std::vector<CheckResult> out;
  for (const std::size_t k : {2u, 4u}) {
    const StrokeOperator op(k);
    double worst = 0.0, worst_energy = 0.0;
    for (std::size_t m1 = 0; m1 < n; ++m1)
      for (std::size_t m2 = 0; m2 < n; ++m2) {
        const Mode u = aligned_mode(n, m1, m2);
        const double norm_u = squared_norm(u.re) + squared_norm(u.im);
        const double ratio = std::sqrt((squared_norm(S(u.re, op)) + squared_norm(S(u.im, op))) / norm_u);
        const double w1 = 2.0 * std::numbers::pi * static_cast<double>(m1) / n;
        const double w2 = 2.0 * std::numbers::pi * static_cast<double>(m2) / n;
        const double rho = attenuation_gamma(w1, k) * attenuation_gamma(w2, k);
        worst = std::max(worst, std::abs(ratio - rho));
        const double e = (squared_norm(mix(u.re, 0.5, op)) + squared_norm(mix(u.im, 0.5, op))) / norm_u;
        worst_energy = std::max(worst_energy, std::abs(e - mode_energy_ratio(rho, 0.5)));
      }
    out.push_back(at_most("gamma.envelope[k=" + std::to_string(k) + "]", worst, 1e-10,
                          "all aligned modes of an 8x8 grid"));
    out.push_back(at_most("gamma.mode_energy[k=" + std::to_string(k) + "]", worst_energy, 1e-10));
  }
  return out;
}

std::vector<CheckResult> gamma_zeros(const VerifyOptions&) {
  double worst = 0.0;
  for (const std::size_t k : {2u, 4u})
    for (std::size_t m = 1; m < k; ++m)
      worst = std::max(worst, attenuation_gamma(2.0 * std::numbers::pi * static_cast<double>(m) / k, k));
  const double at_zero = std::abs(attenuation_gamma(0.0, 3) - 1.0) + std::abs(attenuation_gamma(4 * std::numbers::pi, 2) - 1.0);
  return {at_most("gamma.zeros", worst, 1e-12, "gamma_k(2 pi m / k), m = 1..k-1"),
          at_most("gamma.limit_at_zero", at_zero, 1e-12)};
}

std::vector<CheckResult> schedule_roughness(const VerifyOptions&) {
  const RoughnessSchedule r(500, 0.75, 0.5);
  double err = std::abs(r.weight(125)) + std::abs(r.weight(500) - 0.5) +
               std::abs(r.weight(313) - 0.5 * 188.0 / 375.0) + std::abs(r.weight(0));
  bool monotone = true;
  for (std::size_t t = 1; t <= 500; ++t) monotone = monotone && r.weight(t) >= r.weight(t - 1);
  auto c = at_most("schedule.roughness", err, 1e-15, "w_125, w_313, w_500, w_0");
  c.pass = c.pass && monotone && r.cut() == 125;
  return {c};
}

std::vector<CheckResult> diffusion_tables(const VerifyOptions&) {
  const NoiseSchedule s = linear_beta_schedule(500, 1e-4, 2.8e-2);
  const double beta250 = 1e-4 + (249.0 / 499.0) * (2.8e-2 - 1e-4);
  double logsum = 0.0;
  for (std::size_t t = 1; t <= 500; ++t) logsum += std::log1p(-s.beta(t));
  const double rel = std::abs(s.alpha_bar(500) - std::exp(logsum)) / std::exp(logsum);
  bool snr_dec = true, small_le_large = true;
  for (std::size_t t = 2; t <= 500; ++t) snr_dec = snr_dec && snr(t, s) < snr(t - 1, s);
  for (std::size_t t = 1; t <= 500; ++t)
    small_le_large = small_le_large && reverse_variance(t, s, VarianceConvention::kFixedSmall) <=
                                           reverse_variance(t, s, VarianceConvention::kFixedLarge);
  return {at_most("diffusion.beta_interpolation", std::abs(s.beta(250) - beta250), 1e-15),
          at_most("diffusion.alpha_bar_logsum", rel, 1e-10, "product vs exp(sum log(1 - beta))"),
          CheckResult{"diffusion.snr_monotone", snr_dec ? 0.0 : 1.0, 0.0, snr_dec, ""},
          CheckResult{"diffusion.fixedsmall_le_fixedlarge", small_le_large ? 0.0 : 1.0, 0.0, small_le_large, ""}};
}

std::vector<CheckResult> diffusion_jump(const VerifyOptions& o) {
  const NoiseSchedule s = linear_beta_schedule(500, 1e-4, 2.8e-2);
  Rng rng(derive_seed(o.seed, 77));
  const Shape shape{1, 4, 4};
  double reduction = 0.0, composition = 0.0;
  for (const std::size_t t : {1u, 2u, 50u, 251u, 500u}) {
    const ImageTensor x = rng.normal_tensor(shape), e = rng.normal_tensor(shape);
    for (const auto conv : {VarianceConvention::kFixedLarge, VarianceConvention::kFixedSmall}) {
      const JumpStep j = jump_mean_variance(x, e, t, t - 1, s, conv);
      reduction = std::max(reduction, max_abs_diff(j.mean, reverse_mean(x, e, t, s)));
      reduction = std::max(reduction, std::abs(j.variance - reverse_variance(t, s, conv)));
    }
  }
  constexpr std::array<std::array<std::size_t, 3>, 3> triples{{{500, 300, 0}, {400, 399, 17}, {80, 40, 10}}};
  for (const auto& [t, m, sdst] : triples)
    composition = std::max(composition, std::abs(jump_alpha(t, m, s) * jump_alpha(m, sdst, s) - jump_alpha(t, sdst, s)));
  return {at_most("diffusion.jump_reduction", reduction, 1e-12, "s = t - 1 against contiguous step"),
          at_most("diffusion.jump_composition", composition, 1e-12)};
}

struct PairMoments {
  Moments a, b;
  void merge(const PairMoments& o) {
    a.merge(o.a);
    b.merge(o.b);
  }
};

std::vector<CheckResult> diffusion_variance_reduction(const VerifyOptions& o) {
  const Shape shape{1, 4, 4};
  const StrokeOperator op(2);
  const double dc = static_cast<double>(op.coarse_dim(shape));
  const double dd = static_cast<double>(op.detail_dim(shape));
  std::vector<CheckResult> out;
  for (const double w : {0.3, 0.5}) {
    const PairMoments m = monte_carlo(100000, derive_seed(o.seed, 300 + static_cast<std::uint64_t>(w * 10)),
                                      PairMoments{}, [&](Rng& rng, PairMoments& acc) {
                                        const ImageTensor e = mix(rng.normal_tensor(shape), w, op);
                                        acc.a.add(squared_norm(detail_project(e, op)));
                                        acc.b.add(squared_norm(coarse_project(e, op)));
                                      });
    const double want_d = (1 - w) * (1 - w) * dd;
    out.push_back(at_most("diffusion.variance_reduction.detail[w=" + fmt(w) + "]",
                          std::abs(m.a.mean - want_d) / want_d, 0.02,
                          "E=" + fmt(m.a.mean) + " expected " + fmt(want_d)));
    out.push_back(at_most("diffusion.variance_reduction.coarse[w=" + fmt(w) + "]",
                          std::abs(m.b.mean - dc) / dc, 0.02, "E=" + fmt(m.b.mean) + " expected " + fmt(dc)));
  }
  return out;
}

std::vector<CheckResult> diffusion_forward_variance(const VerifyOptions& o) {
  const NoiseSchedule s = linear_beta_schedule(500, 1e-4, 2.8e-2);
  const Shape shape{1, 2, 2};
  const ImageTensor x0(shape, std::vector<double>{0.5, -0.25, 1.0, 0.0});
  const std::size_t t = 100;
  struct PixelMoments {
    std::vector<Moments> px = std::vector<Moments>(4);
    void merge(const PixelMoments& o) {
      for (std::size_t i = 0; i < px.size(); ++i) px[i].merge(o.px[i]);
    }
  };
  const PixelMoments m = monte_carlo(100000, derive_seed(o.seed, 400), PixelMoments{}, [&](Rng& rng, PixelMoments& acc) {
    const ImageTensor xt = forward_sample(x0, t, rng.normal_tensor(shape), s);
    for (std::size_t i = 0; i < 4; ++i) acc.px[i].add(xt[i]);
  });
  double worst = 0.0;
  const double want = 1.0 - s.alpha_bar(t);
  for (const auto& p : m.px) worst = std::max(worst, std::abs(p.variance() - want) / want);
  return {at_most("diffusion.forward_variance", worst, 0.02, "per-pixel Var(x_t | x0) vs 1 - alpha_bar")};
}

std::vector<CheckResult> oracle_posterior_slope(const VerifyOptions& o) {
  const NoiseSchedule s = linear_beta_schedule(500, 1e-4, 2.8e-2);
  GaussianToyData toy{ImageTensor({1, 2, 2}, std::vector<double>{0.3, -0.2, 0.1, 0.0}), 0.5};
  const std::size_t t = 100;
  const RegressionSlope fit = mc_regression_slope(toy, t, s, 1000000, derive_seed(o.seed, 500));
  const double coef = gaussian_posterior_coefficient(s.alpha_bar(t), toy.var0);
  return {at_most("oracle.posterior_slope", std::abs(fit.slope - coef) / coef, 0.005,
                  "MC slope " + fmt(fit.slope) + " vs closed form " + fmt(coef))};
}

std::vector<CheckResult> oracle_population_minimizer(const VerifyOptions& o) {
  const NoiseSchedule s = linear_beta_schedule(500, 1e-4, 2.8e-2);
  GaussianToyData toy{ImageTensor({1, 2, 2}, std::vector<double>{0.3, -0.2, 0.1, 0.0}), 0.5};
  const auto rep = check_population_minimizer(toy, 100, 0.5, StrokeOperator(2), s, 1000000, derive_seed(o.seed, 600));
  return {at_most("oracle.population_minimizer.ms_vs_ddpm", rep.max_ms_vs_ddpm_se, 3.0, "standard errors"),
          at_most("oracle.population_minimizer.ddpm_vs_analytic", rep.max_ddpm_vs_analytic_se, 3.0, "standard errors")};
}

std::vector<CheckResult> oracle_discrete(const VerifyOptions&) {
  const auto rep = check_discrete_minimizer(default_discrete_toy(), 0.6, 0.5, StrokeOperator(2));
  return {at_most("oracle.discrete_minimizer", rep.max_minimizer_gap, 1e-12,
                  std::to_string(rep.cells) + " cells"),
          at_most("oracle.discrete_pythagoras", rep.pythagoras_gap, 1e-12)};
}

std::vector<CheckResult> oracle_target_decomposition(const VerifyOptions& o) {
  Rng rng(derive_seed(o.seed, 700));
  double proj = 0.0, cx = 0.0;
  bool strict = true;
  for (int i = 0; i < 10; ++i) {
    const auto rep = check_target_decomposition(rng.normal_tensor({3, 16, 16}), 0.5, StrokeOperator(2), 1.0);
    proj = std::max(proj, rep.projector_form_error);
    cx = std::max(cx, rep.complexity_error);
    strict = strict && rep.strict_decrease;
  }
  auto r = at_most("oracle.target_decomposition", std::max(proj, cx), 1e-12);
  r.pass = r.pass && strict;
  return {r};
}

SurrogateInputs surrogate_base(std::size_t L, double rho, double kappa, double w, double sigma, std::uint64_t seed) {
  SurrogateInputs in;
  in.rho.assign(L, rho);
  in.kappa.assign(L, kappa);
  in.bias_detail_energy.assign(L, 0.0);
  in.sigma.assign(L, sigma);
  in.weights.assign(L + 1, w);
  in.samples = 100000;
  in.seed = seed;
  return in;
}

std::vector<CheckResult> surrogate_bound_matrix(const VerifyOptions& o) {
  std::size_t configs = 0, failures = 0;
  double min_margin = 1e300;
  std::uint64_t stream = 800;
  for (const double rho : {0.0, 0.5, 0.9})
    for (const double kappa : {0.0, 0.5})
      for (const double w : {0.0, 0.3, 0.5})
        for (const double sigma : {0.0, 0.1}) {
          const auto spec = build_surrogate(surrogate_base(4, rho, kappa, w, sigma, derive_seed(o.seed, stream++)));
          const auto rows = check_bound(simulate(spec), spec);
          ++configs;
          bool ok = true;
          for (const auto& r : rows) {
            ok = ok && r.holds;
            min_margin = std::min(min_margin, r.margin);
          }
          failures += ok ? 0 : 1;
        }
  return {CheckResult{"surrogate.bound_matrix", static_cast<double>(failures), 0.0, failures == 0,
                      std::to_string(configs) + " configurations, min margin " + fmt(min_margin)}};
}

std::vector<CheckResult> surrogate_clean_recursion(const VerifyOptions& o) {
  auto in = surrogate_base(1, 0.5, 0.0, 0.5, 0.1, derive_seed(o.seed, 900));
  in.weights = {0.3, 0.5};
  in.detail_block = DetailBlockKind::kScaledIdentity;
  const auto spec = build_surrogate(in);
  const auto tr = simulate(spec);
  const double N = static_cast<double>(spec.d_detail);
  const double predicted = 0.25 * 0.25 * tr.E(1) + 0.01 * 0.49 * N;
  const double init = std::abs(tr.E(1) - 0.25 * N) / (0.25 * N);
  const double noise = std::abs(tr.noise_detail[1].mean - N) / N;
  const double certified = std::abs(build_surrogate(surrogate_base(1, 1.0, 0.0, 0.5, 0.0, 1)).steps[0].certified_rho - 1.0);
  return {at_most("surrogate.clean_recursion", std::abs(tr.E(0) - predicted) / predicted, 0.01,
                  "E_0 " + fmt(tr.E(0)) + " vs " + fmt(predicted)),
          at_most("surrogate.initial_energy", init, 0.02, "E_T vs (1 - w_T)^2 d_detail"),
          at_most("surrogate.noise_dimension", noise, 0.01, "empirical N vs d_detail"),
          at_most("surrogate.certified_norm", certified, 1e-8, "declared rho = 1")};
}

std::vector<CheckResult> surrogate_iterated(const VerifyOptions& o) {
  const auto spec = build_surrogate(surrogate_base(10, 0.5, 0.0, 0.5, 0.0, derive_seed(o.seed, 1000)));
  const auto rep = iterated_bound(simulate(spec), spec, 10, 0);
  CheckResult r{"surrogate.iterated_contraction", rep.exit, rep.bound + rep.slack, rep.holds,
                "q = " + fmt(rep.q) + ", entry " + fmt(rep.entry)};
  bool refused = false;
  try {
    const auto base = build_surrogate(surrogate_base(2, 0.5, 0.0, 0.0, 0.0, 3));
    (void)iterated_bound(simulate(base), base, 2, 0);
  } catch (const std::invalid_argument&) {
    refused = true;
  }
  return {r, CheckResult{"surrogate.iterated_refuses_zero_wmin", refused ? 0.0 : 1.0, 0.0, refused, ""}};
}

std::vector<CheckResult> surrogate_monotone(const VerifyOptions& o) {
  double prev = 1e300;
  bool ok = true;
  std::string detail;
  for (const double w : {0.0, 0.3, 0.5}) {
    const auto spec = build_surrogate(surrogate_base(8, 0.9, 0.0, w, 0.1, derive_seed(o.seed, 1100)));
    const double e = simulate(spec).E(0);
    ok = ok && e <= prev;
    prev = e;
    detail += (detail.empty() ? "" : ", ") + ("w=" + fmt(w) + ": " + fmt(e));
  }
  return {CheckResult{"surrogate.monotone_wmin", ok ? 0.0 : 1.0, 0.0, ok, detail}};
}

class LinearPredictor final : public NoisePredictor {
 public:
  explicit LinearPredictor(std::size_t T) : T_(T) {}
  ImageTensor predict(const ImageTensor& x, std::size_t t, std::size_t label) const override {
    ImageTensor out = (0.2 + 0.5 * static_cast<double>(t) / static_cast<double>(T_)) * x;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += 0.01 * static_cast<double>(label) * std::sin(static_cast<double>(i));
    return out;
  }

 private:
  std::size_t T_;
};

std::vector<CheckResult> sampler_reductions(const VerifyOptions& o) {
  const std::size_t T = 100;
  const NoiseSchedule s = linear_beta_schedule(T, 1e-4, 2.8e-2);
  const StrokeOperator op(2);
  const LinearPredictor model(T);
  const Shape shape{1, 8, 8};
  bool bitwise = true;
  for (const std::size_t n : {T, std::size_t{10}}) {
    SamplePlan plan{subsample_schedule(T, n), VarianceConvention::kFixedLarge, SampleMode::kDdpm, o.seed};
    Rng a(derive_seed(o.seed, n)), b(derive_seed(o.seed, n));
    const ImageTensor ddpm = sample_ddpm(model, s, plan, shape, 1, a);
    plan.mode = SampleMode::kMultiStroke;
    const ImageTensor msk = sample_multistroke(model, s, RoughnessSchedule(T, 0.75, 0.0), op, plan, shape, 1, b);
    bitwise = bitwise && ddpm == msk;
  }
  return {CheckResult{"sampler.wmax0_equals_ddpm", bitwise ? 0.0 : 1.0, 0.0, bitwise, "bitwise, contiguous and jumped plans"}};
}

}  // namespace

ImageTensor misaligned_stroke(const ImageTensor& x, const StrokeOperator& op) {
  const ImageTensor avg = apply_stroke(x, op);
  ImageTensor out(x.shape());
  for (std::size_t c = 0; c < x.channels(); ++c)
    for (std::size_t i = 0; i < x.height(); ++i)
      for (std::size_t j = 0; j < x.width(); ++j) out.at(c, i, j) = avg.at(c, (i + 1) % x.height(), j);
  return out;
}

const std::vector<NamedCheck>& verify_checks() {
  static const std::vector<NamedCheck> checks{
      {"stroke.idempotence", stroke_idempotence},
      {"stroke.self_adjoint", stroke_self_adjoint},
      {"stroke.pythagoras", stroke_pythagoras},
      {"stroke.projector_algebra", stroke_projector_algebra},
      {"stroke.energy_identity", stroke_energy_identity},
      {"stroke.mix_inverse", stroke_mix_inverse},
      {"gamma.envelope", gamma_envelope},
      {"gamma.zeros", gamma_zeros},
      {"schedule.roughness", schedule_roughness},
      {"diffusion.tables", diffusion_tables},
      {"diffusion.jump", diffusion_jump},
      {"diffusion.variance_reduction", diffusion_variance_reduction},
      {"diffusion.forward_variance", diffusion_forward_variance},
      {"oracle.posterior_slope", oracle_posterior_slope},
      {"oracle.population_minimizer", oracle_population_minimizer},
      {"oracle.discrete", oracle_discrete},
      {"oracle.target_decomposition", oracle_target_decomposition},
      {"surrogate.bound_matrix", surrogate_bound_matrix},
      {"surrogate.clean_recursion", surrogate_clean_recursion},
      {"surrogate.iterated", surrogate_iterated},
      {"surrogate.monotone_wmin", surrogate_monotone},
      {"sampler.reductions", sampler_reductions},
  };
  return checks;
}

std::vector<CheckResult> run_verify(const VerifyOptions& options, std::ostream* log) {
  std::vector<CheckResult> all;
  for (const auto& check : verify_checks()) {
    if (!options.filter.empty() && check.name.find(options.filter) == std::string::npos) continue;
    std::vector<CheckResult> results;
    try {
      results = check.run(options);
    } catch (const std::exception& e) {
      results = {CheckResult{check.name, 0.0, 0.0, false, std::string("error: ") + e.what()}};
    }
    if (log) write_check_text(*log, results);
    all.insert(all.end(), results.begin(), results.end());
  }
  return all;
}

}  // namespace ms
