#include "multistroke/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

#include "multistroke/rng.hpp"

namespace ms {

namespace {

Eigen::MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
  return m;
}

// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the signs
// of R's diagonal folded into Q.
Eigen::MatrixXd random_orthogonal(Eigen::Index n, Rng& rng) {
  const Eigen::MatrixXd g = gaussian_matrix(n, n, rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < n; ++i)
    if (r(i, i) < 0.0) q.col(i) *= -1.0;
  return q;
}

// Orthonormal basis of range(P) for an orthogonal projector P.
Eigen::MatrixXd range_basis(const Eigen::MatrixXd& P, Eigen::Index rank) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(P);
  return eig.eigenvectors().rightCols(rank);
}

void check_table(const std::vector<double>& v, std::size_t n, const char* name) {
  if (v.size() != n)
    throw std::invalid_argument(std::string("build_surrogate: table '") + name + "' has " +
                                std::to_string(v.size()) + " entries, expected " +
                                std::to_string(n));
}

Eigen::MatrixXd mix_matrix(const Eigen::MatrixXd& Pc, double w) {
  const Eigen::Index d = Pc.rows();
  return Pc + (1.0 - w) * (Eigen::MatrixXd::Identity(d, d) - Pc);
}

}  // namespace

double spectral_norm(const Eigen::MatrixXd& M, double rel_tol, std::size_t max_iter,
                     std::uint64_t seed) {
  if (M.size() == 0) return 0.0;
  if (M.cwiseAbs().maxCoeff() == 0.0) return 0.0;
  Rng rng(seed);
  Eigen::VectorXd v(M.cols());
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.normal();
  v.normalize();
  double prev = 0.0;
  for (std::size_t it = 0; it < max_iter; ++it) {
    const Eigen::VectorXd u = M.transpose() * (M * v);
    const double lambda = v.dot(u);  // Rayleigh quotient of M^T M
    const double norm = u.norm();
    if (norm == 0.0) return 0.0;
    v = u / norm;
    if (it > 0 && std::abs(lambda - prev) <= rel_tol * std::abs(lambda)) return std::sqrt(lambda);
    prev = lambda;
  }
  throw std::runtime_error("spectral_norm: power iteration did not converge in " +
                           std::to_string(max_iter) + " iterations");
}

Eigen::MatrixXd coarse_projector_matrix(const Shape& shape, const StrokeOperator& op) {
  op.check(shape);
  const Eigen::Index d = static_cast<Eigen::Index>(shape.size());
  Eigen::MatrixXd P(d, d);
  ImageTensor e(shape);
  for (Eigen::Index j = 0; j < d; ++j) {
    std::fill(e.values().begin(), e.values().end(), 0.0);
    e[static_cast<std::size_t>(j)] = 1.0;
    const ImageTensor col = apply_stroke(e, op);
    for (Eigen::Index i = 0; i < d; ++i) P(i, j) = col[static_cast<std::size_t>(i)];
  }
  return P;
}

SurrogateChainSpec build_surrogate(const SurrogateInputs& in) {
  const std::size_t L = in.length();
  if (L == 0) throw std::invalid_argument("build_surrogate: chain must have at least one step");
  check_table(in.kappa, L, "kappa");
  check_table(in.bias_detail_energy, L, "bias_detail_energy");
  check_table(in.sigma, L, "sigma");
  check_table(in.weights, L + 1, "weights");
  for (std::size_t t = 0; t < L; ++t) {
    if (!(in.rho[t] >= 0.0) || !(in.kappa[t] >= 0.0) || !(in.bias_detail_energy[t] >= 0.0) ||
        !(in.sigma[t] >= 0.0))
      throw std::invalid_argument("build_surrogate: norms, energies and sigmas must be >= 0");
  }
  for (double w : in.weights)
    if (!(w >= 0.0 && w < 1.0)) throw std::invalid_argument("build_surrogate: weights must lie in [0, 1)");
  if (in.samples < 2) throw std::invalid_argument("build_surrogate: need at least two samples");

  SurrogateChainSpec spec;
  spec.shape = in.shape;
  spec.op = StrokeOperator(in.k);
  spec.d_coarse = spec.op.coarse_dim(in.shape);
  spec.d_detail = spec.op.detail_dim(in.shape);
  spec.weights = in.weights;
  spec.samples = in.samples;
  spec.seed = in.seed;

  const auto dc = static_cast<Eigen::Index>(spec.d_coarse);
  const auto dd = static_cast<Eigen::Index>(spec.d_detail);
  const Eigen::MatrixXd Pc = coarse_projector_matrix(in.shape, spec.op);
  const Eigen::MatrixXd Pd = Eigen::MatrixXd::Identity(Pc.rows(), Pc.cols()) - Pc;
  const Eigen::MatrixXd Bc = range_basis(Pc, dc);
  const Eigen::MatrixXd Bd = dd > 0 ? range_basis(Pd, dd) : Eigen::MatrixXd(Pc.rows(), 0);

  Rng rng(derive_seed(in.seed, 0xb10c));
  for (std::size_t t = 1; t <= L; ++t) {
    SurrogateStep st;
    st.rho = in.rho[t - 1];
    st.kappa = in.kappa[t - 1];
    st.bias_detail_energy = in.bias_detail_energy[t - 1];
    st.sigma = in.sigma[t - 1];

    const Eigen::MatrixXd Rcc = in.coarse_gain * random_orthogonal(dc, rng);
    Eigen::MatrixXd Rdd = in.detail_block == DetailBlockKind::kScaledIdentity
                              ? Eigen::MatrixXd(Eigen::MatrixXd::Identity(dd, dd))
                              : random_orthogonal(dd, rng);
    Rdd *= st.rho;
    Eigen::MatrixXd Rdc = Eigen::MatrixXd::Zero(dd, dc);
    if (st.kappa > 0.0 && dd > 0) {
      Rdc = gaussian_matrix(dd, dc, rng);
      Rdc *= st.kappa / spectral_norm(Rdc, 1e-12, 100000, derive_seed(in.seed, t));
    }
    st.M = Bc * Rcc * Bc.transpose() + Bd * Rdc * Bc.transpose() + Bd * Rdd * Bd.transpose();

    Eigen::VectorXd bias = Eigen::VectorXd::Zero(Pc.rows());
    if (in.bias_coarse_norm > 0.0) {
      Eigen::VectorXd bc = Bc * gaussian_matrix(dc, 1, rng);
      bias += in.bias_coarse_norm * bc / bc.norm();
    }
    if (st.bias_detail_energy > 0.0 && dd > 0) {
      Eigen::VectorXd bd = Bd * gaussian_matrix(dd, 1, rng);
      bias += std::sqrt(st.bias_detail_energy) * bd / bd.norm();
    }
    st.bias = bias;

    // Certify the declared norms on the assembled operator.
    st.certified_rho = spectral_norm(Pd * st.M * Pd, 1e-12, 10000, derive_seed(in.seed, 1000 + t));
    st.certified_kappa = spectral_norm(Pd * st.M * Pc, 1e-12, 100000, derive_seed(in.seed, 2000 + t));
    const auto certify = [&](double declared, double got, const char* what) {
      const double tol = 1e-8 * std::max(1.0, declared);
      if (std::abs(got - declared) > tol)
        throw std::runtime_error(std::string("build_surrogate: ") + what + " block norm " +
                                 std::to_string(got) + " differs from declared " +
                                 std::to_string(declared) + " at step " + std::to_string(t));
    };
    certify(st.rho, st.certified_rho, "detail-to-detail");
    certify(st.kappa, st.certified_kappa, "coarse-to-detail");
    spec.steps.push_back(std::move(st));
  }
  return spec;
}

namespace {

struct ChainAccumulator {
  std::vector<Moments> detail, coarse, noise;
  void merge(const ChainAccumulator& o) {
    for (std::size_t i = 0; i < detail.size(); ++i) {
      detail[i].merge(o.detail[i]);
      coarse[i].merge(o.coarse[i]);
      noise[i].merge(o.noise[i]);
    }
  }
};

}  // namespace

EnergyTrace simulate(const SurrogateChainSpec& spec) {
  const std::size_t L = spec.length();
  const Eigen::MatrixXd Pc = coarse_projector_matrix(spec.shape, spec.op);
  const Eigen::Index d = Pc.rows();
  const Eigen::MatrixXd Pd = Eigen::MatrixXd::Identity(d, d) - Pc;
  std::vector<Eigen::MatrixXd> A(L + 1);
  for (std::size_t t = 0; t <= L; ++t) A[t] = mix_matrix(Pc, spec.weights[t]);

  const std::uint64_t nchunks = (spec.samples + kMcChunk - 1) / kMcChunk;
  ChainAccumulator init{std::vector<Moments>(L + 1), std::vector<Moments>(L + 1),
                        std::vector<Moments>(L + 1)};
  std::vector<ChainAccumulator> partial(nchunks, init);

  const auto record = [&](ChainAccumulator& acc, std::size_t t, const Eigen::MatrixXd& X) {
    const Eigen::VectorXd dn = (Pd * X).colwise().squaredNorm().transpose();
    const Eigen::VectorXd cn = (Pc * X).colwise().squaredNorm().transpose();
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
      acc.detail[t].add(dn(j));
      acc.coarse[t].add(cn(j));
    }
  };

  const long long nc = static_cast<long long>(nchunks);
#pragma omp parallel for schedule(dynamic)
  for (long long c = 0; c < nc; ++c) {
    const std::uint64_t cu = static_cast<std::uint64_t>(c);
    const std::uint64_t lo = cu * kMcChunk;
    const Eigen::Index n = static_cast<Eigen::Index>(std::min<std::uint64_t>(kMcChunk, spec.samples - lo));
    Rng rng(derive_seed(spec.seed, cu));
    ChainAccumulator& acc = partial[cu];

    Eigen::MatrixXd X = A[L] * gaussian_matrix(d, n, rng);
    record(acc, L, X);
    for (std::size_t t = L; t >= 1; --t) {
      const SurrogateStep& st = spec.step(t);
      const Eigen::MatrixXd H = gaussian_matrix(d, n, rng);
      const Eigen::VectorXd hn = (Pd * H).colwise().squaredNorm().transpose();
      for (Eigen::Index j = 0; j < n; ++j) acc.noise[t].add(hn(j));
      Eigen::MatrixXd next = st.M * (A[t] * X);
      next.colwise() += st.bias;
      next.noalias() += st.sigma * (A[t - 1] * H);
      X = std::move(next);
      record(acc, t - 1, X);
    }
  }

  ChainAccumulator total = init;
  for (const auto& p : partial) total.merge(p);
  EnergyTrace trace;
  trace.detail = std::move(total.detail);
  trace.coarse = std::move(total.coarse);
  trace.noise_detail = std::move(total.noise);
  trace.d_detail = spec.d_detail;
  return trace;
}

std::vector<BoundRow> check_bound(const EnergyTrace& trace, const SurrogateChainSpec& spec) {
  const std::size_t L = spec.length();
  if (trace.detail.size() != L + 1)
    throw std::invalid_argument("check_bound: trace does not match chain length");
  const double N = static_cast<double>(spec.d_detail);
  std::vector<BoundRow> rows;
  for (std::size_t t = L; t >= 1; --t) {
    const SurrogateStep& st = spec.step(t);
    const double wt = spec.weights[t];
    const double ws = spec.weights[t - 1];
    const double prop = st.rho * st.rho * (1.0 - wt) * (1.0 - wt);
    const double noise = st.sigma * st.sigma * (1.0 - ws) * (1.0 - ws) * N;
    BoundRow r;
    r.t = t;
    r.energy = trace.E(t - 1);
    r.bound = 3.0 * st.kappa * st.kappa * trace.C2(t) + 3.0 * prop * trace.E(t) +
              3.0 * st.bias_detail_energy + noise;
    r.clean = prop * trace.E(t) + noise;
    r.slack = 3.0 * (trace.detail[t - 1].std_error() + 3.0 * prop * trace.detail[t].std_error() +
                     3.0 * st.kappa * st.kappa * trace.coarse[t].std_error());
    r.margin = r.bound + r.slack - r.energy;
    r.holds = r.margin >= -kRoundoffFloor * std::max(1.0, r.bound);
    rows.push_back(r);
  }
  return rows;
}

IteratedReport iterated_bound(const EnergyTrace& trace, const SurrogateChainSpec& spec,
                              std::size_t t_in, std::size_t t_out, bool allow_zero_wmin) {
  if (!(t_in > t_out && t_in <= spec.length()))
    throw std::invalid_argument("iterated_bound: need L >= t_in > t_out");
  IteratedReport rep;
  rep.t_in = t_in;
  rep.t_out = t_out;
  rep.w_min = 1.0;
  double noise_max = 0.0;
  const double N = static_cast<double>(spec.d_detail);
  for (std::size_t t = t_in; t > t_out; --t) {
    const SurrogateStep& st = spec.step(t);
    if (st.kappa != 0.0 || st.bias_detail_energy != 0.0)
      throw std::invalid_argument("iterated_bound: step " + std::to_string(t) +
                                  " has coarse-to-detail forcing or detail bias; the geometric "
                                  "bound only covers kappa = 0, B = 0");
    if (!(st.rho < 1.0))
      throw std::invalid_argument("iterated_bound: step " + std::to_string(t) + " has rho >= 1");
    rep.rho = std::max(rep.rho, st.rho);
    rep.w_min = std::min(rep.w_min, spec.weights[t]);
    const double ws = spec.weights[t - 1];
    noise_max = std::max(noise_max, st.sigma * st.sigma * (1.0 - ws) * (1.0 - ws) * N);
  }
  if (!(rep.w_min > 0.0) && !allow_zero_wmin)
    throw std::invalid_argument("iterated_bound: w_min = 0 on the block; pass allow_zero_wmin "
                                "to check the baseline (no-stroke) contraction");
  rep.q = rep.rho * rep.rho * (1.0 - rep.w_min) * (1.0 - rep.w_min);
  const double n = static_cast<double>(t_in - t_out);
  const double qn = std::pow(rep.q, n);
  const double geom = rep.q == 1.0 ? n : (1.0 - qn) / (1.0 - rep.q);
  rep.entry = trace.E(t_in);
  rep.exit = trace.E(t_out);
  rep.bound = qn * rep.entry + geom * noise_max;
  rep.slack = 3.0 * (trace.detail[t_out].std_error() + qn * trace.detail[t_in].std_error());
  rep.holds = rep.exit <= rep.bound + rep.slack + kRoundoffFloor * std::max(1.0, rep.bound);
  return rep;
}

void write_energy_csv(std::ostream& os, const EnergyTrace& trace,
                      const std::vector<BoundRow>& rows) {
  os << "step,E,C2,N,bound,margin\n";
  os.precision(17);
  const std::size_t L = trace.detail.size() - 1;
  for (std::size_t t = L + 1; t-- > 0;) {
    os << t << ',' << trace.E(t) << ',' << trace.C2(t) << ',' << trace.d_detail << ',';
    const auto it = std::find_if(rows.begin(), rows.end(), [&](const BoundRow& r) { return r.t == t + 1; });
    if (it != rows.end()) os << it->bound << ',' << it->margin;
    else os << ',';
    os << '\n';
  }
}

}  // namespace ms
