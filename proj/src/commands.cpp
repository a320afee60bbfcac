#include "multistroke/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <ostream>

#include "multistroke/checks.hpp"
#include "multistroke/config.hpp"
#include "multistroke/dataset.hpp"
#include "multistroke/diagnostics.hpp"
#include "multistroke/io.hpp"
#include "multistroke/manifest.hpp"
#include "multistroke/sampler.hpp"
#include "multistroke/surrogate.hpp"
#include "multistroke/train.hpp"

namespace ms {

namespace fs = std::filesystem;

namespace {

RunConfig resolve_config(const CommandOptions& opts) {
  RunConfig c = opts.config ? load_config(*opts.config) : parse_config("", "defaults");
  if (opts.seed) c.seed = *opts.seed;
  return c;
}

std::ofstream open_text(const fs::path& p) {
  std::ofstream os(p);
  if (!os) throw std::runtime_error("cannot write '" + p.string() + "'");
  os.precision(17);
  return os;
}

void require_out(const CommandOptions& opts) {
  if (opts.out.empty()) throw ConfigError("--out <dir> is required for this command");
}

LabeledImages load_reference(const RunConfig& c) {
  if (c.dataset == "synthetic") return make_synthetic_dataset(c.image, c.classes, c.dataset_size, c.seed);
  LabeledImages d = io::read_dataset(c.dataset, c.labels);
  if (d.shape != c.image)
    throw ConfigError("dataset images are " + d.shape.str() + " but the config declares " + c.image.str());
  if (d.num_classes > c.classes)
    throw ConfigError("dataset has labels up to " + std::to_string(d.num_classes) + " but classes=" +
                      std::to_string(c.classes));
  d.num_classes = c.classes;
  return d;
}

// Runs `fn`; any exception becomes a one-line message and exit code 2.
// Config, format and dimension errors all land here, as do I/O failures.
template <typename F>
int guarded(const char* command, std::ostream& err, F&& fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    err << command << ": " << e.what() << '\n';
    return kExitUsage;
  }
}

void finish(const fs::path& dir, const RunConfig& c, std::ostream& out) {
  {
    auto os = open_text(dir / "config.txt");
    write_config(os, c);
  }
  write_manifest(dir, c.seed);
  out << "wrote " << (dir / kManifestName).string() << '\n';
}

}  // namespace

std::string step_tag(std::size_t num_steps) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "steps_%03zu", num_steps);
  return buf;
}

int cmd_verify(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded("verify", err, [&] {
    VerifyOptions v;
    v.filter = opts.filter;
    v.inject_fault = opts.inject_fault;
    if (opts.seed) v.seed = *opts.seed;
    if (!v.filter.empty()) {
      const auto& all = verify_checks();
      if (std::none_of(all.begin(), all.end(), [&](const NamedCheck& c) { return c.name.find(v.filter) != std::string::npos; }))
        throw ConfigError("--filter '" + v.filter + "' matches no check");
    }
    if (!opts.out.empty()) create_fresh_directory(opts.out);
    const auto results = run_verify(v, &out);
    const auto failed = std::count_if(results.begin(), results.end(), [](const CheckResult& r) { return !r.pass; });
    out << results.size() << " checks, " << failed << " failed\n";
    if (!opts.out.empty()) {
      auto os = open_text(opts.out / "checks.csv");
      write_check_csv(os, results);
      os.close();
      write_manifest(opts.out, v.seed);
    }
    return failed == 0 ? kExitOk : kExitCheckFailure;
  });
}

int cmd_train(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded("train", err, [&] {
    require_out(opts);
    const RunConfig c = resolve_config(opts);
    const LabeledImages data = load_reference(c);
    const NoiseSchedule sched = c.noise_schedule();
    const RoughnessSchedule rough = c.roughness();
    const StrokeOperator op(c.k);
    create_fresh_directory(opts.out);

    DenoiserModel model(c.model_config(), derive_seed(c.seed, 1));
    const TrainConfig tc = c.train_config();
    const TrainResult result = train(model, data, sched, rough, op, tc);

    io::write_checkpoint(opts.out / "checkpoint.mscp", model);
    io::write_dataset(opts.out / "dataset_images.mstk", opts.out / "dataset_labels.mstk", data);
    {
      auto os = open_text(opts.out / "metrics.csv");
      write_metrics_csv(os, result);
    }
    // Bucketed losses over the whole run and over the last 500 steps. The
    // normalized column divides by the expected shrink of a pure-noise
    // residual, (d_c + (1 - w)^2 d_d) / d, averaged over the bucket.
    {
      auto os = open_text(opts.out / "buckets.csv");
      os << "window,bucket,t_first,t_last,mean_w,count,raw_loss,normalized_loss\n";
      const double dc = static_cast<double>(op.coarse_dim(c.image));
      const double dd = static_cast<double>(op.detail_dim(c.image));
      const std::size_t tail_first = tc.steps > 500 ? tc.steps - 499 : 1;
      const std::pair<const char*, LossBuckets> windows[] = {{"all", result.totals},
                                                             {"last500", result.window(tail_first, tc.steps)}};
      for (const auto& [name, b] : windows) {
        for (std::size_t i = 0; i < b.size(); ++i) {
          const auto [lo, hi] = b.range(i);
          double wsum = 0.0, fsum = 0.0;
          for (std::size_t t = lo; t <= hi; ++t) {
            const std::size_t wt = tc.align == TargetAlignment::kNextState ? t - 1 : t;
            const double w = tc.mode == LossMode::kMultiStroke ? rough.weight(wt) : 0.0;
            wsum += w;
            fsum += (dc + (1 - w) * (1 - w) * dd) / (dc + dd);
          }
          const double n = static_cast<double>(hi - lo + 1);
          os << name << ',' << i << ',' << lo << ',' << hi << ',' << wsum / n << ',' << b.count(i) << ',';
          if (b.count(i) > 0) os << b.mean(i) << ',' << b.mean(i) / (fsum / n);
          else os << ',';
          os << '\n';
        }
      }
    }
    const double final_loss = result.history.empty() ? 0.0 : result.history.back().loss;
    out << "trained " << tc.steps << " steps (" << (tc.mode == LossMode::kDdpm ? "ddpm" : "multistroke")
        << "), final batch loss " << final_loss << '\n';
    finish(opts.out, c, out);
    return kExitOk;
  });
}

int cmd_sample(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded("sample", err, [&] {
    require_out(opts);
    const RunConfig c = resolve_config(opts);
    if (c.checkpoint.empty()) throw ConfigError("sample needs checkpoint=<path> in the config");
    const DenoiserModel model = io::read_checkpoint(c.checkpoint);
    const ModelConfig& mc = model.config();
    if (mc.total_steps != c.total_steps)
      throw ConfigError("checkpoint was trained with T=" + std::to_string(mc.total_steps) + " but the config has T=" +
                        std::to_string(c.total_steps));
    const StrokeOperator op(c.k);
    op.check(mc.image);
    if (c.label > static_cast<long long>(mc.num_classes))
      throw ConfigError("label " + std::to_string(c.label) + " exceeds the checkpoint's " +
                        std::to_string(mc.num_classes) + " classes");
    const NoiseSchedule sched = c.noise_schedule();
    const RoughnessSchedule rough = c.roughness();
    const ModelPredictor predictor(model);
    create_fresh_directory(opts.out);

    std::vector<std::size_t> labels(c.num_samples);
    for (std::size_t i = 0; i < labels.size(); ++i)
      labels[i] = c.label < 0 ? 1 + i % mc.num_classes : static_cast<std::size_t>(c.label);

    for (const std::size_t n : c.sample_steps) {
      SamplePlan plan{subsample_schedule(c.total_steps, n), c.variance,
                      c.mode == LossMode::kDdpm ? SampleMode::kDdpm : SampleMode::kMultiStroke, c.seed};
      plan.validate(c.total_steps);
      std::vector<ImageTensor> samples(c.num_samples);
      std::vector<std::exception_ptr> errors(c.num_samples);
      const long long ns = static_cast<long long>(c.num_samples);
      // Sample i always uses stream i, so budgets are paired sample by sample.
#pragma omp parallel for schedule(dynamic)
      for (long long i = 0; i < ns; ++i) {
        const auto iu = static_cast<std::size_t>(i);
        try {
          Rng rng(derive_seed(c.seed, iu));
          samples[iu] = sample(predictor, sched, rough, op, plan, mc.image, labels[iu], rng);
        } catch (...) {
          errors[iu] = std::current_exception();
        }
      }
      for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

      const fs::path dir = opts.out / step_tag(n);
      fs::create_directories(dir);
      io::write_tensor_file(dir / "samples.mstk", io::stack_images(samples));
      io::write_tensor_file(dir / "labels.mstk", io::labels_to_tensor(labels));
      if (c.export_pgm) {
        for (std::size_t i = 0; i < samples.size(); ++i) {
          char name[32];
          std::snprintf(name, sizeof name, "sample_%04zu.pgm", i);
          io::write_pgm(dir / name, grayscale(samples[i]), -1.0, 1.0);
        }
      }
      out << "sampled " << c.num_samples << " images with " << n << " steps into " << dir.string() << '\n';
    }
    finish(opts.out, c, out);
    return kExitOk;
  });
}

int cmd_simulate(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded("simulate", err, [&] {
    require_out(opts);
    const RunConfig c = resolve_config(opts);
    const SurrogateChainSpec spec = build_surrogate(c.surrogate_inputs());
    create_fresh_directory(opts.out);
    const EnergyTrace trace = simulate(spec);
    const auto rows = check_bound(trace, spec);
    {
      auto os = open_text(opts.out / "energy.csv");
      write_energy_csv(os, trace, rows);
    }
    std::vector<CheckResult> checks;
    for (const auto& r : rows)
      checks.push_back({"bound[t=" + std::to_string(r.t) + "]", r.energy, r.bound + r.slack, r.holds,
                        "margin " + std::to_string(r.margin)});
    if (c.kappa == 0.0 && c.bias_energy == 0.0 && c.rho < 1.0 && c.surrogate_w > 0.0) {
      const auto it = iterated_bound(trace, spec, spec.length(), 0);
      checks.push_back({"iterated[" + std::to_string(it.t_in) + "->" + std::to_string(it.t_out) + "]", it.exit,
                        it.bound + it.slack, it.holds, "q " + std::to_string(it.q)});
    }
    {
      auto os = open_text(opts.out / "bounds.csv");
      write_check_csv(os, checks);
    }
    write_check_text(out, checks);
    finish(opts.out, c, out);
    const bool ok = std::all_of(checks.begin(), checks.end(), [](const CheckResult& r) { return r.pass; });
    return ok ? kExitOk : kExitCheckFailure;
  });
}

int cmd_audit(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded("audit", err, [&] {
    require_out(opts);
    const RunConfig c = resolve_config(opts);
    if (c.sample_dirs.empty()) throw ConfigError("audit needs sample_dirs=<dir>[,<dir>...] in the config");
    const LabeledImages ref = load_reference(c);
    const std::size_t K = c.classes;

    // Deterministic split: the first part fits class centers, the rest
    // calibrates the distance tables.
    const std::size_t n_fit = static_cast<std::size_t>(std::floor((1.0 - c.calibration_fraction) * ref.size()));
    if (n_fit == 0 || n_fit == ref.size()) throw ConfigError("reference set too small to split for calibration");
    const std::vector<ImageTensor> fit_x(ref.images.begin(), ref.images.begin() + static_cast<long>(n_fit));
    const std::vector<std::size_t> fit_y(ref.labels.begin(), ref.labels.begin() + static_cast<long>(n_fit));
    const std::vector<ImageTensor> cal_x(ref.images.begin() + static_cast<long>(n_fit), ref.images.end());
    const std::vector<std::size_t> cal_y(ref.labels.begin() + static_cast<long>(n_fit), ref.labels.end());
    const ClassCalibration calib(fit_x, fit_y, cal_x, cal_y, K);

    const auto mean_of = [](const std::vector<ImageTensor>& xs) {
      ImageTensor m(xs.front().shape());
      for (const auto& x : xs) m += x;
      m *= 1.0 / static_cast<double>(xs.size());
      return m;
    };
    const ImageTensor global_mean = mean_of(ref.images);
    std::vector<ImageTensor> class_mean;
    for (std::size_t y = 1; y <= K; ++y) {
      const auto xs = images_of_class(ref, y);
      class_mean.push_back(xs.empty() ? global_mean : mean_of(xs));
    }
    const BandMask low = BandMask::make(c.image.height, c.image.width, Band::kLow);
    const BandMask high = BandMask::make(c.image.height, c.image.width, Band::kHigh);

    create_fresh_directory(opts.out);
    auto csv = open_text(opts.out / "audit.csv");
    csv << "set,metric,group,value\n";
    auto wide = open_text(opts.out / "band_snr.csv");
    wide << "set,low_db,high_db\n";

    for (const auto& dir_str : c.sample_dirs) {
      const fs::path dir(dir_str);
      const fs::path norm = dir.filename().empty() ? dir.parent_path() : dir;
      const std::string parent = norm.parent_path().filename().string();
      const std::string set = parent.empty() ? norm.filename().string() : parent + "_" + norm.filename().string();
      const auto samples = io::unstack_images(io::read_tensor_file(dir / "samples.mstk"));
      const auto labels = io::tensor_to_labels(io::read_tensor_file(dir / "labels.mstk"));
      if (samples.size() != labels.size() || samples.empty())
        throw io::FormatError(dir.string() + ": samples and labels differ in count or are empty");
      if (samples.front().shape() != c.image)
        throw ConfigError(dir.string() + ": samples are " + samples.front().shape().str() + ", config declares " +
                          c.image.str());

      // Group by reference mean: per-class means for labelled samples (the
      // null label and the global mode use the global mean).
      std::vector<std::vector<ImageTensor>> groups(K + 1);
      for (std::size_t i = 0; i < samples.size(); ++i) {
        if (labels[i] > K) throw ConfigError(dir.string() + ": label " + std::to_string(labels[i]) + " out of range");
        groups[c.reference_mean == ReferenceMean::kPerClass ? labels[i] : 0].push_back(samples[i]);
      }
      double low_total = 0.0, high_total = 0.0;
      for (std::size_t g = 0; g <= K; ++g) {
        if (groups[g].empty()) continue;
        const ImageTensor& mu = g == 0 ? global_mean : class_mean[g - 1];
        const double lo = band_snr(groups[g], mu, low), hi = band_snr(groups[g], mu, high);
        const double n = static_cast<double>(groups[g].size());
        low_total += lo * n;
        high_total += hi * n;
        const std::string group = g == 0 ? "global" : "class_" + std::to_string(g);
        csv << set << ",band_snr_low_db," << group << ',' << lo << '\n';
        csv << set << ",band_snr_high_db," << group << ',' << hi << '\n';
      }
      const double n = static_cast<double>(samples.size());
      csv << set << ",band_snr_low_db,all," << low_total / n << '\n';
      csv << set << ",band_snr_high_db,all," << high_total / n << '\n';
      wide << set << ',' << low_total / n << ',' << high_total / n << '\n';

      std::vector<Moments> score(K + 1);
      for (std::size_t i = 0; i < samples.size(); ++i) {
        if (labels[i] == 0) continue;
        const double s = 100.0 * one_class_score(samples[i], labels[i], calib);
        score[labels[i]].add(s);
        score[0].add(s);
      }
      for (std::size_t y = 1; y <= K; ++y)
        if (score[y].n > 0) csv << set << ",one_class_score," << "class_" << y << ',' << score[y].mean << '\n';
      if (score[0].n > 0) csv << set << ",one_class_score,all," << score[0].mean << '\n';

      if (c.export_pgm) {
        Grid avg{c.image.height, c.image.width, std::vector<double>(c.image.plane(), 0.0)};
        for (const auto& x : samples) {
          const Grid g = dft2_logmag(grayscale(x));
          for (std::size_t i = 0; i < avg.values.size(); ++i) avg.values[i] += g.values[i] / n;
        }
        const double hi = *std::max_element(avg.values.begin(), avg.values.end());
        io::write_pgm(opts.out / ("logmag_" + set + ".pgm"), avg, 0.0, hi > 0.0 ? hi : 1.0);
      }
      out << set << ": low-band SNR " << low_total / n << " dB, high-band SNR " << high_total / n << " dB";
      if (score[0].n > 0) out << ", one-class score " << score[0].mean;
      out << '\n';
    }
    csv.close();
    wide.close();
    finish(opts.out, c, out);
    return kExitOk;
  });
}

}  // namespace ms
