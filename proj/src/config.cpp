#include "multistroke/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

namespace ms {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, sep)) out.push_back(trim(item));
  return out;
}

std::uint64_t to_u64(const std::string& v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError("expected a non-negative integer, got '" + v + "'");
  return out;
}

std::size_t to_size(const std::string& v) { return static_cast<std::size_t>(to_u64(v)); }

double to_double(const std::string& v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out))
    throw ConfigError("expected a finite number, got '" + v + "'");
  return out;
}

bool to_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("expected true or false, got '" + v + "'");
}

Shape to_shape(const std::string& v) {
  const auto parts = split(v, 'x');
  if (parts.size() != 3) throw ConfigError("expected a shape CxHxW, got '" + v + "'");
  return Shape{to_size(parts[0]), to_size(parts[1]), to_size(parts[2])};
}

template <typename E>
E to_enum(const std::string& v, std::initializer_list<std::pair<const char*, E>> choices) {
  std::string names;
  for (const auto& [name, value] : choices) {
    if (v == name) return value;
    names += names.empty() ? name : std::string(", ") + name;
  }
  throw ConfigError("expected one of {" + names + "}, got '" + v + "'");
}

struct Field {
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string shape_str(const Shape& s) {
  return std::to_string(s.channels) + "x" + std::to_string(s.height) + "x" + std::to_string(s.width);
}

#define MS_SIZE(key, member)                                                       \
  {key, {[](RunConfig& c, const std::string& v) { c.member = to_size(v); },        \
         [](const RunConfig& c) { return std::to_string(c.member); }}}
#define MS_REAL(key, member)                                                       \
  {key, {[](RunConfig& c, const std::string& v) { c.member = to_double(v); },      \
         [](const RunConfig& c) { return num(c.member); }}}

const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> table = {
      {"seed", {[](RunConfig& c, const std::string& v) { c.seed = to_u64(v); },
                [](const RunConfig& c) { return std::to_string(c.seed); }}},
      MS_SIZE("image_channels", image.channels),
      MS_SIZE("image_height", image.height),
      MS_SIZE("image_width", image.width),
      MS_SIZE("classes", classes),
      {"dataset", {[](RunConfig& c, const std::string& v) { c.dataset = v; },
                   [](const RunConfig& c) { return c.dataset; }}},
      {"labels", {[](RunConfig& c, const std::string& v) { c.labels = v; },
                  [](const RunConfig& c) { return c.labels; }}},
      MS_SIZE("dataset_size", dataset_size),
      MS_SIZE("hidden", hidden),
      MS_SIZE("time_embedding", time_embedding),
      MS_SIZE("class_embedding", class_embedding),
      MS_SIZE("T", total_steps),
      MS_REAL("beta_1", beta_first),
      MS_REAL("beta_T", beta_last),
      MS_SIZE("k", k),
      MS_REAL("f_rough", f_rough),
      MS_REAL("w_max", w_max),
      {"mode", {[](RunConfig& c, const std::string& v) {
                  c.mode = to_enum<LossMode>(v, {{"ddpm", LossMode::kDdpm},
                                                 {"multistroke", LossMode::kMultiStroke}});
                },
                [](const RunConfig& c) {
                  return std::string(c.mode == LossMode::kDdpm ? "ddpm" : "multistroke");
                }}},
      {"target_alignment",
       {[](RunConfig& c, const std::string& v) {
          c.alignment = to_enum<TargetAlignment>(
              v, {{"current", TargetAlignment::kCurrent}, {"next", TargetAlignment::kNextState}});
        },
        [](const RunConfig& c) {
          return std::string(c.alignment == TargetAlignment::kCurrent ? "current" : "next");
        }}},
      MS_REAL("lr", lr),
      MS_REAL("weight_decay", weight_decay),
      MS_REAL("clip_norm", clip_norm),
      MS_SIZE("batch_size", batch_size),
      MS_SIZE("steps", steps),
      MS_REAL("label_drop", label_drop),
      MS_SIZE("buckets", buckets),
      {"checkpoint", {[](RunConfig& c, const std::string& v) { c.checkpoint = v; },
                      [](const RunConfig& c) { return c.checkpoint; }}},
      {"sample_steps", {[](RunConfig& c, const std::string& v) {
                          c.sample_steps.clear();
                          for (const auto& p : split(v, ',')) c.sample_steps.push_back(to_size(p));
                          if (c.sample_steps.empty()) throw ConfigError("empty step list");
                        },
                        [](const RunConfig& c) {
                          std::string s;
                          for (auto n : c.sample_steps) s += (s.empty() ? "" : ",") + std::to_string(n);
                          return s;
                        }}},
      MS_SIZE("num_samples", num_samples),
      {"variance", {[](RunConfig& c, const std::string& v) {
                      c.variance = to_enum<VarianceConvention>(
                          v, {{"fixedlarge", VarianceConvention::kFixedLarge},
                              {"fixedsmall", VarianceConvention::kFixedSmall}});
                    },
                    [](const RunConfig& c) {
                      return std::string(c.variance == VarianceConvention::kFixedLarge ? "fixedlarge"
                                                                                      : "fixedsmall");
                    }}},
      {"label", {[](RunConfig& c, const std::string& v) {
                   c.label = v == "cycle" ? -1 : static_cast<long long>(to_u64(v));
                 },
                 [](const RunConfig& c) {
                   return c.label < 0 ? std::string("cycle") : std::to_string(c.label);
                 }}},
      {"export_pgm", {[](RunConfig& c, const std::string& v) { c.export_pgm = to_bool(v); },
                      [](const RunConfig& c) { return std::string(c.export_pgm ? "true" : "false"); }}},
      {"surrogate_shape", {[](RunConfig& c, const std::string& v) { c.surrogate_shape = to_shape(v); },
                           [](const RunConfig& c) { return shape_str(c.surrogate_shape); }}},
      MS_SIZE("surrogate_k", surrogate_k),
      MS_SIZE("chain_length", chain_length),
      MS_REAL("rho", rho),
      MS_REAL("kappa", kappa),
      MS_REAL("bias_energy", bias_energy),
      MS_REAL("sigma", sigma),
      MS_REAL("surrogate_w", surrogate_w),
      MS_SIZE("mc_samples", mc_samples),
      {"detail_block", {[](RunConfig& c, const std::string& v) {
                          c.detail_block = to_enum<DetailBlockKind>(
                              v, {{"orthogonal", DetailBlockKind::kRandomOrthogonal},
                                  {"identity", DetailBlockKind::kScaledIdentity}});
                        },
                        [](const RunConfig& c) {
                          return std::string(c.detail_block == DetailBlockKind::kScaledIdentity
                                                 ? "identity"
                                                 : "orthogonal");
                        }}},
      MS_REAL("coarse_gain", coarse_gain),
      {"sample_dirs", {[](RunConfig& c, const std::string& v) {
                         c.sample_dirs = split(v, ',');
                         std::erase(c.sample_dirs, std::string());
                       },
                       [](const RunConfig& c) {
                         std::string s;
                         for (const auto& d : c.sample_dirs) s += (s.empty() ? "" : ",") + d;
                         return s;
                       }}},
      {"reference_mean", {[](RunConfig& c, const std::string& v) {
                            c.reference_mean = to_enum<ReferenceMean>(
                                v, {{"per_class", ReferenceMean::kPerClass},
                                    {"global", ReferenceMean::kGlobal}});
                          },
                          [](const RunConfig& c) {
                            return std::string(c.reference_mean == ReferenceMean::kGlobal ? "global"
                                                                                         : "per_class");
                          }}},
      MS_REAL("calibration_fraction", calibration_fraction),
  };
  return table;
}

#undef MS_SIZE
#undef MS_REAL

const Field* find_field(const std::string& key) {
  for (const auto& [name, f] : fields())
    if (name == key) return &f;
  return nullptr;
}

std::string resolve(const std::string& p, const std::filesystem::path& base) {
  if (p.empty() || p == "synthetic") return p;
  const std::filesystem::path path(p);
  return (path.is_absolute() || base.empty() ? path : base / path).string();
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [name, f] : fields()) k.push_back(name);
    return k;
  }();
  return keys;
}

NoiseSchedule RunConfig::noise_schedule() const {
  return linear_beta_schedule(total_steps, beta_first, beta_last);
}

RoughnessSchedule RunConfig::roughness() const { return RoughnessSchedule(total_steps, f_rough, w_max); }

ModelConfig RunConfig::model_config() const {
  ModelConfig m;
  m.image = image;
  m.num_classes = classes;
  m.time_embedding = time_embedding;
  m.class_embedding = class_embedding;
  m.hidden = hidden;
  m.total_steps = total_steps;
  return m;
}

TrainConfig RunConfig::train_config() const {
  TrainConfig t;
  t.optim.learning_rate = lr;
  t.optim.weight_decay = weight_decay;
  t.optim.clip_norm = clip_norm;
  t.batch_size = batch_size;
  t.steps = steps;
  t.label_drop = label_drop;
  t.seed = seed;
  t.buckets = buckets;
  t.mode = mode;
  t.align = alignment;
  return t;
}

SurrogateInputs RunConfig::surrogate_inputs() const {
  SurrogateInputs in;
  in.shape = surrogate_shape;
  in.k = surrogate_k;
  in.rho.assign(chain_length, rho);
  in.kappa.assign(chain_length, kappa);
  in.bias_detail_energy.assign(chain_length, bias_energy);
  in.sigma.assign(chain_length, sigma);
  // w_0 = 0: the step into state 0 injects no noise anyway, and the
  // destination weight of the final state is zero by convention.
  in.weights.assign(chain_length + 1, surrogate_w);
  in.weights[0] = 0.0;
  in.coarse_gain = coarse_gain;
  in.detail_block = detail_block;
  in.samples = mc_samples;
  in.seed = seed;
  return in;
}

void RunConfig::validate() const {
  std::vector<std::string> errs;
  const auto need = [&](bool ok, const std::string& msg) {
    if (!ok) errs.push_back(msg);
  };
  need(image.channels > 0 && image.height > 0 && image.width > 0,
       "image_channels, image_height and image_width must be positive");
  need(classes >= 1, "classes must be at least 1");
  need(total_steps >= 1, "T must be at least 1");
  need(beta_first > 0.0 && beta_first <= beta_last && beta_last < 1.0,
       "need 0 < beta_1 <= beta_T < 1");
  need(k >= 1, "k must be at least 1");
  if (k >= 1) {
    if (image.height % k != 0)
      errs.push_back("k=" + std::to_string(k) + " does not divide image_height=" + std::to_string(image.height));
    if (image.width % k != 0)
      errs.push_back("k=" + std::to_string(k) + " does not divide image_width=" + std::to_string(image.width));
  }
  need(f_rough >= 0.0 && f_rough <= 1.0, "f_rough must lie in [0, 1]");
  need(w_max >= 0.0 && w_max < 1.0, "w_max must lie in [0, 1)");
  need(lr > 0.0, "lr must be positive");
  need(weight_decay >= 0.0, "weight_decay must be >= 0");
  need(clip_norm >= 0.0, "clip_norm must be >= 0 (0 disables clipping)");
  need(batch_size >= 1, "batch_size must be at least 1");
  need(label_drop >= 0.0 && label_drop <= 1.0, "label_drop must lie in [0, 1]");
  need(buckets >= 1 && buckets <= total_steps, "buckets must lie in [1, T]");
  need(hidden >= 1 && time_embedding >= 2 && time_embedding % 2 == 0 && class_embedding >= 1,
       "hidden >= 1, class_embedding >= 1 and an even time_embedding >= 2 are required");
  need(dataset_size >= 1, "dataset_size must be at least 1");
  for (auto n : sample_steps)
    need(n >= 1 && n <= total_steps, "sample_steps entry " + std::to_string(n) + " must lie in [1, T]");
  need(num_samples >= 1, "num_samples must be at least 1");
  need(label >= -1 && label <= static_cast<long long>(classes), "label must be 'cycle' or in [0, classes]");
  need(surrogate_shape.size() > 0, "surrogate_shape must be positive");
  need(surrogate_k >= 1 && surrogate_shape.height % std::max<std::size_t>(surrogate_k, 1) == 0 &&
           surrogate_shape.width % std::max<std::size_t>(surrogate_k, 1) == 0,
       "surrogate_k must divide the surrogate_shape height and width");
  need(chain_length >= 1, "chain_length must be at least 1");
  need(rho >= 0.0 && kappa >= 0.0 && bias_energy >= 0.0 && sigma >= 0.0,
       "rho, kappa, bias_energy and sigma must be >= 0");
  need(surrogate_w >= 0.0 && surrogate_w < 1.0, "surrogate_w must lie in [0, 1)");
  need(mc_samples >= 2, "mc_samples must be at least 2");
  need(calibration_fraction > 0.0 && calibration_fraction < 1.0, "calibration_fraction must lie in (0, 1)");

  namespace fs = std::filesystem;
  if (dataset != "synthetic") {
    need(fs::is_regular_file(dataset), "dataset file '" + dataset + "' does not exist");
    need(!labels.empty(), "a dataset path requires a labels file");
  }
  if (!labels.empty()) need(fs::is_regular_file(labels), "labels file '" + labels + "' does not exist");
  if (!checkpoint.empty())
    need(fs::is_regular_file(checkpoint), "checkpoint file '" + checkpoint + "' does not exist");
  for (const auto& d : sample_dirs)
    need(fs::is_directory(d), "sample directory '" + d + "' does not exist");

  if (!errs.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& e : errs) msg += "\n  " + e;
    throw ConfigError(msg);
  }
}

RunConfig parse_config(const std::string& text, const std::string& origin,
                       const std::filesystem::path& base_dir) {
  RunConfig c;
  std::vector<std::string> errs;
  std::istringstream is(text);
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(is, raw)) {
    ++lineno;
    const std::string where = origin + ":" + std::to_string(lineno) + ": ";
    std::string line = raw;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      errs.push_back(where + "expected key=value, got '" + line + "'");
      continue;
    }
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    const Field* f = find_field(key);
    if (!f) {
      errs.push_back(where + "unknown key '" + key + "'");
      continue;
    }
    if (c.explicit_keys.contains(key)) {
      errs.push_back(where + "duplicate key '" + key + "'");
      continue;
    }
    if (value.empty()) {
      errs.push_back(where + "missing value for '" + key + "'");
      continue;
    }
    try {
      f->set(c, value);
      c.explicit_keys.insert(key);
    } catch (const ConfigError& e) {
      errs.push_back(where + key + ": " + e.what());
    }
  }
  if (!errs.empty()) {
    std::string msg;
    for (const auto& e : errs) msg += (msg.empty() ? "" : "\n") + e;
    throw ConfigError(msg);
  }
  c.dataset = resolve(c.dataset, base_dir);
  c.labels = resolve(c.labels, base_dir);
  c.checkpoint = resolve(c.checkpoint, base_dir);
  for (auto& d : c.sample_dirs) d = resolve(d, base_dir);
  try {
    c.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::ostringstream buf;
  buf << is.rdbuf();
  return parse_config(buf.str(), path.string(), path.parent_path());
}

void write_config(std::ostream& os, const RunConfig& c) {
  for (const auto& [name, f] : fields()) {
    const std::string v = f.get(c);
    if (!v.empty()) os << name << " = " << v << '\n';
  }
}

}  // namespace ms
