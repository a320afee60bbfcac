#include "multistroke/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace ms::io {

namespace {

void put_u32(std::ostream& os, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(b, 4);
}

void put_u64(std::ostream& os, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(b, 8);
}

void put_f64(std::ostream& os, double v) { put_u64(os, std::bit_cast<std::uint64_t>(v)); }

void get_bytes(std::istream& is, char* dst, std::size_t n, const char* what) {
  is.read(dst, static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(is.gcount()) != n)
    throw FormatError(std::string("truncated file while reading ") + what);
}

std::uint32_t get_u32(std::istream& is, const char* what) {
  unsigned char b[4];
  get_bytes(is, reinterpret_cast<char*>(b), 4, what);
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

std::uint64_t get_u64(std::istream& is, const char* what) {
  unsigned char b[8];
  get_bytes(is, reinterpret_cast<char*>(b), 8, what);
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

double get_f64(std::istream& is, const char* what) { return std::bit_cast<double>(get_u64(is, what)); }

void check_magic(std::istream& is, const char (&magic)[4], const char* kind) {
  char got[4];
  get_bytes(is, got, 4, "magic");
  if (std::memcmp(got, magic, 4) != 0)
    throw FormatError(std::string("not a ") + kind + " file: bad magic bytes");
}

std::uint64_t product(const std::vector<std::uint64_t>& dims) {
  std::uint64_t n = 1;
  for (auto d : dims) {
    if (d != 0 && n > UINT64_MAX / d) throw FormatError("tensor dims overflow");
    n *= d;
  }
  return n;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  return os;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open '" + path.string() + "' for reading");
  return is;
}

}  // namespace

std::uint64_t TensorFile::element_count() const { return product(dims); }

void write_tensor(std::ostream& os, const TensorFile& t) {
  if (t.element_count() != t.values.size())
    throw FormatError("tensor payload size does not match dims");
  os.write(kTensorMagic, 4);
  put_u32(os, kTensorVersion);
  put_u32(os, static_cast<std::uint32_t>(t.dims.size()));
  for (auto d : t.dims) put_u64(os, d);
  for (double v : t.values) put_f64(os, v);
  if (!os) throw std::runtime_error("write failed");
}

TensorFile read_tensor(std::istream& is) {
  check_magic(is, kTensorMagic, "tensor");
  const std::uint32_t version = get_u32(is, "version");
  if (version != kTensorVersion)
    throw FormatError("unsupported tensor file version " + std::to_string(version));
  const std::uint32_t rank = get_u32(is, "rank");
  if (rank > 16) throw FormatError("implausible tensor rank " + std::to_string(rank));
  TensorFile t;
  for (std::uint32_t i = 0; i < rank; ++i) t.dims.push_back(get_u64(is, "dims"));
  const std::uint64_t n = t.element_count();
  if (n > (std::uint64_t{1} << 32)) throw FormatError("tensor too large");
  t.values.resize(n);
  for (auto& v : t.values) v = get_f64(is, "payload");
  if (is.peek() != std::char_traits<char>::eof()) throw FormatError("trailing bytes after tensor payload");
  return t;
}

void write_tensor_file(const std::filesystem::path& path, const TensorFile& t) {
  auto os = open_out(path);
  write_tensor(os, t);
}

TensorFile read_tensor_file(const std::filesystem::path& path) {
  auto is = open_in(path);
  try {
    return read_tensor(is);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

TensorFile to_tensor_file(const ImageTensor& x) {
  return TensorFile{{x.channels(), x.height(), x.width()}, x.vector()};
}

ImageTensor to_image(const TensorFile& t) {
  if (t.dims.size() != 3) throw FormatError("expected a rank-3 (C, H, W) tensor");
  return ImageTensor(Shape{t.dims[0], t.dims[1], t.dims[2]}, t.values);
}

TensorFile stack_images(const std::vector<ImageTensor>& images) {
  if (images.empty()) throw std::invalid_argument("stack_images: no images");
  const Shape s = images.front().shape();
  TensorFile t{{images.size(), s.channels, s.height, s.width}, {}};
  t.values.reserve(images.size() * s.size());
  for (const auto& im : images) {
    if (im.shape() != s) throw std::invalid_argument("stack_images: images differ in shape");
    t.values.insert(t.values.end(), im.values().begin(), im.values().end());
  }
  return t;
}

std::vector<ImageTensor> unstack_images(const TensorFile& t) {
  if (t.dims.size() != 4) throw FormatError("expected a rank-4 (N, C, H, W) tensor");
  const Shape s{t.dims[1], t.dims[2], t.dims[3]};
  std::vector<ImageTensor> out;
  out.reserve(t.dims[0]);
  for (std::uint64_t n = 0; n < t.dims[0]; ++n) {
    const auto first = t.values.begin() + static_cast<std::ptrdiff_t>(n * s.size());
    out.emplace_back(s, std::vector<double>(first, first + static_cast<std::ptrdiff_t>(s.size())));
  }
  return out;
}

TensorFile labels_to_tensor(const std::vector<std::size_t>& labels) {
  TensorFile t{{labels.size()}, {}};
  for (auto l : labels) t.values.push_back(static_cast<double>(l));
  return t;
}

std::vector<std::size_t> tensor_to_labels(const TensorFile& t) {
  if (t.dims.size() != 1) throw FormatError("expected a rank-1 label tensor");
  std::vector<std::size_t> out;
  for (double v : t.values) {
    if (!(v >= 0.0) || v != std::floor(v)) throw FormatError("label tensor holds a non-integer value");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

void write_dataset(const std::filesystem::path& images, const std::filesystem::path& labels,
                   const LabeledImages& data) {
  write_tensor_file(images, stack_images(data.images));
  write_tensor_file(labels, labels_to_tensor(data.labels));
}

LabeledImages read_dataset(const std::filesystem::path& images, const std::filesystem::path& labels) {
  LabeledImages out;
  out.images = unstack_images(read_tensor_file(images));
  out.labels = tensor_to_labels(read_tensor_file(labels));
  if (out.images.size() != out.labels.size())
    throw FormatError("dataset: " + std::to_string(out.images.size()) + " images but " +
                      std::to_string(out.labels.size()) + " labels");
  if (out.images.empty()) throw FormatError("dataset is empty");
  out.shape = out.images.front().shape();
  out.num_classes = *std::max_element(out.labels.begin(), out.labels.end());
  if (std::find(out.labels.begin(), out.labels.end(), 0) != out.labels.end())
    throw FormatError("dataset labels must be 1..K (0 is reserved for the null class)");
  return out;
}

namespace {

void write_block(std::ostream& os, const std::string& name, const std::vector<std::size_t>& dims,
                 const std::vector<double>& values) {
  put_u32(os, static_cast<std::uint32_t>(name.size()));
  os.write(name.data(), static_cast<std::streamsize>(name.size()));
  put_u32(os, static_cast<std::uint32_t>(dims.size()));
  for (auto d : dims) put_u64(os, d);
  for (double v : values) put_f64(os, v);
}

ParamBlock read_block(std::istream& is) {
  ParamBlock b;
  const std::uint32_t len = get_u32(is, "block name length");
  if (len > 4096) throw FormatError("implausible block name length");
  b.name.resize(len);
  get_bytes(is, b.name.data(), len, "block name");
  const std::uint32_t rank = get_u32(is, "block rank");
  if (rank > 8) throw FormatError("implausible block rank");
  std::vector<std::uint64_t> dims;
  for (std::uint32_t i = 0; i < rank; ++i) dims.push_back(get_u64(is, "block dims"));
  const std::uint64_t n = product(dims);
  if (n > (std::uint64_t{1} << 32)) throw FormatError("block too large");
  b.dims.assign(dims.begin(), dims.end());
  b.values.resize(n);
  for (auto& v : b.values) v = get_f64(is, "block values");
  return b;
}

}  // namespace

void write_checkpoint(const std::filesystem::path& path, const DenoiserModel& model) {
  auto os = open_out(path);
  const ModelConfig& c = model.config();
  os.write(kCheckpointMagic, 4);
  put_u32(os, kCheckpointVersion);
  put_u32(os, static_cast<std::uint32_t>(model.parameters().size() + 1));
  const std::vector<double> cfg{
      static_cast<double>(c.image.channels), static_cast<double>(c.image.height),
      static_cast<double>(c.image.width),    static_cast<double>(c.num_classes),
      static_cast<double>(c.time_embedding), static_cast<double>(c.class_embedding),
      static_cast<double>(c.hidden),         static_cast<double>(c.total_steps)};
  write_block(os, "config", {cfg.size()}, cfg);
  for (const auto& p : model.parameters()) write_block(os, p.name, p.dims, p.values);
  if (!os) throw std::runtime_error("write failed for '" + path.string() + "'");
}

DenoiserModel read_checkpoint(const std::filesystem::path& path) {
  auto is = open_in(path);
  try {
    check_magic(is, kCheckpointMagic, "checkpoint");
    const std::uint32_t version = get_u32(is, "version");
    if (version != kCheckpointVersion)
      throw FormatError("unsupported checkpoint version " + std::to_string(version));
    const std::uint32_t count = get_u32(is, "block count");
    if (count < 1) throw FormatError("checkpoint has no config block");
    const ParamBlock cfg = read_block(is);
    if (cfg.name != "config" || cfg.values.size() != 8) throw FormatError("missing config block");
    const auto u = [&](std::size_t i) { return static_cast<std::size_t>(cfg.values[i]); };
    ModelConfig c;
    c.image = Shape{u(0), u(1), u(2)};
    c.num_classes = u(3);
    c.time_embedding = u(4);
    c.class_embedding = u(5);
    c.hidden = u(6);
    c.total_steps = u(7);
    ParameterSet params;
    for (std::uint32_t i = 1; i < count; ++i) params.push_back(read_block(is));
    return DenoiserModel(c, std::move(params));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_pgm(const std::filesystem::path& path, const Grid& g, double lo, double hi) {
  if (!(hi > lo)) throw std::invalid_argument("write_pgm: need hi > lo");
  auto os = open_out(path);
  os << "P5\n" << g.width << ' ' << g.height << "\n255\n";
  for (double v : g.values) {
    const double s = std::clamp((v - lo) / (hi - lo), 0.0, 1.0);
    os.put(static_cast<char>(static_cast<unsigned char>(std::lround(s * 255.0))));
  }
}

}  // namespace ms::io
