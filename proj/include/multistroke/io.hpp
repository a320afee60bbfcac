#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "multistroke/dataset.hpp"
#include "multistroke/denoiser.hpp"
#include "multistroke/diagnostics.hpp"
#include "multistroke/tensor.hpp"

namespace ms::io {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr char kTensorMagic[4] = {'M', 'S', 'T', 'K'};
inline constexpr std::uint32_t kTensorVersion = 1;
inline constexpr char kCheckpointMagic[4] = {'M', 'S', 'C', 'P'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Tensor file: magic "MSTK", u32 version, u32 rank, rank x u64 dims,
/// then prod(dims) f64 values, all little-endian, row-major.
struct TensorFile {
  std::vector<std::uint64_t> dims;
  std::vector<double> values;

  std::uint64_t element_count() const;
};

void write_tensor(std::ostream& os, const TensorFile& t);
TensorFile read_tensor(std::istream& is);
void write_tensor_file(const std::filesystem::path& path, const TensorFile& t);
TensorFile read_tensor_file(const std::filesystem::path& path);

TensorFile to_tensor_file(const ImageTensor& x);
ImageTensor to_image(const TensorFile& t);
/// Stacks equally shaped images into (N, C, H, W).
TensorFile stack_images(const std::vector<ImageTensor>& images);
std::vector<ImageTensor> unstack_images(const TensorFile& t);

TensorFile labels_to_tensor(const std::vector<std::size_t>& labels);
std::vector<std::size_t> tensor_to_labels(const TensorFile& t);

/// images.mstk + labels.mstk pair.
void write_dataset(const std::filesystem::path& images, const std::filesystem::path& labels,
                   const LabeledImages& data);
LabeledImages read_dataset(const std::filesystem::path& images, const std::filesystem::path& labels);

/// Checkpoint: magic "MSCP", u32 version, u32 block count, then per block
/// u32 name length, name bytes, u32 rank, rank x u64 dims, f64 values.
/// The first block, "config", stores the model hyper-parameters.
void write_checkpoint(const std::filesystem::path& path, const DenoiserModel& model);
DenoiserModel read_checkpoint(const std::filesystem::path& path);

/// Binary portable graymap, values mapped linearly from [lo, hi] to 0..255
/// and clamped.
void write_pgm(const std::filesystem::path& path, const Grid& g, double lo, double hi);

}  // namespace ms::io
