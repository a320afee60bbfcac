#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace ms {

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

struct ManifestEntry {
  std::string path;  // relative to the output directory, '/' separated
  std::uintmax_t bytes = 0;
  std::string sha256;
};

/// Every regular file under `dir` except the manifest itself, sorted by path.
std::vector<ManifestEntry> scan_outputs(const std::filesystem::path& dir);

/// Writes dir/manifest.csv (path,bytes,sha256,seed) and returns its path.
std::filesystem::path write_manifest(const std::filesystem::path& dir, std::uint64_t seed);

/// Creates `dir` (and parents); throws std::runtime_error if it already exists.
void create_fresh_directory(const std::filesystem::path& dir);

inline constexpr const char* kManifestName = "manifest.csv";

}  // namespace ms
