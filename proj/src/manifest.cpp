#include "multistroke/manifest.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <fstream>
#include <memory>
#include <stdexcept>

namespace ms {

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open '" + path.string() + "' for hashing");
  const std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256: digest initialisation failed");
  std::array<char, 1 << 16> buf{};
  while (is) {
    is.read(buf.data(), buf.size());
    if (is.gcount() > 0 && EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(is.gcount())) != 1)
      throw std::runtime_error("sha256: digest update failed");
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_DigestFinal_ex(ctx.get(), md.data(), &len) != 1) throw std::runtime_error("sha256: digest failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[md[i] >> 4];
    out += kHex[md[i] & 0xf];
  }
  return out;
}

std::vector<ManifestEntry> scan_outputs(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  std::vector<ManifestEntry> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const std::string rel = fs::relative(e.path(), dir).generic_string();
    if (rel == kManifestName) continue;
    out.push_back({rel, e.file_size(), sha256_file(e.path())});
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.path < b.path; });
  return out;
}

std::filesystem::path write_manifest(const std::filesystem::path& dir, std::uint64_t seed) {
  const auto entries = scan_outputs(dir);
  const auto path = dir / kManifestName;
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write '" + path.string() + "'");
  os << "path,bytes,sha256,seed\n";
  for (const auto& e : entries) os << e.path << ',' << e.bytes << ',' << e.sha256 << ',' << seed << '\n';
  return path;
}

void create_fresh_directory(const std::filesystem::path& dir) {
  if (std::filesystem::exists(dir))
    throw std::runtime_error("output directory '" + dir.string() +
                             "' already exists; choose a new --out (outputs are never overwritten)");
  std::filesystem::create_directories(dir);
}

}  // namespace ms
