#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace splicedet {

/// Incremental SHA-256 (FIPS 180-4). Used for dataset fingerprints and the
/// determinism checks; no crypto library needed for that.
class Sha256 {
 public:
  Sha256() { reset(); }

  void reset();
  void update(const void* data, std::size_t len);
  /// Finalizes and returns the lowercase hex digest. The object must be
  /// reset() before reuse.
  std::string hex_digest();

 private:
  void process_block(const std::uint8_t* p);

  std::uint32_t state_[8];
  std::uint64_t bit_count_ = 0;
  std::uint8_t buffer_[64];
  std::size_t buffer_len_ = 0;
};

std::string sha256_hex(const void* data, std::size_t len);
std::string sha256_hex(const std::string& s);
std::string sha256_file(const std::filesystem::path& path);

/// Fingerprint of a file set: SHA-256 over "name:hash\n" lines sorted by name.
std::string fingerprint_files(const std::vector<std::filesystem::path>& files,
                              const std::filesystem::path& base);

}  // namespace splicedet
