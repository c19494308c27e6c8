#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <string_view>

namespace deriva {

// SHA-256 is the canonical digest for objects, bags and workflows; MD5 is
// accepted only as a secondary declared digest on upload.

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);
std::string md5_hex(std::string_view bytes);

// Incremental hasher for streaming writes.
class Sha256 {
public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(std::string_view bytes);
  std::string hex(); // finalizes; the hasher must not be reused

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

bool looks_like_sha256(const std::string& s);

} // namespace deriva
