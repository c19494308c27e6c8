#pragma once

#include <atomic>
#include <filesystem>
#include <string>
#include <unistd.h>

namespace deriva::test {

namespace fs = std::filesystem;

// Unique scratch directory removed on destruction.
class TempDir {
public:
  explicit TempDir(const std::string& tag = "deriva") {
    static std::atomic<unsigned> counter{0};
    path_ = fs::temp_directory_path() /
            (tag + "-" + std::to_string(::getpid()) + "-" +
             std::to_string(counter.fetch_add(1)));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& sub) const { return path_ / sub; }

private:
  fs::path path_;
};

} // namespace deriva::test
