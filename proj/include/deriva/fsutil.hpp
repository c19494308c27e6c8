#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace deriva {

namespace fs = std::filesystem;

std::string read_file(const fs::path& path);

// tmp + rename on the same filesystem; the containing directory must exist.
void write_file_atomic(const fs::path& path, std::string_view bytes);

void ensure_dir(const fs::path& dir);

// Sorted relative paths of all regular files under root.
std::vector<fs::path> list_files_recursive(const fs::path& root);

// Advisory whole-file lock (flock). Blocks until acquired; released on
// destruction. Safe across processes sharing one filesystem.
class FileLock {
public:
  explicit FileLock(const fs::path& path);
  ~FileLock();
  FileLock(const FileLock&) = delete;
  FileLock& operator=(const FileLock&) = delete;

private:
  int fd_ = -1;
};

// Append-only record log shared between processes. The caller serializes
// access by holding a FileLock on lock_path() around read_new/append pairs;
// the log tracks how far this process has read, so read_new returns exactly
// the records appended by other writers since then.
class AppendLog {
public:
  AppendLog() = default;
  explicit AppendLog(fs::path path);

  const fs::path& path() const { return path_; }
  const fs::path& lock_path() const { return lock_path_; }

  // Bytes appended since our last read (everything, on first call).
  std::string read_new();

  // Appends and fsyncs one record; our read offset skips past it.
  void append(std::string_view record);

private:
  fs::path path_;
  fs::path lock_path_;
  std::uint64_t offset_ = 0;
};

} // namespace deriva
