#include "deriva/fsutil.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>

#include "deriva/errors.hpp"

namespace deriva {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    fail(ErrorKind::Io, "file_unreadable", "cannot read " + path.string());
  std::string out;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    out.append(buf, static_cast<size_t>(in.gcount()));
  }
  return out;
}

void write_file_atomic(const fs::path& path, std::string_view bytes) {
  fs::path tmp = path;
  tmp += ".tmp.";
  tmp += std::to_string(::getpid());
  int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  if (fd < 0)
    fail(ErrorKind::Io, "file_unwritable",
         "cannot write " + tmp.string() + ": " + std::strerror(errno));
  std::size_t off = 0;
  while (off < bytes.size()) {
    ssize_t n = ::write(fd, bytes.data() + off, bytes.size() - off);
    if (n < 0) {
      ::close(fd);
      ::unlink(tmp.c_str());
      fail(ErrorKind::Io, "file_unwritable", "short write to " + tmp.string());
    }
    off += static_cast<size_t>(n);
  }
  ::fsync(fd);
  ::close(fd);
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    fail(ErrorKind::Io, "file_unwritable",
         "cannot rename into place: " + path.string());
  }
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec && !fs::is_directory(dir))
    fail(ErrorKind::Io, "dir_uncreatable", "cannot create " + dir.string());
}

std::vector<fs::path> list_files_recursive(const fs::path& root) {
  std::vector<fs::path> out;
  if (!fs::exists(root)) return out;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (entry.is_regular_file())
      out.push_back(fs::relative(entry.path(), root));
  }
  std::sort(out.begin(), out.end(),
            [](const fs::path& a, const fs::path& b) {
              return a.generic_string() < b.generic_string();
            });
  return out;
}

FileLock::FileLock(const fs::path& path) {
  ensure_dir(path.parent_path());
  fd_ = ::open(path.c_str(), O_RDWR | O_CREAT, 0644);
  if (fd_ < 0)
    fail(ErrorKind::Io, "lock_unavailable", "cannot open " + path.string());
  if (::flock(fd_, LOCK_EX) != 0) {
    ::close(fd_);
    fd_ = -1;
    fail(ErrorKind::Io, "lock_unavailable", "cannot lock " + path.string());
  }
}

FileLock::~FileLock() {
  if (fd_ >= 0) {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
}

AppendLog::AppendLog(fs::path path)
    : path_(std::move(path)), lock_path_(path_.string() + ".lock") {}

std::string AppendLog::read_new() {
  std::ifstream in(path_, std::ios::binary);
  if (!in) return {};
  in.seekg(static_cast<std::streamoff>(offset_));
  std::string out;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    out.append(buf, static_cast<size_t>(in.gcount()));
  }
  offset_ += out.size();
  return out;
}

void AppendLog::append(std::string_view record) {
  int fd = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
  if (fd < 0)
    fail(ErrorKind::Io, "log_unwritable", "cannot append " + path_.string());
  std::size_t off = 0;
  while (off < record.size()) {
    ssize_t n = ::write(fd, record.data() + off, record.size() - off);
    if (n < 0) {
      ::close(fd);
      fail(ErrorKind::Io, "log_unwritable", "short write to " + path_.string());
    }
    off += static_cast<size_t>(n);
  }
  ::fsync(fd);
  ::close(fd);
  offset_ += record.size();
}

} // namespace deriva
