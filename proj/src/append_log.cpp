#include "campus/append_log.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

#include "campus/error.hpp"

namespace campus {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void io_failure(const std::string& what, const fs::path& p) {
  throw Error(Errc::IO_ERROR, what + " " + p.string() + ": " + std::strerror(errno));
}

void write_all(int fd, std::string_view data, const fs::path& p) {
  while (!data.empty()) {
    const ssize_t n = ::write(fd, data.data(), data.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      io_failure("write failed", p);
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
}

}  // namespace

void write_file_atomically(const fs::path& path, const std::vector<std::string>& lines) {
  const fs::path tmp = path.string() + ".tmp";
  const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0600);
  if (fd < 0) io_failure("cannot create", tmp);
  for (const auto& line : lines) {
    write_all(fd, line, tmp);
    write_all(fd, "\n", tmp);
  }
  if (::fsync(fd) != 0) io_failure("fsync failed", tmp);
  ::close(fd);
  fs::rename(tmp, path);
}

AppendLog::AppendLog(fs::path path) : path_(std::move(path)) {
  // Drop a torn tail left by a crash mid-append so new lines start clean.
  if (fs::exists(path_)) {
    std::ifstream in(path_, std::ios::binary);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (!text.empty() && text.back() != '\n') {
      const auto keep = text.rfind('\n');
      fs::resize_file(path_, keep == std::string::npos ? 0 : keep + 1);
    }
  }
  open_for_append();
}

AppendLog::~AppendLog() {
  if (fd_ >= 0) ::close(fd_);
}

void AppendLog::open_for_append() {
  fd_ = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0600);
  if (fd_ < 0) io_failure("cannot open", path_);
}

std::vector<std::string> AppendLog::read_all() const {
  std::ifstream in(path_, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  std::vector<std::string> lines;
  std::size_t start = 0;
  for (std::size_t nl; (nl = text.find('\n', start)) != std::string::npos; start = nl + 1)
    if (nl > start) lines.emplace_back(text.substr(start, nl - start));
  return lines;
}

void AppendLog::append(std::string_view line) {
  std::string buf(line);
  buf.push_back('\n');
  write_all(fd_, buf, path_);
}

void AppendLog::sync() {
  if (::fsync(fd_) != 0) io_failure("fsync failed", path_);
}

void AppendLog::rewrite(const std::vector<std::string>& lines) {
  ::close(fd_);
  fd_ = -1;
  write_file_atomically(path_, lines);
  open_for_append();
}

}  // namespace campus
