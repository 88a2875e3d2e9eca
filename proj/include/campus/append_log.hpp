#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace campus {

/// Newline-delimited append-only file. Lines are flushed to the kernel on
/// every append; sync() makes them durable.
class AppendLog {
 public:
  explicit AppendLog(std::filesystem::path path);
  ~AppendLog();
  AppendLog(const AppendLog&) = delete;
  AppendLog& operator=(const AppendLog&) = delete;

  /// Complete lines only; a torn final line (no trailing newline) is dropped.
  std::vector<std::string> read_all() const;

  void append(std::string_view line);
  void sync();

  /// Atomically replaces the file contents (write temp, fsync, rename).
  void rewrite(const std::vector<std::string>& lines);

  const std::filesystem::path& path() const { return path_; }

 private:
  void open_for_append();

  std::filesystem::path path_;
  int fd_ = -1;
};

/// Writes `lines` to `path` via a temporary file and rename.
void write_file_atomically(const std::filesystem::path& path, const std::vector<std::string>& lines);

}  // namespace campus
