#ifndef MEMRC_CSV_HPP
#define MEMRC_CSV_HPP

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "memrc/errors.hpp"

namespace memrc {

// All CSV output uses 17 significant digits, '.' decimal separator and
// '\n' line endings; reruns with the same seed are byte-identical.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path) : path_(path), out_(path, std::ios::binary) {
    if (!out_) throw IoError("cannot open for writing: " + path);
  }

  void raw_line(const std::string& line) { out_ << line << '\n'; }

  template <typename... Fields>
  void row(const Fields&... fields) {
    bool first = true;
    ((out_ << (first ? "" : ","), first = false, write_field(fields)), ...);
    out_ << '\n';
  }

  void close() {
    out_.close();
    if (!out_) throw IoError("write failed: " + path_);
  }

 private:
  void write_field(double v) { out_ << format_double(v); }
  void write_field(int v) { out_ << v; }
  void write_field(long v) { out_ << v; }
  void write_field(std::size_t v) { out_ << v; }
  void write_field(const char* v) { out_ << v; }
  void write_field(const std::string& v) { out_ << v; }

  std::string path_;
  std::ofstream out_;
};

inline void ensure_directory(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory: " + dir + " (" + ec.message() + ")");
}

}  // namespace memrc

#endif  // MEMRC_CSV_HPP
