#pragma once

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "pdc/grid.hpp"

namespace pdc::io {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest round-trip decimal representation; locale independent.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

struct Axis {
  std::string name;
  std::string unit;
  std::size_t count = 0;
  double start = 0.0;
  double step = 0.0;

  double at(std::size_t i) const { return start + step * static_cast<double>(i); }
};

inline nlohmann::json to_json(const Axis& a) {
  return {{"name", a.name}, {"unit", a.unit}, {"count", a.count}, {"start", a.start}, {"step", a.step}};
}

namespace detail {

inline std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

inline void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

inline void put_le64(std::ofstream& out, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  unsigned char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xFFu);
  out.write(reinterpret_cast<const char*>(bytes), 8);
}

}  // namespace detail

/// "axis1,axis2,value" rows after a one-line header, LF line ends.
inline void write_csv_grid(const std::filesystem::path& path, const Axis& rows, const Axis& cols,
                           const Grid2D<double>& values) {
  auto out = detail::open_out(path);
  std::string line;
  out << rows.name << "_" << rows.unit << "," << cols.name << "_" << cols.unit << ",value\n";
  for (std::size_t r = 0; r < values.rows(); ++r) {
    const std::string a = format_double(rows.at(r));
    for (std::size_t c = 0; c < values.cols(); ++c) {
      line.clear();
      line += a;
      line += ',';
      line += format_double(cols.at(c));
      line += ',';
      line += format_double(values(r, c));
      line += '\n';
      out << line;
    }
  }
  detail::finish(out, path);
}

/// Row-major little-endian IEEE-754 binary64.
inline void write_bin_real(const std::filesystem::path& path, const Grid2D<double>& values) {
  auto out = detail::open_out(path);
  for (double v : values.data()) detail::put_le64(out, v);
  detail::finish(out, path);
}

/// Row-major interleaved (re, im) little-endian binary64 pairs.
inline void write_bin_complex(const std::filesystem::path& path, const Grid2D<std::complex<double>>& values) {
  auto out = detail::open_out(path);
  for (const auto& v : values.data()) {
    detail::put_le64(out, v.real());
    detail::put_le64(out, v.imag());
  }
  detail::finish(out, path);
}

/// 16-bit binary PGM (P5), max-normalized; the first image row is grid row 0.
inline void write_pgm16(const std::filesystem::path& path, const Grid2D<double>& values) {
  auto out = detail::open_out(path);
  double peak = 0.0;
  for (double v : values.data()) peak = std::max(peak, v);
  out << "P5\n" << values.cols() << " " << values.rows() << "\n65535\n";
  std::vector<unsigned char> row(2 * values.cols());
  for (std::size_t r = 0; r < values.rows(); ++r) {
    for (std::size_t c = 0; c < values.cols(); ++c) {
      const double v = peak > 0.0 ? std::clamp(values(r, c) / peak, 0.0, 1.0) : 0.0;
      const auto level = static_cast<std::uint16_t>(std::lround(v * 65535.0));
      row[2 * c] = static_cast<unsigned char>(level >> 8);
      row[2 * c + 1] = static_cast<unsigned char>(level & 0xFFu);
    }
    out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
  }
  detail::finish(out, path);
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& doc) {
  auto out = detail::open_out(path);
  out << doc.dump(2) << "\n";
  detail::finish(out, path);
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  auto out = detail::open_out(path);
  out << text;
  detail::finish(out, path);
}

/// Collects files in a private staging directory and moves them into the output
/// directory only on commit(). An advisory lock file guards the directory while
/// a run is active. Without commit() every trace of the run is removed again.
class OutputStage {
 public:
  explicit OutputStage(std::filesystem::path dir) : dir_(std::move(dir)) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (!fs::exists(dir_, ec)) {
      if (!fs::create_directories(dir_, ec) || ec) throw IoError("cannot create output directory " + dir_.string());
      created_dir_ = true;
    } else if (!fs::is_directory(dir_, ec)) {
      throw IoError(dir_.string() + " is not a directory");
    }
    lock_ = dir_ / ".pdc.lock";
    const int fd = ::open(lock_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd < 0) {
      const bool busy = errno == EEXIST;
      cleanup_dir();
      throw IoError(busy ? "output directory is locked by another run: " + dir_.string()
                         : "output directory not writable: " + dir_.string());
    }
    ::close(fd);
    staging_ = dir_ / (".pdc-staging-" + std::to_string(::getpid()));
    fs::remove_all(staging_, ec);
    if (!fs::create_directory(staging_, ec) || ec) {
      fs::remove(lock_, ec);
      cleanup_dir();
      throw IoError("cannot create staging directory in " + dir_.string());
    }
  }

  OutputStage(const OutputStage&) = delete;
  OutputStage& operator=(const OutputStage&) = delete;

  ~OutputStage() {
    std::error_code ec;
    if (!staging_.empty()) std::filesystem::remove_all(staging_, ec);
    std::filesystem::remove(lock_, ec);
    if (!committed_) cleanup_dir();
  }

  /// Path inside the staging area for a final file name.
  std::filesystem::path file(const std::string& name) {
    names_.push_back(name);
    return staging_ / name;
  }

  const std::filesystem::path& directory() const { return dir_; }

  void commit() {
    namespace fs = std::filesystem;
    std::sort(names_.begin(), names_.end());
    names_.erase(std::unique(names_.begin(), names_.end()), names_.end());
    for (const auto& name : names_) {
      std::error_code ec;
      fs::rename(staging_ / name, dir_ / name, ec);
      if (ec) throw IoError("cannot move " + name + " into " + dir_.string());
    }
    committed_ = true;
  }

 private:
  void cleanup_dir() {
    if (!created_dir_) return;
    std::error_code ec;
    if (std::filesystem::is_empty(dir_, ec)) std::filesystem::remove(dir_, ec);
  }

  std::filesystem::path dir_;
  std::filesystem::path lock_;
  std::filesystem::path staging_;
  std::vector<std::string> names_;
  bool created_dir_ = false;
  bool committed_ = false;
};

}  // namespace pdc::io
