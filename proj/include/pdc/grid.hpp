#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "pdc/error.hpp"

namespace pdc {

/// Dense row-major matrix.
template <typename T>
class Grid2D {
 public:
  Grid2D() = default;
  Grid2D(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<T> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const T> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::vector<T>& data() { return data_; }
  const std::vector<T>& data() const { return data_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

/// Uniform sampling of (omega, k). Row p sits at omega_center + (p - n_omega/2) d_omega,
/// column q at (q - n_k/2) d_k.
struct GridSpec {
  double omega_center = 0.0;    // rad/s
  double omega_halfspan = 0.0;  // rad/s
  std::size_t n_omega = 0;
  double k_halfspan = 0.0;  // rad/m
  std::size_t n_k = 0;

  double d_omega() const { return 2.0 * omega_halfspan / static_cast<double>(n_omega); }
  double d_k() const { return 2.0 * k_halfspan / static_cast<double>(n_k); }

  double omega_at(std::size_t p) const {
    return omega_center + (static_cast<double>(p) - static_cast<double>(n_omega / 2)) * d_omega();
  }
  double detuning_at(std::size_t p) const {
    return (static_cast<double>(p) - static_cast<double>(n_omega / 2)) * d_omega();
  }
  double k_at(std::size_t q) const {
    return (static_cast<double>(q) - static_cast<double>(n_k / 2)) * d_k();
  }
};

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

/// Grids built from physics must be powers of two with at least 16 samples per axis.
inline void validate(const GridSpec& g) {
  if (!(g.omega_halfspan > 0.0) || !(g.k_halfspan > 0.0) || !(g.omega_center > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "grid spans and centre must be positive");
  }
  if (g.n_omega < 16 || g.n_k < 16 || !is_power_of_two(g.n_omega) || !is_power_of_two(g.n_k)) {
    throw Error(ErrorCode::InvalidArgument, "grid sizes must be powers of two >= 16");
  }
}

enum class FieldKind { Amplitude, Intensity };

struct FieldGrid {
  GridSpec spec;
  FieldKind kind = FieldKind::Amplitude;
  Grid2D<std::complex<double>> values;  // n_omega x n_k; Intensity grids are real
};

}  // namespace pdc
