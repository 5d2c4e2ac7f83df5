#pragma once

#include <algorithm>
#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>

#include <fftw3.h>

#include "pdc/error.hpp"
#include "pdc/grid.hpp"

namespace pdc {

namespace detail {

inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(fftw_complex* p) const { fftw_free(p); }
};

}  // namespace detail

/// In-place forward 2D DFT, X[m][n] = sum x[p][q] exp(-2 pi i (p m / rows + q n / cols)).
/// Planning is serialized (FFTW planners are not re-entrant); execution is not.
inline void forward_dft_2d(Grid2D<std::complex<double>>& data) {
  const int rows = static_cast<int>(data.rows());
  const int cols = static_cast<int>(data.cols());
  std::unique_ptr<fftw_complex, detail::FftwFree> buf(
      static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * data.size())));
  if (!buf) throw Error(ErrorCode::InvalidArgument, "fftw_malloc failed");
  fftw_plan plan;
  {
    std::lock_guard lock(detail::fftw_planner_mutex());
    plan = fftw_plan_dft_2d(rows, cols, buf.get(), buf.get(), FFTW_FORWARD, FFTW_ESTIMATE);
  }
  auto* raw = reinterpret_cast<std::complex<double>*>(buf.get());
  std::copy(data.data().begin(), data.data().end(), raw);
  fftw_execute(plan);
  std::copy(raw, raw + data.size(), data.data().begin());
  std::lock_guard lock(detail::fftw_planner_mutex());
  fftw_destroy_plan(plan);
}

}  // namespace pdc
