#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "pdc/constants.hpp"
#include "pdc/dispersion.hpp"
#include "pdc/error.hpp"
#include "pdc/grid.hpp"
#include "pdc/phasematch.hpp"

namespace pdc {

struct GridDefaults {
  std::size_t n_omega = 512;
  std::size_t n_k = 512;
  double omega_halfspan_frac = 0.30;  // of omega_0
  double k_halfspan_frac = 0.25;      // of k_o(omega_0)
};

/// Grid centred on the degenerate frequency omega_p / 2.
inline GridSpec default_grid(const PumpSpec& pump, const CrystalSpec& crystal,
                             const GridDefaults& d = {}) {
  GridSpec g;
  g.omega_center = 0.5 * pump.omega();
  g.omega_halfspan = d.omega_halfspan_frac * g.omega_center;
  g.n_omega = d.n_omega;
  g.k_halfspan =
      d.k_halfspan_frac * wavevector_magnitude(g.omega_center, Polarization::ordinary(), crystal);
  g.n_k = d.n_k;
  validate(g);
  return g;
}

/// Half phase mismatch x = dk L / 2 per cell; NaN marks evanescent cells.
inline Grid2D<double> build_mismatch_grid(const PumpSpec& pump, const CrystalSpec& crystal,
                                          const GridSpec& grid) {
  validate(grid);
  const double omega_p = pump.omega();
  const double kp = pump_wavevector(pump, crystal);
  const auto ord = Polarization::ordinary();
  Grid2D<double> x(grid.n_omega, grid.n_k);
  for (std::size_t p = 0; p < grid.n_omega; ++p) {
    const double omega_s = grid.omega_at(p);
    if (!(omega_s > 0.0 && omega_s < omega_p)) {
      throw Error(ErrorCode::OutOfValidityRange, "grid row frequency outside (0, omega_p)");
    }
    const double ks = wavevector_magnitude(omega_s, ord, crystal);
    const double ki = wavevector_magnitude(omega_p - omega_s, ord, crystal);
    auto out = x.row(p);
    for (std::size_t q = 0; q < grid.n_k; ++q) {
      const auto dk = longitudinal_mismatch(kp, ks, ki, grid.k_at(q));
      out[q] = dk ? 0.5 * *dk * crystal.length_m : std::numeric_limits<double>::quiet_NaN();
    }
  }
  return x;
}

inline FieldGrid amplitude_from_mismatch_grid(const Grid2D<double>& x, const GridSpec& grid) {
  FieldGrid f{grid, FieldKind::Amplitude, Grid2D<std::complex<double>>(grid.n_omega, grid.n_k)};
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double v = x.data()[i];
    f.values.data()[i] = std::isnan(v) ? std::complex<double>{} : sinc_amplitude(v);
  }
  return f;
}

inline FieldGrid intensity_from_mismatch_grid(const Grid2D<double>& x, const GridSpec& grid,
                                              double gain) {
  if (gain < 0.0) throw Error(ErrorCode::InvalidArgument, "gain must be non-negative");
  FieldGrid f{grid, FieldKind::Intensity, Grid2D<std::complex<double>>(grid.n_omega, grid.n_k)};
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double v = x.data()[i];
    double s = 0.0;
    if (!std::isnan(v)) s = gain == 0.0 ? std::norm(sinc_amplitude(v)) : high_gain_intensity(gain, v);
    f.values.data()[i] = s;
  }
  return f;
}

inline FieldGrid build_amplitude_grid(const PumpSpec& pump, const CrystalSpec& crystal,
                                      const GridSpec& grid) {
  return amplitude_from_mismatch_grid(build_mismatch_grid(pump, crystal, grid), grid);
}

inline FieldGrid build_intensity_grid(const PumpSpec& pump, const CrystalSpec& crystal,
                                      const GridSpec& grid) {
  return intensity_from_mismatch_grid(build_mismatch_grid(pump, crystal, grid), grid, pump.gain_GL);
}

inline Grid2D<double> real_part(const FieldGrid& f) {
  Grid2D<double> out(f.values.rows(), f.values.cols());
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = f.values.data()[i].real();
  return out;
}

inline Grid2D<double> magnitude(const Grid2D<std::complex<double>>& v) {
  Grid2D<double> out(v.rows(), v.cols());
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = std::abs(v.data()[i]);
  return out;
}

/// sum(S) * d_omega * d_k.
inline double integrated_intensity(const FieldGrid& f) {
  double sum = 0.0;
  for (const auto& v : f.values.data()) sum += v.real();
  return sum * f.spec.d_omega() * f.spec.d_k();
}

// ---------------------------------------------------------------------------
// (lambda, theta_ext) representation

struct AngleWavelengthMap {
  std::vector<double> lambda_m;   // strictly increasing
  std::vector<double> theta_rad;  // external angle
  Grid2D<double> values;          // rows follow lambda, columns theta
  bool weighting_applied = false;
  double lambda_ref_m = 0.0;  // anchor of the mode-density weighting
};

inline std::vector<double> linear_axis(double lo, double hi, std::size_t n) {
  std::vector<double> a(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  return a;
}

/// Bilinear sample of a real grid at fractional indices; zero outside.
inline double bilinear(const Grid2D<double>& g, double r, double c) {
  if (!(r >= 0.0) || !(c >= 0.0)) return 0.0;
  const double rmax = static_cast<double>(g.rows() - 1);
  const double cmax = static_cast<double>(g.cols() - 1);
  if (r > rmax || c > cmax) return 0.0;
  const auto r0 = static_cast<std::size_t>(std::min(std::floor(r), std::max(rmax - 1.0, 0.0)));
  const auto c0 = static_cast<std::size_t>(std::min(std::floor(c), std::max(cmax - 1.0, 0.0)));
  const std::size_t r1 = std::min(r0 + 1, g.rows() - 1);
  const std::size_t c1 = std::min(c0 + 1, g.cols() - 1);
  const double fr = r - static_cast<double>(r0);
  const double fc = c - static_cast<double>(c0);
  return (1 - fr) * (1 - fc) * g(r0, c0) + (1 - fr) * fc * g(r0, c1) + fr * (1 - fc) * g(r1, c0) +
         fr * fc * g(r1, c1);
}

/// Resamples S(omega, k) onto (lambda, theta_ext) via omega = 2 pi c / lambda,
/// k = omega sin(theta) / c. No Jacobian is applied.
inline AngleWavelengthMap to_angle_wavelength(const FieldGrid& grid, const std::vector<double>& lambda_axis,
                                              const std::vector<double>& theta_axis) {
  if (grid.kind != FieldKind::Intensity) {
    throw Error(ErrorCode::InvalidArgument, "to_angle_wavelength expects an intensity grid");
  }
  if (lambda_axis.empty() || theta_axis.empty()) throw Error(ErrorCode::EmptyOverlap, "empty target axes");
  for (std::size_t i = 1; i < lambda_axis.size(); ++i) {
    if (!(lambda_axis[i] > lambda_axis[i - 1])) {
      throw Error(ErrorCode::InvalidArgument, "lambda axis must be strictly increasing");
    }
  }
  const Grid2D<double> s = real_part(grid);
  const GridSpec& g = grid.spec;
  AngleWavelengthMap map{lambda_axis, theta_axis, Grid2D<double>(lambda_axis.size(), theta_axis.size()),
                         false, wavelength_from_omega(g.omega_center)};
  const double eps = 1e-9;
  bool any_inside = false;
  for (std::size_t i = 0; i < lambda_axis.size(); ++i) {
    const double omega = omega_from_wavelength(lambda_axis[i]);
    const double r = (omega - g.omega_center) / g.d_omega() + static_cast<double>(g.n_omega / 2);
    for (std::size_t j = 0; j < theta_axis.size(); ++j) {
      const double k = omega * std::sin(theta_axis[j]) / kSpeedOfLight;
      const double c = k / g.d_k() + static_cast<double>(g.n_k / 2);
      // snap round-off at exact sample points
      const double rs = std::abs(r - std::round(r)) < eps ? std::round(r) : r;
      const double cs = std::abs(c - std::round(c)) < eps ? std::round(c) : c;
      if (rs >= 0.0 && cs >= 0.0 && rs <= g.n_omega - 1.0 && cs <= g.n_k - 1.0) any_inside = true;
      map.values(i, j) = std::max(0.0, bilinear(s, rs, cs));
    }
  }
  if (!any_inside) throw Error(ErrorCode::EmptyOverlap, "no target cell falls inside the (omega, k) grid");
  return map;
}

/// Default (lambda, theta) axes covering a grid's frequency span.
inline AngleWavelengthMap to_angle_wavelength(const FieldGrid& grid, std::size_t n_lambda,
                                              std::size_t n_theta, double theta_max_rad) {
  const GridSpec& g = grid.spec;
  const double lo = wavelength_from_omega(g.omega_at(g.n_omega - 1));
  const double hi = wavelength_from_omega(g.omega_at(0));
  return to_angle_wavelength(grid, linear_axis(lo, hi, n_lambda),
                             linear_axis(-theta_max_rad, theta_max_rad, n_theta));
}

/// Low- or high-gain intensity evaluated directly on (lambda, theta_ext) cells.
inline AngleWavelengthMap angle_wavelength_spectrum(const PumpSpec& pump, const CrystalSpec& crystal,
                                                    const std::vector<double>& lambda_axis,
                                                    const std::vector<double>& theta_axis) {
  AngleWavelengthMap map{lambda_axis, theta_axis, Grid2D<double>(lambda_axis.size(), theta_axis.size()),
                         false, 2.0 * pump.lambda_m};
  const double omega_p = pump.omega();
  const double kp = pump_wavevector(pump, crystal);
  const auto ord = Polarization::ordinary();
  for (std::size_t i = 0; i < lambda_axis.size(); ++i) {
    const double omega = omega_from_wavelength(lambda_axis[i]);
    if (!(omega < omega_p)) throw Error(ErrorCode::OutOfValidityRange, "wavelength shorter than the pump");
    const double ks = wavevector_magnitude(omega, ord, crystal);
    const double ki = wavevector_magnitude(omega_p - omega, ord, crystal);
    for (std::size_t j = 0; j < theta_axis.size(); ++j) {
      const double k = omega * std::sin(theta_axis[j]) / kSpeedOfLight;
      MismatchPoint pt{omega, k, 0.0, false};
      if (const auto dk = longitudinal_mismatch(kp, ks, ki, k)) {
        pt.delta_k = *dk;
        pt.propagating = true;
      }
      map.values(i, j) = intensity_from_mismatch(pt, crystal.length_m, pump.gain_GL);
    }
  }
  return map;
}

/// Multiplies by (lambda_ref / lambda)^4, the detected mode count per spectral cell.
inline AngleWavelengthMap apply_mode_density(AngleWavelengthMap map) {
  if (map.weighting_applied) throw Error(ErrorCode::AlreadyWeighted, "mode-density weighting already applied");
  for (std::size_t i = 0; i < map.lambda_m.size(); ++i) {
    const double r = map.lambda_ref_m / map.lambda_m[i];
    const double w = r * r * r * r;
    for (auto& v : map.values.row(i)) v *= w;
  }
  map.weighting_applied = true;
  return map;
}

namespace detail {

inline bool uniform_axis(const std::vector<double>& a) {
  if (a.size() < 3) return true;
  const double step = (a.back() - a.front()) / static_cast<double>(a.size() - 1);
  for (std::size_t i = 1; i < a.size(); ++i) {
    if (std::abs((a[i] - a[i - 1]) - step) > 1e-6 * std::abs(step)) return false;
  }
  return true;
}

/// Scatters every sample with a Gaussian whose weights are renormalized over the
/// in-range targets, so the sum along the line is preserved exactly.
inline std::vector<double> blur_line(std::span<const double> in, double sigma_cells) {
  const std::size_t n = in.size();
  std::vector<double> out(n, 0.0);
  const auto half = static_cast<std::ptrdiff_t>(std::ceil(5.0 * sigma_cells));
  std::vector<double> w;
  for (std::size_t i = 0; i < n; ++i) {
    if (in[i] == 0.0) continue;
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, static_cast<std::ptrdiff_t>(i) - half);
    const std::ptrdiff_t hi =
        std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(n) - 1, static_cast<std::ptrdiff_t>(i) + half);
    w.assign(static_cast<std::size_t>(hi - lo + 1), 0.0);
    double norm = 0.0;
    for (std::ptrdiff_t j = lo; j <= hi; ++j) {
      const double d = static_cast<double>(j - static_cast<std::ptrdiff_t>(i)) / sigma_cells;
      w[static_cast<std::size_t>(j - lo)] = std::exp(-0.5 * d * d);
      norm += w[static_cast<std::size_t>(j - lo)];
    }
    for (std::ptrdiff_t j = lo; j <= hi; ++j) {
      out[static_cast<std::size_t>(j)] += in[i] * w[static_cast<std::size_t>(j - lo)] / norm;
    }
  }
  return out;
}

}  // namespace detail

inline constexpr double kFwhmPerSigma = 2.3548200450309493;  // 2 sqrt(2 ln 2)

/// Separable Gaussian blur modelling spectrometer and slit resolution.
/// Zero FWHM leaves the corresponding axis untouched.
inline AngleWavelengthMap instrument_convolution(AngleWavelengthMap map, double fwhm_lambda_m,
                                                 double fwhm_theta_rad) {
  if (fwhm_lambda_m < 0.0 || fwhm_theta_rad < 0.0) {
    throw Error(ErrorCode::InvalidArgument, "instrument FWHM must be non-negative");
  }
  const std::size_t nl = map.lambda_m.size();
  const std::size_t nt = map.theta_rad.size();
  if (fwhm_lambda_m > 0.0 && nl > 1) {
    if (!detail::uniform_axis(map.lambda_m)) throw Error(ErrorCode::NonUniformGrid, "lambda axis not uniform");
    const double step = (map.lambda_m.back() - map.lambda_m.front()) / static_cast<double>(nl - 1);
    const double sigma = fwhm_lambda_m / kFwhmPerSigma / step;
    std::vector<double> column(nl);
    for (std::size_t j = 0; j < nt; ++j) {
      for (std::size_t i = 0; i < nl; ++i) column[i] = map.values(i, j);
      const auto blurred = detail::blur_line(column, sigma);
      for (std::size_t i = 0; i < nl; ++i) map.values(i, j) = blurred[i];
    }
  }
  if (fwhm_theta_rad > 0.0 && nt > 1) {
    if (!detail::uniform_axis(map.theta_rad)) throw Error(ErrorCode::NonUniformGrid, "theta axis not uniform");
    const double step = (map.theta_rad.back() - map.theta_rad.front()) / static_cast<double>(nt - 1);
    const double sigma = fwhm_theta_rad / kFwhmPerSigma / step;
    for (std::size_t i = 0; i < nl; ++i) {
      const auto blurred = detail::blur_line(map.values.row(i), sigma);
      std::copy(blurred.begin(), blurred.end(), map.values.row(i).begin());
    }
  }
  return map;
}

}  // namespace pdc
