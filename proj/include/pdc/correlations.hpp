#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <vector>

#include "pdc/constants.hpp"
#include "pdc/error.hpp"
#include "pdc/fft.hpp"
#include "pdc/grid.hpp"
#include "pdc/spectra.hpp"

namespace pdc {

enum class CorrOrder { First, Second };

/// Correlation map on tau_j = (j - n_tau/2) d_tau, xi_j = (j - n_xi/2) d_xi.
/// Values are envelopes: the carrier exp(-i omega_0 tau) is removed.
struct CorrMap {
  std::size_t n_tau = 0;
  double d_tau = 0.0;  // s
  std::size_t n_xi = 0;
  double d_xi = 0.0;  // m
  Grid2D<std::complex<double>> values;
  CorrOrder order = CorrOrder::First;
  bool normalized = false;

  std::size_t tau_center() const { return n_tau / 2; }
  std::size_t xi_center() const { return n_xi / 2; }
  double tau_at(std::size_t j) const {
    return (static_cast<double>(j) - static_cast<double>(n_tau / 2)) * d_tau;
  }
  double xi_at(std::size_t j) const {
    return (static_cast<double>(j) - static_cast<double>(n_xi / 2)) * d_xi;
  }
};

struct TransformOptions {
  std::size_t pad = 4;  // zero-padding factor per axis
  bool crop = true;     // keep only the central half of the padded map
};

namespace detail {

inline void check_transformable(const FieldGrid& f) {
  const double dw = f.spec.d_omega();
  const double dk = f.spec.d_k();
  if (!(std::isfinite(dw) && dw > 0.0 && std::isfinite(dk) && dk > 0.0)) {
    throw Error(ErrorCode::NonUniformGrid, "grid steps must be finite and positive");
  }
  if (f.values.rows() != f.spec.n_omega || f.values.cols() != f.spec.n_k || f.values.size() == 0) {
    throw Error(ErrorCode::NonUniformGrid, "value matrix does not match the grid description");
  }
}

inline std::size_t wrap(std::ptrdiff_t i, std::size_t n) {
  const auto m = static_cast<std::ptrdiff_t>(n);
  return static_cast<std::size_t>(((i % m) + m) % m);
}

inline CorrMap empty_map(const FieldGrid& f, const TransformOptions& opt) {
  if (opt.pad < 1) throw Error(ErrorCode::InvalidArgument, "padding factor must be >= 1");
  const std::size_t mw = opt.pad * f.spec.n_omega;
  const std::size_t mk = opt.pad * f.spec.n_k;
  CorrMap map;
  map.n_tau = opt.crop ? mw / 2 : mw;
  map.n_xi = opt.crop ? mk / 2 : mk;
  map.d_tau = kTwoPi / (static_cast<double>(mw) * f.spec.d_omega());
  map.d_xi = kTwoPi / (static_cast<double>(mk) * f.spec.d_k());
  map.values = Grid2D<std::complex<double>>(map.n_tau, map.n_xi);
  return map;
}

}  // namespace detail

/// G(tau, xi) = sum_{p,q} F(omega_p, k_q) exp(i k_q xi - i (omega_p - omega_0) tau) d_omega d_k
/// evaluated with one zero-padded 2D FFT.
inline CorrMap correlation_transform(const FieldGrid& field, const TransformOptions& opt = {}) {
  detail::check_transformable(field);
  CorrMap map = detail::empty_map(field, opt);
  const std::size_t nw = field.spec.n_omega;
  const std::size_t nk = field.spec.n_k;
  const std::size_t mw = opt.pad * nw;
  const std::size_t mk = opt.pad * nk;

  // Signed offsets p - nw/2 wrap into the padded array so that the DFT phase
  // equals the physical one exactly.
  Grid2D<std::complex<double>> work(mw, mk);
  for (std::size_t p = 0; p < nw; ++p) {
    const std::size_t r = detail::wrap(static_cast<std::ptrdiff_t>(p) - static_cast<std::ptrdiff_t>(nw / 2), mw);
    for (std::size_t q = 0; q < nk; ++q) {
      const std::size_t c =
          detail::wrap(static_cast<std::ptrdiff_t>(q) - static_cast<std::ptrdiff_t>(nk / 2), mk);
      work(r, c) = field.values(p, q);
    }
  }
  forward_dft_2d(work);

  // exp(+i k xi) is the forward kernel read at -xi.
  const double cell = field.spec.d_omega() * field.spec.d_k();
  for (std::size_t j = 0; j < map.n_tau; ++j) {
    const auto tau_idx = static_cast<std::ptrdiff_t>(j) - static_cast<std::ptrdiff_t>(map.n_tau / 2);
    const std::size_t r = detail::wrap(tau_idx, mw);
    for (std::size_t l = 0; l < map.n_xi; ++l) {
      const auto xi_idx = static_cast<std::ptrdiff_t>(l) - static_cast<std::ptrdiff_t>(map.n_xi / 2);
      map.values(j, l) = work(r, detail::wrap(-xi_idx, mk)) * cell;
    }
  }
  return map;
}

/// Largest grid the literal O(N^4) evaluation accepts per axis.
inline constexpr std::size_t kOracleMaxSize = 64;

/// Literal double sum on the same (tau, xi) samples as correlation_transform.
inline CorrMap direct_transform_oracle(const FieldGrid& field, const TransformOptions& opt = {}) {
  if (field.spec.n_omega > kOracleMaxSize || field.spec.n_k > kOracleMaxSize) {
    throw Error(ErrorCode::GridTooLarge, "direct transform limited to 64 x 64 grids");
  }
  detail::check_transformable(field);
  CorrMap map = detail::empty_map(field, opt);
  const double cell = field.spec.d_omega() * field.spec.d_k();
  for (std::size_t j = 0; j < map.n_tau; ++j) {
    const double tau = map.tau_at(j);
    for (std::size_t l = 0; l < map.n_xi; ++l) {
      const double xi = map.xi_at(l);
      std::complex<double> acc{};
      for (std::size_t p = 0; p < field.spec.n_omega; ++p) {
        const double detuning = field.spec.detuning_at(p);
        for (std::size_t q = 0; q < field.spec.n_k; ++q) {
          const double phase = field.spec.k_at(q) * xi - detuning * tau;
          acc += field.values(p, q) * std::polar(1.0, phase);
        }
      }
      map.values(j, l) = acc * cell;
    }
  }
  return map;
}

/// First-order (Wiener-Khinchine) map from a frequency-wavevector spectrum.
inline CorrMap g1_map(const FieldGrid& spectrum, const TransformOptions& opt = {}) {
  if (spectrum.kind != FieldKind::Intensity) {
    throw Error(ErrorCode::InvalidArgument, "g1_map expects an intensity grid");
  }
  CorrMap map = correlation_transform(spectrum, opt);
  map.order = CorrOrder::First;
  return map;
}

/// |transform of F|^2 divided by its maximum; no unit background.
inline CorrMap g2_from_transform(CorrMap map) {
  double peak = 0.0;
  for (auto& v : map.values.data()) {
    v = std::norm(v);
    peak = std::max(peak, v.real());
  }
  if (!(peak > 0.0)) throw Error(ErrorCode::AllZeroField, "amplitude transforms to zero everywhere");
  for (auto& v : map.values.data()) v /= peak;
  map.order = CorrOrder::Second;
  map.normalized = true;
  return map;
}

inline CorrMap g2_map(const FieldGrid& amplitude, const TransformOptions& opt = {}) {
  if (amplitude.kind != FieldKind::Amplitude) {
    throw Error(ErrorCode::InvalidArgument, "g2_map expects an amplitude grid");
  }
  bool any = false;
  for (const auto& v : amplitude.values.data()) any = any || v != std::complex<double>{};
  if (!any) throw Error(ErrorCode::AllZeroField, "amplitude is zero everywhere");
  return g2_from_transform(correlation_transform(amplitude, opt));
}

// ---------------------------------------------------------------------------
// Azimuthal phase shaping

/// exp(i n phi) with phi measured in ring-normalized coordinates
/// ((omega - omega_c) / omega_scale, (k - k_c) / k_scale).
struct PhaseMask {
  int order_n = 0;
  double omega_scale = 1.0;  // rad/s
  double k_scale = 1.0;      // rad/m
  double omega_center = 0.0;
  double k_center = 0.0;

  double azimuth(double omega, double k) const {
    return std::atan2((k - k_center) / k_scale, (omega - omega_center) / omega_scale);
  }
};

struct RingScales {
  double omega_scale = 0.0;
  double k_scale = 0.0;
};

namespace detail {

/// Distance from index `center` to the outermost half-maximum crossing of a 1D
/// profile, interpolated linearly, in cells. Looks in direction `dir` (+1/-1).
inline double outer_half_max_extent(const std::vector<double>& y, std::size_t center, int dir) {
  const double peak = *std::max_element(y.begin(), y.end());
  const double half = 0.5 * peak;
  std::ptrdiff_t i = dir > 0 ? static_cast<std::ptrdiff_t>(y.size()) - 1 : 0;
  const auto c = static_cast<std::ptrdiff_t>(center);
  while (i != c && y[static_cast<std::size_t>(i)] < half) i -= dir;
  if (i == c) return 0.0;
  const std::ptrdiff_t next = i + dir;
  double frac = 0.0;
  if (next >= 0 && next < static_cast<std::ptrdiff_t>(y.size())) {
    const double a = y[static_cast<std::size_t>(i)];
    const double b = y[static_cast<std::size_t>(next)];
    frac = a == b ? 0.0 : (a - half) / (a - b);
  }
  return std::abs(static_cast<double>(i - c)) + frac;
}

}  // namespace detail

/// Half-maximum half-extents of |F| along both axes through (omega_0, 0),
/// averaged over the two sides of each axis.
inline RingScales ring_scales(const FieldGrid& amplitude) {
  const std::size_t nw = amplitude.spec.n_omega;
  const std::size_t nk = amplitude.spec.n_k;
  const std::size_t cw = nw / 2;
  const std::size_t ck = nk / 2;
  std::vector<double> along_omega(nw);
  std::vector<double> along_k(nk);
  for (std::size_t p = 0; p < nw; ++p) along_omega[p] = std::abs(amplitude.values(p, ck));
  for (std::size_t q = 0; q < nk; ++q) along_k[q] = std::abs(amplitude.values(cw, q));
  if (*std::max_element(along_omega.begin(), along_omega.end()) <= 0.0 ||
      *std::max_element(along_k.begin(), along_k.end()) <= 0.0) {
    throw Error(ErrorCode::AllZeroField, "amplitude vanishes on an axis through the ring centre");
  }
  const double ew = 0.5 * (detail::outer_half_max_extent(along_omega, cw, +1) +
                           detail::outer_half_max_extent(along_omega, cw, -1));
  const double ek = 0.5 * (detail::outer_half_max_extent(along_k, ck, +1) +
                           detail::outer_half_max_extent(along_k, ck, -1));
  RingScales s{ew * amplitude.spec.d_omega(), ek * amplitude.spec.d_k()};
  if (!(s.omega_scale > 0.0 && s.k_scale > 0.0)) {
    throw Error(ErrorCode::PeakNotResolved, "ring half-extent below one grid cell");
  }
  return s;
}

inline PhaseMask make_phase_mask(int order_n, const RingScales& scales, const GridSpec& grid) {
  return {order_n, scales.omega_scale, scales.k_scale, grid.omega_center, 0.0};
}

inline FieldGrid apply_phase_mask(FieldGrid amplitude, const PhaseMask& mask) {
  if (!(mask.omega_scale > 0.0 && mask.k_scale > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "mask scales must be positive");
  }
  if (mask.order_n == 0) return amplitude;
  const GridSpec& g = amplitude.spec;
  for (std::size_t p = 0; p < g.n_omega; ++p) {
    const double omega = g.omega_at(p);
    for (std::size_t q = 0; q < g.n_k; ++q) {
      const double phi = mask.azimuth(omega, g.k_at(q));
      amplitude.values(p, q) *= std::polar(1.0, mask.order_n * phi);
    }
  }
  return amplitude;
}

/// arg(exp(i n phi)) on the grid, in (-pi, pi].
inline Grid2D<double> mask_phase_map(const PhaseMask& mask, const GridSpec& g) {
  Grid2D<double> out(g.n_omega, g.n_k);
  for (std::size_t p = 0; p < g.n_omega; ++p) {
    for (std::size_t q = 0; q < g.n_k; ++q) {
      out(p, q) = std::arg(std::polar(1.0, mask.order_n * mask.azimuth(g.omega_at(p), g.k_at(q))));
    }
  }
  return out;
}

/// Same frequency sampling, transverse span rescaled so the grid is square in
/// ring-normalized coordinates.
inline GridSpec ring_matched_grid(const GridSpec& grid, const RingScales& scales) {
  GridSpec g = grid;
  g.k_halfspan = grid.omega_halfspan * scales.k_scale / scales.omega_scale;
  return g;
}

// ---------------------------------------------------------------------------
// Ring fit

struct RingFitResult {
  double tau_c = 0.0;  // s
  double xi_c = 0.0;   // m
  double rms_residual = 0.0;
  bool valid = false;
};

inline constexpr int kRingFitRays = 64;
inline constexpr double kRingFitMaxResidual = 0.2;
inline constexpr double kRingFitMedianFactor = 3.0;

namespace detail {

/// Sub-cell position of the sample maximum via a three-point parabola.
inline double parabolic_peak(const std::vector<double>& y, std::size_t i) {
  if (i == 0 || i + 1 >= y.size()) return static_cast<double>(i);
  const double a = y[i - 1];
  const double b = y[i];
  const double c = y[i + 1];
  const double denom = a - 2.0 * b + c;
  if (denom >= 0.0) return static_cast<double>(i);
  return static_cast<double>(i) + 0.5 * (a - c) / denom;
}

/// Profile |map| from the origin outwards along +tau (axis 0) or +xi (axis 1).
inline std::vector<double> positive_cut(const CorrMap& map, int axis) {
  std::vector<double> y;
  if (axis == 0) {
    for (std::size_t j = map.tau_center(); j < map.n_tau; ++j) y.push_back(std::abs(map.values(j, map.xi_center())));
  } else {
    for (std::size_t l = map.xi_center(); l < map.n_xi; ++l) y.push_back(std::abs(map.values(map.tau_center(), l)));
  }
  return y;
}

/// Position (cells) of the maximum over strictly positive offsets, or empty when
/// the profile only falls away from the origin.
inline std::optional<double> off_origin_peak(const std::vector<double>& y) {
  if (y.size() < 3) return std::nullopt;
  const auto it = std::max_element(y.begin() + 1, y.end());
  const auto i = static_cast<std::size_t>(it - y.begin());
  if (i == 1 && y[0] >= y[1]) return std::nullopt;
  if (i + 1 == y.size()) return std::nullopt;
  return parabolic_peak(y, i);
}

}  // namespace detail


/// True when the positive cut along `axis` (0: tau, 1: xi) has a strict local
/// maximum away from the origin, i.e. a ring around the central peak.
inline bool has_off_origin_ridge(const CorrMap& map, int axis) {
  const auto y = detail::positive_cut(map, axis);
  for (std::size_t i = 2; i + 1 < y.size(); ++i) {
    if (y[i] > y[i - 1] && y[i] >= y[i + 1]) return true;
  }
  return false;
}

inline double median_abs(const CorrMap& map) {
  std::vector<double> v(map.values.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::abs(map.values.data()[i]);
  auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

inline double sample_abs(const CorrMap& map, double tau, double xi) {
  const double r = tau / map.d_tau + static_cast<double>(map.tau_center());
  const double c = xi / map.d_xi + static_cast<double>(map.xi_center());
  if (r < 0.0 || c < 0.0 || r > map.n_tau - 1.0 || c > map.n_xi - 1.0) return 0.0;
  const auto r0 = std::min(static_cast<std::size_t>(r), map.n_tau - 2);
  const auto c0 = std::min(static_cast<std::size_t>(c), map.n_xi - 2);
  const double fr = r - static_cast<double>(r0);
  const double fc = c - static_cast<double>(c0);
  return (1 - fr) * (1 - fc) * std::abs(map.values(r0, c0)) + (1 - fr) * fc * std::abs(map.values(r0, c0 + 1)) +
         fr * (1 - fc) * std::abs(map.values(r0 + 1, c0)) + fr * fc * std::abs(map.values(r0 + 1, c0 + 1));
}

/// tau_c and xi_c are the off-origin maxima of the two axis cuts; the ridge
/// radius along 64 rays in (tau/tau_c, xi/xi_c) gives the residual.
inline RingFitResult ring_fit(const CorrMap& map) {
  if (map.order != CorrOrder::Second || !map.normalized) {
    throw Error(ErrorCode::InvalidArgument, "ring_fit expects a normalized second-order map");
  }
  RingFitResult result;
  const auto tau_cut = detail::positive_cut(map, 0);
  const auto xi_cut = detail::positive_cut(map, 1);
  const auto tau_peak = detail::off_origin_peak(tau_cut);
  const auto xi_peak = detail::off_origin_peak(xi_cut);
  if (!tau_peak || !xi_peak) return result;  // central peak only: no ring
  result.tau_c = *tau_peak * map.d_tau;
  result.xi_c = *xi_peak * map.d_xi;

  const double r_max = std::min({2.0, 0.5 * map.n_tau * map.d_tau / result.tau_c,
                                 0.5 * map.n_xi * map.d_xi / result.xi_c});
  constexpr double kStep = 0.005;
  const auto samples = static_cast<std::size_t>(r_max / kStep);
  double sum_sq = 0.0;
  std::vector<double> profile(samples);
  for (int ray = 0; ray < kRingFitRays; ++ray) {
    const double psi = kTwoPi * ray / kRingFitRays;
    const double ct = std::cos(psi);
    const double sx = std::sin(psi);
    for (std::size_t s = 0; s < samples; ++s) {
      const double r = kStep * static_cast<double>(s + 1);
      profile[s] = sample_abs(map, r * ct * result.tau_c, r * sx * result.xi_c);
    }
    const auto i = static_cast<std::size_t>(std::max_element(profile.begin(), profile.end()) - profile.begin());
    const double r_ridge = kStep * (detail::parabolic_peak(profile, i) + 1.0);
    sum_sq += (r_ridge - 1.0) * (r_ridge - 1.0);
  }
  result.rms_residual = std::sqrt(sum_sq / kRingFitRays);

  const double floor = kRingFitMedianFactor * median_abs(map);
  const double tau_height = tau_cut[static_cast<std::size_t>(std::lround(*tau_peak))];
  const double xi_height = xi_cut[static_cast<std::size_t>(std::lround(*xi_peak))];
  result.valid = result.rms_residual < kRingFitMaxResidual && tau_height > floor && xi_height > floor &&
                 result.tau_c > 0.0 && result.xi_c > 0.0;
  return result;
}

// ---------------------------------------------------------------------------
// Widths and Fedorov ratios

struct WidthsReport {
  double spectrum_fwhm_omega = 0.0;  // rad/s
  double spectrum_fwhm_k = 0.0;      // rad/m
  double corr_fwhm_tau = 0.0;        // s
  double corr_fwhm_xi = 0.0;         // m
  double fedorov_omega = 0.0;
  double fedorov_k = 0.0;
};

/// FWHM-product of a Fourier-limited Gaussian: S <-> |G1| gives 8 ln 2,
/// F <-> |transform F|^2 gives 4 ln 2.
inline double fourier_limited_product(CorrOrder order) {
  return (order == CorrOrder::First ? 8.0 : 4.0) * std::log(2.0);
}

/// Full width at half maximum (cells) of the peak containing index `at`.
inline double fwhm_cells(const std::vector<double>& y, std::size_t at) {
  const double half = 0.5 * y[at];
  if (!(half > 0.0)) throw Error(ErrorCode::PeakNotResolved, "profile vanishes at its peak");
  std::size_t r = at;
  while (r + 1 < y.size() && y[r + 1] >= half) ++r;
  std::size_t l = at;
  while (l > 0 && y[l - 1] >= half) --l;
  if (r + 1 >= y.size() || l == 0) throw Error(ErrorCode::PeakNotResolved, "half maximum not reached inside the grid");
  const double right = static_cast<double>(r) + (y[r] - half) / (y[r] - y[r + 1]);
  const double left = static_cast<double>(l) - (y[l] - half) / (y[l] - y[l - 1]);
  return right - left;
}

inline constexpr double kMinResolvedCells = 3.0;

inline WidthsReport widths_and_fedorov(const FieldGrid& spectrum, const CorrMap& corr) {
  if (spectrum.kind != FieldKind::Intensity) {
    throw Error(ErrorCode::InvalidArgument, "widths_and_fedorov expects an intensity grid");
  }
  const std::size_t nw = spectrum.spec.n_omega;
  const std::size_t nk = spectrum.spec.n_k;
  std::vector<double> marginal_omega(nw, 0.0);
  std::vector<double> marginal_k(nk, 0.0);
  for (std::size_t p = 0; p < nw; ++p) {
    for (std::size_t q = 0; q < nk; ++q) {
      const double s = spectrum.values(p, q).real();
      marginal_omega[p] += s;
      marginal_k[q] += s;
    }
  }
  auto peak_of = [](const std::vector<double>& y) {
    return static_cast<std::size_t>(std::max_element(y.begin(), y.end()) - y.begin());
  };
  auto resolved = [](double cells, const char* what) {
    if (cells < kMinResolvedCells) throw Error(ErrorCode::PeakNotResolved, std::string(what) + " spans fewer than 3 cells");
    return cells;
  };
  WidthsReport w;
  w.spectrum_fwhm_omega = resolved(fwhm_cells(marginal_omega, peak_of(marginal_omega)), "spectral omega FWHM") *
                          spectrum.spec.d_omega();
  w.spectrum_fwhm_k = resolved(fwhm_cells(marginal_k, peak_of(marginal_k)), "spectral k FWHM") * spectrum.spec.d_k();

  std::vector<double> tau_cut(corr.n_tau);
  std::vector<double> xi_cut(corr.n_xi);
  for (std::size_t j = 0; j < corr.n_tau; ++j) tau_cut[j] = std::abs(corr.values(j, corr.xi_center()));
  for (std::size_t l = 0; l < corr.n_xi; ++l) xi_cut[l] = std::abs(corr.values(corr.tau_center(), l));
  w.corr_fwhm_tau = resolved(fwhm_cells(tau_cut, corr.tau_center()), "correlation tau FWHM") * corr.d_tau;
  w.corr_fwhm_xi = resolved(fwhm_cells(xi_cut, corr.xi_center()), "correlation xi FWHM") * corr.d_xi;

  const double ref = fourier_limited_product(corr.order);
  w.fedorov_omega = w.spectrum_fwhm_omega * w.corr_fwhm_tau / ref;
  w.fedorov_k = w.spectrum_fwhm_k * w.corr_fwhm_xi / ref;
  return w;
}

}  // namespace pdc
