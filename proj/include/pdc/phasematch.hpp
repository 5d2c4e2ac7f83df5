#pragma once

#include <cmath>
#include <complex>
#include <optional>
#include <vector>

#include "pdc/constants.hpp"
#include "pdc/dispersion.hpp"
#include "pdc/error.hpp"

namespace pdc {

/// Monochromatic plane-wave pump. gain_GL = 0 selects the low-gain spectrum.
struct PumpSpec {
  double lambda_m = 800e-9;
  double gain_GL = 0.0;

  double omega() const { return omega_from_wavelength(lambda_m); }
};

struct MismatchPoint {
  double omega_s = 0.0;
  double k_perp = 0.0;
  double delta_k = 0.0;  // meaningful only when propagating
  bool propagating = false;
};

/// Pump wavevector: extraordinary wave at the crystal cut angle.
inline double pump_wavevector(const PumpSpec& pump, const CrystalSpec& crystal) {
  return wavevector_magnitude(pump.omega(), Polarization::extraordinary_at(crystal.cut_angle_rad),
                              crystal);
}

/// Longitudinal mismatch for given wavevector magnitudes; empty if either
/// daughter photon is evanescent at this transverse wavevector.
inline std::optional<double> longitudinal_mismatch(double k_pump, double k_signal, double k_idler,
                                                   double k_perp) {
  const double q2 = k_perp * k_perp;
  const double s2 = k_signal * k_signal - q2;
  const double i2 = k_idler * k_idler - q2;
  if (s2 < 0.0 || i2 < 0.0) return std::nullopt;
  return k_pump - std::sqrt(s2) - std::sqrt(i2);
}

inline MismatchPoint delta_k(double omega_s, double k_perp, const PumpSpec& pump,
                             const CrystalSpec& crystal) {
  const double omega_p = pump.omega();
  if (!(omega_s > 0.0 && omega_s < omega_p)) {
    throw Error(ErrorCode::DegenerateInput, "signal frequency must lie strictly between 0 and the pump");
  }
  const double omega_i = omega_p - omega_s;
  const auto ord = Polarization::ordinary();
  const double ks = wavevector_magnitude(omega_s, ord, crystal);
  const double ki = wavevector_magnitude(omega_i, ord, crystal);
  const double kp = pump_wavevector(pump, crystal);

  MismatchPoint pt;
  pt.omega_s = omega_s;
  pt.k_perp = k_perp;
  if (const auto dk = longitudinal_mismatch(kp, ks, ki, k_perp)) {
    pt.delta_k = *dk;
    pt.propagating = true;
  }
  return pt;
}

/// Stop criterion of the phase-matching angle search: |dk| * L.
inline constexpr double kPhaseMatchTolerance = 1e-6;

/// Cut angle for which degenerate collinear emission at lambda_deg = 2 lambda_p
/// is exactly phase matched.
inline double collinear_degenerate_angle(double lambda_deg_m, const PumpSpec& pump,
                                         const CrystalSpec& crystal) {
  if (std::abs(lambda_deg_m - 2.0 * pump.lambda_m) > 1e-9 * lambda_deg_m) {
    throw Error(ErrorCode::DegenerateInput, "degenerate wavelength must equal twice the pump wavelength");
  }
  const double omega_s = 0.5 * pump.omega();
  auto mismatch = [&](double theta) {
    return delta_k(omega_s, 0.0, pump, with_cut_angle(crystal, theta)).delta_k;
  };
  double lo = 0.0;
  double hi = kPi / 2;
  const double f_lo = mismatch(lo);
  const double f_hi = mismatch(hi);
  if ((f_lo < 0.0) == (f_hi < 0.0)) {
    throw Error(ErrorCode::NoSignChange, "no collinear degenerate phase matching in (0, 90) deg");
  }
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double f = mismatch(mid);
    if (std::abs(f) * crystal.length_m < kPhaseMatchTolerance) return mid;
    if ((f < 0.0) == (f_lo < 0.0)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// sin(x)/x * exp(i x) with x = dk L / 2.
inline std::complex<double> sinc_amplitude(double half_phase) {
  const double x = half_phase;
  const double sinc = std::abs(x) < 1e-4 ? 1.0 - x * x / 6.0 : std::sin(x) / x;
  return sinc * std::complex<double>(std::cos(x), std::sin(x));
}

/// Parametric intensity at gain G for half-mismatch x:
/// G^2 |sinh(gL)/(gL)|^2 with (gL)^2 = G^2 - x^2, continued through (gL)^2 < 0.
inline double high_gain_intensity(double gain, double half_phase) {
  const double q = gain * gain - half_phase * half_phase;
  double ratio = 1.0;
  if (std::abs(q) < 1e-6) {
    ratio = 1.0 + q / 6.0 + q * q / 120.0;
  } else if (q > 0.0) {
    const double r = std::sqrt(q);
    ratio = std::sinh(r) / r;
  } else {
    const double r = std::sqrt(-q);
    ratio = std::sin(r) / r;
  }
  return gain * gain * ratio * ratio;
}

inline std::complex<double> amplitude_from_mismatch(const MismatchPoint& pt, double length_m) {
  if (!pt.propagating) return {0.0, 0.0};
  return sinc_amplitude(0.5 * pt.delta_k * length_m);
}

inline double intensity_from_mismatch(const MismatchPoint& pt, double length_m, double gain) {
  if (!pt.propagating) return 0.0;
  const double x = 0.5 * pt.delta_k * length_m;
  if (gain == 0.0) return std::norm(sinc_amplitude(x));
  return high_gain_intensity(gain, x);
}

inline std::complex<double> spectral_amplitude(double omega_s, double k_perp, const PumpSpec& pump,
                                               const CrystalSpec& crystal) {
  return amplitude_from_mismatch(delta_k(omega_s, k_perp, pump, crystal), crystal.length_m);
}

inline double spectrum_value(double omega_s, double k_perp, const PumpSpec& pump,
                             const CrystalSpec& crystal) {
  if (pump.gain_GL < 0.0) throw Error(ErrorCode::InvalidArgument, "gain must be non-negative");
  return intensity_from_mismatch(delta_k(omega_s, k_perp, pump, crystal), crystal.length_m,
                                 pump.gain_GL);
}

struct TuningPoint {
  double lambda_m = 0.0;
  double theta_ext_rad = 0.0;
};

struct WavelengthRange {
  double min_m = 0.0;
  double max_m = 0.0;
  int count = 0;

  double at(int i) const { return count == 1 ? min_m : min_m + (max_m - min_m) * i / (count - 1); }
};

/// Phase-matched loci dk = 0 in (lambda, external angle) for one crystal orientation.
/// Every lambda of the range is searched over |theta_ext| <= theta_ext_max.
inline std::vector<TuningPoint> tuning_curve(double theta_cut, const PumpSpec& pump,
                                             const CrystalSpec& crystal,
                                             const WavelengthRange& lambdas, double theta_ext_max,
                                             int k_scan_points = 4000) {
  if (lambdas.count < 1 || !(lambdas.max_m >= lambdas.min_m) || !(lambdas.min_m > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "bad wavelength range");
  }
  if (!(theta_ext_max > 0.0 && theta_ext_max <= kPi / 2)) {
    throw Error(ErrorCode::InvalidArgument, "external angle range must lie in (0, pi/2]");
  }
  const CrystalSpec oriented = with_cut_angle(crystal, theta_cut);
  const double omega_p = pump.omega();
  const double kp = pump_wavevector(pump, oriented);
  const double length = crystal.length_m;
  const auto ord = Polarization::ordinary();

  std::vector<TuningPoint> loci;
  for (int i = 0; i < lambdas.count; ++i) {
    const double lambda = lambdas.at(i);
    const double omega = omega_from_wavelength(lambda);
    if (!(omega < omega_p)) {
      throw Error(ErrorCode::OutOfValidityRange, "signal wavelength shorter than the pump");
    }
    const double ks = wavevector_magnitude(omega, ord, oriented);
    const double ki = wavevector_magnitude(omega_p - omega, ord, oriented);
    const double k_max =
        std::min({omega * std::sin(theta_ext_max) / kSpeedOfLight, ks, ki});
    auto f = [&](double k) { return *longitudinal_mismatch(kp, ks, ki, k); };
    auto emit = [&](double k) {
      const double theta = std::asin(std::min(1.0, k * kSpeedOfLight / omega));
      loci.push_back({lambda, theta});
      if (k > 0.0) loci.push_back({lambda, -theta});
    };

    double k_prev = 0.0;
    double f_prev = f(0.0);
    if (std::abs(f_prev) * length < kPhaseMatchTolerance) emit(0.0);
    for (int j = 1; j <= k_scan_points; ++j) {
      const double k = k_max * j / k_scan_points;
      const double fk = f(k);
      if ((fk < 0.0) != (f_prev < 0.0) && std::abs(f_prev) * length >= kPhaseMatchTolerance) {
        double lo = k_prev;
        double hi = k;
        double f_lo = f_prev;
        for (int iter = 0; iter < 100 && hi - lo > 1e-12 * k_max; ++iter) {
          const double mid = 0.5 * (lo + hi);
          const double fm = f(mid);
          if ((fm < 0.0) == (f_lo < 0.0)) {
            lo = mid;
            f_lo = fm;
          } else {
            hi = mid;
          }
        }
        emit(0.5 * (lo + hi));
      }
      k_prev = k;
      f_prev = fk;
    }
  }
  return loci;
}

}  // namespace pdc
