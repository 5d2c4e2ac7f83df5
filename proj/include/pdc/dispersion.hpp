#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "pdc/constants.hpp"
#include "pdc/error.hpp"

namespace pdc {

/// Four-term Sellmeier fit n^2(lambda) = A + B / (lambda^2 - C) - D * lambda^2,
/// with lambda in micrometres, valid on [lambda_min_um, lambda_max_um].
struct SellmeierSet {
  double A = 0.0;
  double B = 0.0;  // um^2
  double C = 0.0;  // um^2
  double D = 0.0;  // um^-2
  double lambda_min_um = 0.0;
  double lambda_max_um = 0.0;

  bool in_window(double lambda_um) const {
    return lambda_um >= lambda_min_um && lambda_um <= lambda_max_um;
  }

  /// n^2 without any window check.
  double index_squared(double lambda_um) const {
    const double l2 = lambda_um * lambda_um;
    return A + B / (l2 - C) - D * l2;
  }

  double index(double lambda_um) const {
    if (!in_window(lambda_um)) {
      throw Error(ErrorCode::OutOfValidityRange,
                  "wavelength " + std::to_string(lambda_um) + " um outside Sellmeier window [" +
                      std::to_string(lambda_min_um) + ", " + std::to_string(lambda_max_um) + "]");
    }
    return std::sqrt(index_squared(lambda_um));
  }
};

/// Checks C > 0, no pole inside the window and n^2 > 1 across it (sampled).
inline void validate(const SellmeierSet& s) {
  if (!(s.C > 0.0)) throw Error(ErrorCode::InvalidArgument, "Sellmeier C must be positive");
  if (!(s.lambda_min_um > 0.0) || !(s.lambda_max_um > s.lambda_min_um)) {
    throw Error(ErrorCode::InvalidArgument, "Sellmeier validity window is empty");
  }
  if (!(s.lambda_min_um * s.lambda_min_um > s.C)) {
    throw Error(ErrorCode::InvalidArgument, "Sellmeier pole lies inside the validity window");
  }
  constexpr int kSamples = 256;
  for (int i = 0; i <= kSamples; ++i) {
    const double l = s.lambda_min_um + (s.lambda_max_um - s.lambda_min_um) * i / kSamples;
    if (!(s.index_squared(l) > 1.0)) {
      throw Error(ErrorCode::InvalidArgument, "Sellmeier n^2 <= 1 inside the validity window");
    }
  }
}

struct CrystalSpec {
  std::string name;
  SellmeierSet sellmeier_o;
  SellmeierSet sellmeier_e;
  double length_m = 0.0;
  double cut_angle_rad = 0.0;  // between pump wavevector and optic axis
};

inline void validate(const CrystalSpec& c) {
  validate(c.sellmeier_o);
  validate(c.sellmeier_e);
  if (!(c.length_m > 0.0)) throw Error(ErrorCode::InvalidArgument, "crystal length must be positive");
  if (!(c.cut_angle_rad > 0.0 && c.cut_angle_rad < kPi / 2)) {
    throw Error(ErrorCode::InvalidArgument, "cut angle must lie in (0, pi/2)");
  }
}

/// Returns a copy of the crystal with a different orientation.
inline CrystalSpec with_cut_angle(CrystalSpec c, double cut_angle_rad) {
  c.cut_angle_rad = cut_angle_rad;
  return c;
}

/// Beta-barium borate, 0.22-2.6 um.
inline CrystalSpec bbo(double length_m = 10e-3, double cut_angle_rad = deg_to_rad(19.9)) {
  CrystalSpec c;
  c.name = "BBO";
  c.sellmeier_o = {2.7359, 0.01878, 0.01822, 0.01354, 0.22, 2.6};
  c.sellmeier_e = {2.3753, 0.01224, 0.01667, 0.01516, 0.22, 2.6};
  c.length_m = length_m;
  c.cut_angle_rad = cut_angle_rad;
  return c;
}

class Polarization {
 public:
  enum class Kind { Ordinary, ExtraordinaryPrincipal, ExtraordinaryAtAngle };

  static Polarization ordinary() { return Polarization(Kind::Ordinary, 0.0); }
  static Polarization extraordinary_principal() {
    return Polarization(Kind::ExtraordinaryPrincipal, kPi / 2);
  }
  static Polarization extraordinary_at(double theta_rad) {
    if (!(theta_rad >= 0.0 && theta_rad <= kPi / 2)) {
      throw Error(ErrorCode::InvalidArgument, "extraordinary angle must lie in [0, pi/2]");
    }
    return Polarization(Kind::ExtraordinaryAtAngle, theta_rad);
  }

  Kind kind() const { return kind_; }
  double theta() const { return theta_; }

 private:
  Polarization(Kind kind, double theta) : kind_(kind), theta_(theta) {}

  Kind kind_;
  double theta_;
};

inline double refractive_index(double lambda_um, const Polarization& pol, const CrystalSpec& crystal) {
  switch (pol.kind()) {
    case Polarization::Kind::Ordinary:
      return crystal.sellmeier_o.index(lambda_um);
    case Polarization::Kind::ExtraordinaryPrincipal:
      return crystal.sellmeier_e.index(lambda_um);
    case Polarization::Kind::ExtraordinaryAtAngle: {
      const double no = crystal.sellmeier_o.index(lambda_um);
      const double ne = crystal.sellmeier_e.index(lambda_um);
      const double c = std::cos(pol.theta());
      const double s = std::sin(pol.theta());
      return 1.0 / std::sqrt(c * c / (no * no) + s * s / (ne * ne));
    }
  }
  return 0.0;
}

/// k = n(omega) * omega / c in rad/m.
inline double wavevector_magnitude(double omega, const Polarization& pol, const CrystalSpec& crystal) {
  if (!(omega > 0.0)) throw Error(ErrorCode::DegenerateInput, "frequency must be positive");
  const double lambda_um = wavelength_from_omega(omega) * 1e6;
  return refractive_index(lambda_um, pol, crystal) * omega / kSpeedOfLight;
}

/// Relative frequency step of the central second difference used by gvd().
inline constexpr double kGvdRelativeStep = 1e-4;

/// beta_2 = d^2k/d omega^2 [s^2/m]; positive is normal, negative anomalous dispersion.
inline double gvd(double lambda_um, const Polarization& pol, const CrystalSpec& crystal) {
  const double omega = omega_from_wavelength(lambda_um * 1e-6);
  const double h = kGvdRelativeStep * omega;
  const double kp = wavevector_magnitude(omega + h, pol, crystal);
  const double k0 = wavevector_magnitude(omega, pol, crystal);
  const double km = wavevector_magnitude(omega - h, pol, crystal);
  return (kp - 2.0 * k0 + km) / (h * h);
}

/// Bisection tolerance on the zero-dispersion wavelength [um].
inline constexpr double kZdwToleranceUm = 1e-6;

/// Zero of gvd() on the Sellmeier window, shrunk so that the finite-difference
/// neighbours stay inside it. The first sign change of a coarse scan is refined.
inline double zero_dispersion_wavelength(const Polarization& pol, const CrystalSpec& crystal) {
  double lo_w = crystal.sellmeier_o.lambda_min_um;
  double hi_w = crystal.sellmeier_o.lambda_max_um;
  if (pol.kind() != Polarization::Kind::Ordinary) {
    lo_w = pol.kind() == Polarization::Kind::ExtraordinaryPrincipal
               ? crystal.sellmeier_e.lambda_min_um
               : std::max(lo_w, crystal.sellmeier_e.lambda_min_um);
    hi_w = pol.kind() == Polarization::Kind::ExtraordinaryPrincipal
               ? crystal.sellmeier_e.lambda_max_um
               : std::min(hi_w, crystal.sellmeier_e.lambda_max_um);
  }
  // lambda(omega +- h) differs from lambda by a factor 1 -+ h/omega to first order.
  const double margin = 2.0 * kGvdRelativeStep;
  lo_w *= 1.0 + margin;
  hi_w *= 1.0 - margin;
  if (!(hi_w > lo_w)) throw Error(ErrorCode::NoSignChange, "validity window too narrow");

  constexpr int kScan = 400;
  double a = lo_w;
  double ga = gvd(a, pol, crystal);
  for (int i = 1; i <= kScan; ++i) {
    double b = lo_w + (hi_w - lo_w) * i / kScan;
    const double gb = gvd(b, pol, crystal);
    if (ga == 0.0) return a;
    if ((ga < 0.0) != (gb < 0.0)) {
      while (b - a > kZdwToleranceUm) {
        const double m = 0.5 * (a + b);
        const double gm = gvd(m, pol, crystal);
        if ((gm < 0.0) == (ga < 0.0)) {
          a = m;
          ga = gm;
        } else {
          b = m;
        }
      }
      return 0.5 * (a + b);
    }
    a = b;
    ga = gb;
  }
  throw Error(ErrorCode::NoSignChange, "group-velocity dispersion does not change sign in the window");
}

}  // namespace pdc
