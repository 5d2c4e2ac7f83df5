#pragma once

#include <numbers>

namespace pdc {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s
inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

/// Vacuum wavelength [m] -> angular frequency [rad/s].
inline constexpr double omega_from_wavelength(double lambda_m) {
  return kTwoPi * kSpeedOfLight / lambda_m;
}

/// Angular frequency [rad/s] -> vacuum wavelength [m].
inline constexpr double wavelength_from_omega(double omega) {
  return kTwoPi * kSpeedOfLight / omega;
}

}  // namespace pdc
