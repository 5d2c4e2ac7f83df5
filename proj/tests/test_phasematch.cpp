#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "pdc/phasematch.hpp"

using namespace pdc;

namespace {

const PumpSpec kPump800{800e-9, 0.0};
const PumpSpec kPump400{400e-9, 0.0};

}  // namespace

TEST(DeltaK, MatchesWavelengthFormOracle) {
  const double th = deg_to_rad(19.9);
  const CrystalSpec c = bbo(10e-3, th);
  for (double signal_um : {1.3, 1.6, 1.9}) {
    for (double k : {0.0, 2e4, 8e4}) {
      const auto pt = delta_k(omega_from_wavelength(signal_um * 1e-6), k, kPump800, c);
      ASSERT_TRUE(pt.propagating);
      const double ref = oracle::delta_k(0.8, signal_um, k, th);
      EXPECT_NEAR(pt.delta_k, ref, 1e-6 * std::abs(ref) + 1e-3) << signal_um << " " << k;
    }
  }
}

TEST(DeltaK, SymmetricUnderSignalIdlerExchange) {
  const CrystalSpec c = bbo();
  const double wp = kPump800.omega();
  const double ws = 0.43 * wp;
  EXPECT_NEAR(delta_k(ws, 3e4, kPump800, c).delta_k, delta_k(wp - ws, 3e4, kPump800, c).delta_k, 1e-6);
}

TEST(DeltaK, EvenInTransverseWavevector) {
  const CrystalSpec c = bbo();
  const double ws = 0.47 * kPump800.omega();
  EXPECT_DOUBLE_EQ(delta_k(ws, 5e4, kPump800, c).delta_k, delta_k(ws, -5e4, kPump800, c).delta_k);
}

TEST(DeltaK, EvanescentBeyondFullWavevector) {
  const CrystalSpec c = bbo();
  const double ws = 0.5 * kPump800.omega();
  const auto pt = delta_k(ws, 2e7, kPump800, c);
  EXPECT_FALSE(pt.propagating);
  EXPECT_EQ(amplitude_from_mismatch(pt, c.length_m), std::complex<double>(0.0, 0.0));
  EXPECT_EQ(intensity_from_mismatch(pt, c.length_m, 0.0), 0.0);
}

TEST(DeltaK, RejectsFrequencyOutsidePumpBand) {
  const CrystalSpec c = bbo();
  for (double f : {0.0, 1.0, 1.2, -0.1}) {
    try {
      delta_k(f * kPump800.omega(), 0.0, kPump800, c);
      FAIL() << f;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::DegenerateInput);
    }
  }
}

TEST(PhaseMatchAngle, AgreesWithClosedForm800) {
  const double ref = oracle::theta_pm(0.8);
  EXPECT_NEAR(rad_to_deg(ref), 19.866591743, 1e-8);
  const double th = collinear_degenerate_angle(1600e-9, kPump800, bbo());
  EXPECT_NEAR(th, ref, 1e-8);
}

TEST(PhaseMatchAngle, AgreesWithClosedForm400) {
  const double ref = oracle::theta_pm(0.4);
  EXPECT_NEAR(rad_to_deg(ref), 29.178082920, 1e-8);
  EXPECT_NEAR(collinear_degenerate_angle(800e-9, kPump400, bbo()), ref, 1e-8);
}

TEST(PhaseMatchAngle, ResidualBelowTolerance) {
  CrystalSpec c = bbo();
  const double th = collinear_degenerate_angle(1600e-9, kPump800, c);
  const auto pt = delta_k(0.5 * kPump800.omega(), 0.0, kPump800, with_cut_angle(c, th));
  EXPECT_LT(std::abs(pt.delta_k) * c.length_m, kPhaseMatchTolerance);
}

TEST(PhaseMatchAngle, NonDegenerateWavelengthRejected) {
  EXPECT_THROW(collinear_degenerate_angle(1500e-9, kPump800, bbo()), Error);
}

TEST(PhaseMatchAngle, IsotropicCrystalHasNoSolution) {
  CrystalSpec c = bbo();
  c.sellmeier_e = c.sellmeier_o;
  try {
    collinear_degenerate_angle(1600e-9, kPump800, c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoSignChange);
  }
}

TEST(Amplitude, SincTimesPhase) {
  for (double x : {0.0, 1e-6, 0.3, 1.0, -2.5, 7.0}) {
    const auto f = sinc_amplitude(x);
    const std::complex<double> ref = oracle::sinc(x) * std::complex<double>(std::cos(x), std::sin(x));
    EXPECT_NEAR(std::abs(f - ref), 0.0, 1e-14) << x;
  }
  EXPECT_NEAR(std::abs(sinc_amplitude(oracle::pi)), 0.0, 1e-15);
}

TEST(Amplitude, LowGainLimitOfHighGainIntensity) {
  const double g = 1e-3;
  for (double x : {0.0, 0.4, 1.0, 2.0, 3.0, 4.5, 9.0}) {
    const double ref = oracle::sinc(x) * oracle::sinc(x);
    const double s = high_gain_intensity(g, x) / (g * g);
    EXPECT_NEAR(s, ref, 1e-6) << x;
  }
}

TEST(Amplitude, HighGainSeriesContinuousAcrossThreshold) {
  const double g = 2.0;
  const double below = high_gain_intensity(g, 2.0 - 1e-4);
  const double at = high_gain_intensity(g, 2.0);
  const double above = high_gain_intensity(g, 2.0 + 1e-4);
  EXPECT_NEAR(at, g * g, 1e-12);
  EXPECT_NEAR(below, at, 1e-3);
  EXPECT_NEAR(above, at, 1e-3);
}

TEST(Amplitude, HighGainGrowsExponentiallyAtPhaseMatching) {
  EXPECT_NEAR(high_gain_intensity(3.0, 0.0), std::sinh(3.0) * std::sinh(3.0), 1e-9);
}

TEST(Spectrum, ValueIsModulusSquaredOfAmplitude) {
  const CrystalSpec c = bbo(10e-3, deg_to_rad(19.95));
  const double ws = 0.48 * kPump800.omega();
  EXPECT_NEAR(spectrum_value(ws, 1e4, kPump800, c), std::norm(spectral_amplitude(ws, 1e4, kPump800, c)), 1e-15);
  EXPECT_THROW(spectrum_value(ws, 0.0, PumpSpec{800e-9, -1.0}, c), Error);
}

TEST(Tuning, AxisCutHasNoLoci) {
  const auto loci = tuning_curve(0.0, kPump400, bbo(), WavelengthRange{0.6e-6, 1.2e-6, 64}, deg_to_rad(8));
  EXPECT_TRUE(loci.empty());
}

TEST(Tuning, LociSatisfyPhaseMatching) {
  const double th = deg_to_rad(29.5);
  const auto loci = tuning_curve(th, kPump400, bbo(), WavelengthRange{0.6e-6, 1.2e-6, 64}, deg_to_rad(8));
  ASSERT_FALSE(loci.empty());
  for (const auto& p : loci) {
    const double um = p.lambda_m * 1e6;
    const double k = 2.0 * oracle::pi / p.lambda_m * std::sin(p.theta_ext_rad);
    EXPECT_LT(std::abs(oracle::delta_k(0.4, um, k, th)) * 10e-3, 1e-3) << um;
  }
}

TEST(Tuning, LociComeInMirrorPairs) {
  const auto loci = tuning_curve(deg_to_rad(29.5), kPump400, bbo(), WavelengthRange{0.7e-6, 0.9e-6, 9}, deg_to_rad(8));
  std::size_t pos = 0, neg = 0;
  for (const auto& p : loci) {
    if (p.theta_ext_rad > 0) ++pos;
    if (p.theta_ext_rad < 0) ++neg;
  }
  EXPECT_GT(pos, 0u);
  EXPECT_EQ(pos, neg);
}

TEST(Tuning, DegenerateCollinearPointAtPhaseMatchingAngle) {
  const double th = collinear_degenerate_angle(800e-9, kPump400, bbo());
  const auto loci = tuning_curve(th, kPump400, bbo(), WavelengthRange{800e-9, 800e-9, 1}, deg_to_rad(8), 20000);
  ASSERT_FALSE(loci.empty());
  double closest = 1.0;
  for (const auto& p : loci) closest = std::min(closest, std::abs(p.theta_ext_rad));
  EXPECT_LT(closest, 1e-3);
}

TEST(Tuning, BadRangesRejected) {
  EXPECT_THROW(tuning_curve(0.5, kPump400, bbo(), WavelengthRange{0.9e-6, 0.6e-6, 8}, 0.1), Error);
  EXPECT_THROW(tuning_curve(0.5, kPump400, bbo(), WavelengthRange{0.6e-6, 0.9e-6, 8}, 0.0), Error);
  EXPECT_THROW(tuning_curve(0.5, kPump400, bbo(), WavelengthRange{0.3e-6, 0.9e-6, 8}, 0.1), Error);
}
