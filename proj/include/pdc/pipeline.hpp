#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "pdc/constants.hpp"
#include "pdc/correlations.hpp"
#include "pdc/crystal_io.hpp"
#include "pdc/dispersion.hpp"
#include "pdc/error.hpp"
#include "pdc/grid.hpp"
#include "pdc/phasematch.hpp"
#include "pdc/spectra.hpp"
#include "pdc/topology.hpp"

namespace pdc::pipeline {

/// Malformed or inconsistent run configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::filesystem::path crystal_file;  // empty: built-in BBO
  double length_mm = 10.0;

  double lambda_p_nm = 800.0;
  double gain_GL = 0.0;

  bool theta_auto = true;
  double theta_cut_deg = 0.0;
  double delta_deg = 0.0;

  GridDefaults grid;

  int mask_n = 2;
  bool auto_scales = true;
  double mask_omega_scale = 0.0;  // rad/s, used when auto_scales is false
  double mask_k_scale = 0.0;      // rad/m

  bool mode_density = true;
  double fwhm_lambda_nm = 0.0;
  double fwhm_theta_mrad = 0.0;

  std::size_t map_n_lambda = 512;
  std::size_t map_n_theta = 256;
  double map_theta_max_deg = 3.0;

  std::size_t dispersion_n_lambda = 500;

  std::vector<double> tuning_angles_deg;
  std::optional<double> tuning_lambda_min_nm;
  std::optional<double> tuning_lambda_max_nm;
  std::size_t tuning_n_lambda = 256;
  std::size_t tuning_n_theta = 256;
  double tuning_theta_ext_max_deg = 8.0;

  std::filesystem::path out_dir = "pdc_out";
  std::vector<std::string> formats{"csv", "bin", "pgm"};
};

namespace detail {

inline void reject_unknown(const nlohmann::json& obj, const std::string& where,
                           std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <class T>
void read(const nlohmann::json& obj, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("bad value for '") + key + "'");
  }
}

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw ConfigError(msg);
}

}  // namespace detail

inline void validate(const RunConfig& c) {
  using detail::require;
  require(c.length_mm > 0.0 && std::isfinite(c.length_mm), "crystal.length_mm must be positive");
  require(c.lambda_p_nm > 0.0 && std::isfinite(c.lambda_p_nm), "pump.lambda_p_nm must be positive");
  require(c.gain_GL >= 0.0 && std::isfinite(c.gain_GL), "pump.gain_GL must be non-negative");
  require(std::isfinite(c.delta_deg) && std::isfinite(c.theta_cut_deg), "geometry angles must be finite");
  require(c.theta_auto || (c.theta_cut_deg > 0.0 && c.theta_cut_deg < 90.0), "geometry.theta_cut_deg must lie in (0, 90)");
  require(is_power_of_two(c.grid.n_omega) && c.grid.n_omega >= 16, "grid.n_omega must be a power of two >= 16");
  require(is_power_of_two(c.grid.n_k) && c.grid.n_k >= 16, "grid.n_k must be a power of two >= 16");
  require(c.grid.omega_halfspan_frac > 0.0 && c.grid.omega_halfspan_frac < 1.0,
          "grid.omega_halfspan_frac must lie in (0, 1)");
  require(c.grid.k_halfspan_frac > 0.0 && c.grid.k_halfspan_frac < 1.0, "grid.k_halfspan_frac must lie in (0, 1)");
  require(c.mask_n >= 0, "mask.n must be non-negative");
  require(c.auto_scales || (c.mask_omega_scale > 0.0 && c.mask_k_scale > 0.0),
          "mask.omega_scale_rad_s and mask.k_scale_rad_m are required when auto_scales is false");
  require(c.fwhm_lambda_nm >= 0.0 && c.fwhm_theta_mrad >= 0.0, "detection widths must be non-negative");
  require(c.map_n_lambda >= 2 && c.map_n_theta >= 2, "map sizes must be at least 2");
  require(c.map_theta_max_deg > 0.0 && c.map_theta_max_deg < 90.0, "map.theta_max_deg must lie in (0, 90)");
  require(c.dispersion_n_lambda >= 2, "dispersion.n_lambda must be at least 2");
  require(c.tuning_n_lambda >= 2 && c.tuning_n_theta >= 2, "tuning sizes must be at least 2");
  require(c.tuning_theta_ext_max_deg > 0.0 && c.tuning_theta_ext_max_deg <= 90.0,
          "tuning.theta_ext_max_deg must lie in (0, 90]");
  if (c.tuning_lambda_min_nm || c.tuning_lambda_max_nm) {
    require(c.tuning_lambda_min_nm && c.tuning_lambda_max_nm &&
                *c.tuning_lambda_min_nm > 0.0 && *c.tuning_lambda_max_nm > *c.tuning_lambda_min_nm,
            "tuning.lambda_min_nm and lambda_max_nm must both be given, increasing");
  }
  for (double a : c.tuning_angles_deg) require(a >= 0.0 && a <= 90.0, "tuning angles must lie in [0, 90]");
  require(!c.formats.empty(), "outputs.formats must not be empty");
  for (const auto& f : c.formats) {
    require(f == "csv" || f == "bin" || f == "pgm", "unknown output format '" + f + "'");
  }
}

/// Relative crystal paths resolve against `base_dir`.
inline RunConfig parse_run_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = {}) {
  using detail::read;
  using detail::reject_unknown;
  RunConfig c;
  reject_unknown(doc, "config",
                 {"crystal", "pump", "geometry", "grid", "mask", "detection", "map", "dispersion", "tuning", "outputs"});

  if (doc.contains("crystal")) {
    const auto& j = doc.at("crystal");
    reject_unknown(j, "crystal", {"file", "length_mm"});
    std::string file;
    read(j, "file", file);
    if (!file.empty()) {
      std::filesystem::path p(file);
      c.crystal_file = p.is_absolute() || base_dir.empty() ? p : base_dir / p;
    }
    read(j, "length_mm", c.length_mm);
  }
  if (doc.contains("pump")) {
    const auto& j = doc.at("pump");
    reject_unknown(j, "pump", {"lambda_p_nm", "gain_GL"});
    read(j, "lambda_p_nm", c.lambda_p_nm);
    read(j, "gain_GL", c.gain_GL);
  }
  if (doc.contains("geometry")) {
    const auto& j = doc.at("geometry");
    reject_unknown(j, "geometry", {"theta_cut_deg", "delta_deg"});
    detail::require(j.contains("theta_cut_deg"), "geometry.theta_cut_deg is required (number or \"auto\")");
    const auto& t = j.at("theta_cut_deg");
    if (t.is_string()) {
      detail::require(t.get<std::string>() == "auto", "geometry.theta_cut_deg must be a number or \"auto\"");
      c.theta_auto = true;
      read(j, "delta_deg", c.delta_deg);
    } else if (t.is_number()) {
      detail::require(!j.contains("delta_deg"), "geometry.delta_deg is only allowed with theta_cut_deg = \"auto\"");
      c.theta_auto = false;
      c.theta_cut_deg = t.get<double>();
    } else {
      throw ConfigError("geometry.theta_cut_deg must be a number or \"auto\"");
    }
  }
  if (doc.contains("grid")) {
    const auto& j = doc.at("grid");
    reject_unknown(j, "grid", {"n_omega", "n_k", "omega_halfspan_frac", "k_halfspan_frac"});
    read(j, "n_omega", c.grid.n_omega);
    read(j, "n_k", c.grid.n_k);
    read(j, "omega_halfspan_frac", c.grid.omega_halfspan_frac);
    read(j, "k_halfspan_frac", c.grid.k_halfspan_frac);
  }
  if (doc.contains("mask")) {
    const auto& j = doc.at("mask");
    reject_unknown(j, "mask", {"n", "auto_scales", "omega_scale_rad_s", "k_scale_rad_m"});
    read(j, "n", c.mask_n);
    read(j, "auto_scales", c.auto_scales);
    read(j, "omega_scale_rad_s", c.mask_omega_scale);
    read(j, "k_scale_rad_m", c.mask_k_scale);
  }
  if (doc.contains("detection")) {
    const auto& j = doc.at("detection");
    reject_unknown(j, "detection", {"mode_density", "fwhm_lambda_nm", "fwhm_theta_mrad"});
    read(j, "mode_density", c.mode_density);
    read(j, "fwhm_lambda_nm", c.fwhm_lambda_nm);
    read(j, "fwhm_theta_mrad", c.fwhm_theta_mrad);
  }
  if (doc.contains("map")) {
    const auto& j = doc.at("map");
    reject_unknown(j, "map", {"n_lambda", "n_theta", "theta_max_deg"});
    read(j, "n_lambda", c.map_n_lambda);
    read(j, "n_theta", c.map_n_theta);
    read(j, "theta_max_deg", c.map_theta_max_deg);
  }
  if (doc.contains("dispersion")) {
    const auto& j = doc.at("dispersion");
    reject_unknown(j, "dispersion", {"n_lambda"});
    read(j, "n_lambda", c.dispersion_n_lambda);
  }
  if (doc.contains("tuning")) {
    const auto& j = doc.at("tuning");
    reject_unknown(j, "tuning", {"angles_deg", "lambda_min_nm", "lambda_max_nm", "n_lambda", "n_theta",
                                 "theta_ext_max_deg"});
    read(j, "angles_deg", c.tuning_angles_deg);
    if (j.contains("lambda_min_nm")) {
      double v = 0.0;
      read(j, "lambda_min_nm", v);
      c.tuning_lambda_min_nm = v;
    }
    if (j.contains("lambda_max_nm")) {
      double v = 0.0;
      read(j, "lambda_max_nm", v);
      c.tuning_lambda_max_nm = v;
    }
    read(j, "n_lambda", c.tuning_n_lambda);
    read(j, "n_theta", c.tuning_n_theta);
    read(j, "theta_ext_max_deg", c.tuning_theta_ext_max_deg);
  }
  if (doc.contains("outputs")) {
    const auto& j = doc.at("outputs");
    reject_unknown(j, "outputs", {"directory", "formats"});
    std::string dir;
    read(j, "directory", dir);
    if (!dir.empty()) c.out_dir = dir;
    read(j, "formats", c.formats);
  }
  validate(c);
  return c;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config is not valid JSON: " + std::string(e.what()));
  }
  return parse_run_config(doc, path.parent_path());
}

/// Crystal with the configured length; the cut angle is set by resolve().
inline CrystalSpec load_configured_crystal(const RunConfig& c) {
  CrystalSpec crystal = bbo();
  if (!c.crystal_file.empty()) {
    try {
      crystal = load_crystal(c.crystal_file.string());
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("malformed crystal file: " + std::string(e.what()));
    } catch (const Error& e) {
      throw ConfigError("invalid crystal file: " + std::string(e.what()));
    }
  }
  crystal.length_m = c.length_mm * 1e-3;
  return crystal;
}

struct Setup {
  CrystalSpec crystal;  // oriented
  PumpSpec pump;
  double theta_pm_rad = 0.0;
};

inline Setup resolve(const RunConfig& c) {
  Setup s;
  s.pump = PumpSpec{c.lambda_p_nm * 1e-9, c.gain_GL};
  s.crystal = load_configured_crystal(c);
  s.crystal.cut_angle_rad = deg_to_rad(45.0);
  s.theta_pm_rad = collinear_degenerate_angle(2.0 * s.pump.lambda_m, s.pump, s.crystal);
  const double cut = c.theta_auto ? s.theta_pm_rad + deg_to_rad(c.delta_deg) : deg_to_rad(c.theta_cut_deg);
  if (!(cut > 0.0 && cut < kPi / 2)) throw Error(ErrorCode::InvalidArgument, "resolved cut angle outside (0, 90) deg");
  s.crystal = with_cut_angle(s.crystal, cut);
  return s;
}

// ---------------------------------------------------------------------------

struct DispersionResult {
  CrystalSpec crystal;
  std::vector<double> lambda_um;
  std::vector<double> n_o;
  std::vector<double> n_e;
  std::vector<double> gvd_o;  // s^2/m
  std::vector<double> gvd_e;  // principal extraordinary
  double zdw_um = 0.0;
};

inline DispersionResult compute_dispersion(const RunConfig& c) {
  DispersionResult r;
  r.crystal = load_configured_crystal(c);
  const auto& so = r.crystal.sellmeier_o;
  const auto& se = r.crystal.sellmeier_e;
  const double lo = std::max(so.lambda_min_um, se.lambda_min_um) * (1.0 + 1e-3);
  const double hi = std::min(so.lambda_max_um, se.lambda_max_um) * (1.0 - 1e-3);
  r.lambda_um = linear_axis(lo, hi, c.dispersion_n_lambda);
  const auto ord = Polarization::ordinary();
  const auto ext = Polarization::extraordinary_principal();
  for (double l : r.lambda_um) {
    r.n_o.push_back(refractive_index(l, ord, r.crystal));
    r.n_e.push_back(refractive_index(l, ext, r.crystal));
    r.gvd_o.push_back(gvd(l, ord, r.crystal));
    r.gvd_e.push_back(gvd(l, ext, r.crystal));
  }
  r.zdw_um = zero_dispersion_wavelength(ord, r.crystal);
  return r;
}

struct SpectrumResult {
  Setup setup;
  GridSpec grid;
  Grid2D<double> half_mismatch;
  FieldGrid intensity;
  std::optional<RingScales> scales;
  AngleWavelengthMap map;
  Topology topology = Topology::Other;
};

inline SpectrumResult compute_spectrum(const RunConfig& c) {
  SpectrumResult r;
  r.setup = resolve(c);
  r.grid = default_grid(r.setup.pump, r.setup.crystal, c.grid);
  r.half_mismatch = build_mismatch_grid(r.setup.pump, r.setup.crystal, r.grid);
  r.intensity = intensity_from_mismatch_grid(r.half_mismatch, r.grid, r.setup.pump.gain_GL);
  try {
    r.scales = ring_scales(amplitude_from_mismatch_grid(r.half_mismatch, r.grid));
  } catch (const Error&) {
    r.scales.reset();
  }
  r.topology = classify_topology(real_part(r.intensity), r.half_mismatch);
  r.map = to_angle_wavelength(r.intensity, c.map_n_lambda, c.map_n_theta, deg_to_rad(c.map_theta_max_deg));
  if (c.mode_density) r.map = apply_mode_density(std::move(r.map));
  if (c.fwhm_lambda_nm > 0.0 || c.fwhm_theta_mrad > 0.0) {
    r.map = instrument_convolution(std::move(r.map), c.fwhm_lambda_nm * 1e-9, c.fwhm_theta_mrad * 1e-3);
  }
  return r;
}

struct CorrelationResult {
  Setup setup;
  GridSpec grid;  // ring-matched
  RingScales scales;
  PhaseMask mask;
  FieldGrid masked_amplitude;
  Grid2D<double> mask_phase;
  CorrMap g1;
  CorrMap g2;
  RingFitResult fit;
  std::optional<WidthsReport> widths;
};

inline CorrelationResult compute_correlations(const RunConfig& c) {
  CorrelationResult r;
  r.setup = resolve(c);
  const auto& pump = r.setup.pump;
  const auto& crystal = r.setup.crystal;
  const GridSpec base = default_grid(pump, crystal, c.grid);
  const RingScales base_scales = c.auto_scales ? ring_scales(build_amplitude_grid(pump, crystal, base))
                                               : RingScales{c.mask_omega_scale, c.mask_k_scale};
  r.grid = ring_matched_grid(base, base_scales);
  const Grid2D<double> x = build_mismatch_grid(pump, crystal, r.grid);
  const FieldGrid amplitude = amplitude_from_mismatch_grid(x, r.grid);
  r.scales = c.auto_scales ? ring_scales(amplitude) : base_scales;
  r.mask = make_phase_mask(c.mask_n, r.scales, r.grid);
  r.masked_amplitude = apply_phase_mask(amplitude, r.mask);
  r.mask_phase = mask_phase_map(r.mask, r.grid);
  r.g2 = g2_map(r.masked_amplitude);
  r.fit = ring_fit(r.g2);

  const FieldGrid spectrum = intensity_from_mismatch_grid(x, r.grid, pump.gain_GL);
  r.g1 = g1_map(spectrum);
  try {
    r.widths = widths_and_fedorov(spectrum, r.g1);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::PeakNotResolved) throw;
    r.widths.reset();
  }
  return r;
}

struct TuningPanel {
  double theta_cut_deg = 0.0;
  AngleWavelengthMap map;
  std::vector<TuningPoint> loci;
};

struct TuningResult {
  PumpSpec pump;
  CrystalSpec crystal;  // unoriented
  std::vector<TuningPanel> panels;
};

/// Signal band symmetric in frequency about omega_p / 2 with both photons inside
/// the Sellmeier window.
inline std::pair<double, double> default_tuning_band(const PumpSpec& pump, const CrystalSpec& crystal) {
  const double w0 = 0.5 * pump.omega();
  const double lmax_um = std::min(crystal.sellmeier_o.lambda_max_um, crystal.sellmeier_e.lambda_max_um);
  const double w_low = omega_from_wavelength(lmax_um * 1e-6);
  const double frac = std::min(0.5, (1.0 - w_low / w0) * 0.999);
  if (!(frac > 0.0)) throw Error(ErrorCode::OutOfValidityRange, "degenerate wavelength outside the Sellmeier window");
  return {wavelength_from_omega(w0 * (1.0 + frac)), wavelength_from_omega(w0 * (1.0 - frac))};
}

inline TuningResult compute_tuning(const RunConfig& c, const std::vector<double>& angles_deg) {
  if (angles_deg.empty()) throw ConfigError("tuning needs at least one angle");
  for (double a : angles_deg) {
    if (!(a >= 0.0 && a <= 90.0)) throw ConfigError("tuning angles must lie in [0, 90]");
  }
  TuningResult r;
  r.pump = PumpSpec{c.lambda_p_nm * 1e-9, c.gain_GL};
  r.crystal = load_configured_crystal(c);
  auto [lo, hi] = default_tuning_band(r.pump, r.crystal);
  if (c.tuning_lambda_min_nm) {
    lo = *c.tuning_lambda_min_nm * 1e-9;
    hi = *c.tuning_lambda_max_nm * 1e-9;
  }
  const double theta_max = deg_to_rad(c.tuning_theta_ext_max_deg);
  const auto lambda_axis = linear_axis(lo, hi, c.tuning_n_lambda);
  const auto theta_axis = linear_axis(-theta_max, theta_max, c.tuning_n_theta);
  for (double a : angles_deg) {
    TuningPanel p;
    p.theta_cut_deg = a;
    CrystalSpec oriented = r.crystal;
    oriented.cut_angle_rad = deg_to_rad(a);
    p.map = angle_wavelength_spectrum(r.pump, oriented, lambda_axis, theta_axis);
    if (c.mode_density) p.map = apply_mode_density(std::move(p.map));
    p.loci = tuning_curve(deg_to_rad(a), r.pump, r.crystal,
                          WavelengthRange{lo, hi, static_cast<int>(c.tuning_n_lambda)}, theta_max);
    r.panels.push_back(std::move(p));
  }
  return r;
}

}  // namespace pdc::pipeline
