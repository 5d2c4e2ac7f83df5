#pragma once

#include <algorithm>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pdc/io.hpp"
#include "pdc/pipeline.hpp"

namespace pdc::cli {

enum ExitCode : int {
  kOk = 0,
  kConfigError = 2,
  kPhysicsError = 3,
  kIoError = 4,
  kFitFailed = 5,
};

struct Options {
  std::string command;
  std::filesystem::path config;
  std::optional<std::filesystem::path> out_dir;
  std::optional<std::vector<std::string>> formats;
  std::optional<std::vector<double>> angles_deg;
  bool require_ring = false;
};

namespace detail {

using io::Axis;
using nlohmann::json;

inline bool wants(const pipeline::RunConfig& c, const char* fmt) {
  return std::find(c.formats.begin(), c.formats.end(), fmt) != c.formats.end();
}

inline Grid2D<double> max_normalized(Grid2D<double> g) {
  double peak = 0.0;
  for (double v : g.data()) peak = std::max(peak, std::abs(v));
  if (peak > 0.0) {
    for (double& v : g.data()) v /= peak;
  }
  return g;
}

inline Grid2D<double> abs_values(const Grid2D<std::complex<double>>& g) {
  Grid2D<double> out(g.rows(), g.cols());
  for (std::size_t i = 0; i < g.size(); ++i) out.data()[i] = std::abs(g.data()[i]);
  return out;
}

inline json crystal_json(const CrystalSpec& c) {
  json j = crystal_to_json(c);
  j["length_m"] = c.length_m;
  j["cut_angle_deg"] = rad_to_deg(c.cut_angle_rad);
  return j;
}

inline json pump_json(const PumpSpec& p) {
  return {{"lambda_p_nm", p.lambda_m * 1e9}, {"gain_GL", p.gain_GL}, {"omega_p_rad_s", p.omega()}};
}

inline json scales_json(const std::optional<RingScales>& s) {
  if (!s) return nullptr;
  return {{"omega_ring_rad_s", s->omega_scale}, {"kappa_ring_rad_m", s->k_scale}};
}

inline Axis omega_axis(const GridSpec& g) { return {"omega", "rad_s", g.n_omega, g.omega_at(0), g.d_omega()}; }
inline Axis k_axis(const GridSpec& g) { return {"k_perp", "rad_m", g.n_k, g.k_at(0), g.d_k()}; }
inline Axis tau_axis(const CorrMap& m) { return {"tau", "s", m.n_tau, m.tau_at(0), m.d_tau}; }
inline Axis xi_axis(const CorrMap& m) { return {"xi", "m", m.n_xi, m.xi_at(0), m.d_xi}; }

inline Axis uniform(const std::vector<double>& v, const char* name, const char* unit) {
  return {name, unit, v.size(), v.front(), v.size() > 1 ? (v.back() - v.front()) / (v.size() - 1.0) : 0.0};
}

/// Writes one real grid in every requested format plus its JSON sidecar.
inline void emit_grid(io::OutputStage& stage, const pipeline::RunConfig& cfg, const std::string& stem,
                      const std::string& quantity, const Axis& rows, const Axis& cols, const Grid2D<double>& values,
                      json meta, double pgm_offset = 0.0) {
  meta["quantity"] = quantity;
  meta["rows"] = io::to_json(rows);
  meta["cols"] = io::to_json(cols);
  meta["layout"] = "row-major";
  json files = json::object();
  if (wants(cfg, "csv")) {
    io::write_csv_grid(stage.file(stem + ".csv"), rows, cols, values);
    files["csv"] = stem + ".csv";
  }
  if (wants(cfg, "bin")) {
    io::write_bin_real(stage.file(stem + ".bin"), values);
    files["bin"] = {{"file", stem + ".bin"}, {"encoding", "float64-le"}};
  }
  if (wants(cfg, "pgm")) {
    Grid2D<double> shifted = values;
    for (double& v : shifted.data()) v += pgm_offset;
    io::write_pgm16(stage.file(stem + ".pgm"), shifted);
    files["pgm"] = stem + ".pgm";
  }
  meta["files"] = files;
  io::write_json(stage.file(stem + ".json"), meta);
}

inline int run_dispersion(const pipeline::RunConfig& cfg, io::OutputStage& stage, std::ostream& out) {
  const auto r = pipeline::compute_dispersion(cfg);
  std::string table = "lambda_um,n_o,n_e,gvd_o_s2_per_m,gvd_e_s2_per_m\n";
  for (std::size_t i = 0; i < r.lambda_um.size(); ++i) {
    table += io::format_double(r.lambda_um[i]) + "," + io::format_double(r.n_o[i]) + "," +
             io::format_double(r.n_e[i]) + "," + io::format_double(r.gvd_o[i]) + "," +
             io::format_double(r.gvd_e[i]) + "\n";
  }
  io::write_text(stage.file("dispersion.csv"), table);
  io::write_text(stage.file("zdw.csv"), "quantity,value\nzdw_um," + io::format_double(r.zdw_um) + "\n");
  stage.commit();
  out << "zdw_um " << io::format_double(r.zdw_um) << "\n";
  return kOk;
}

inline int run_spectrum(const pipeline::RunConfig& cfg, io::OutputStage& stage, std::ostream& out) {
  const auto r = pipeline::compute_spectrum(cfg);
  json meta = {{"omega_center_rad_s", r.grid.omega_center},
               {"ring_scales", scales_json(r.scales)},
               {"crystal", crystal_json(r.setup.crystal)},
               {"pump", pump_json(r.setup.pump)},
               {"theta_pm_deg", rad_to_deg(r.setup.theta_pm_rad)},
               {"normalization", "max"}};
  emit_grid(stage, cfg, "spectrum_omega_k", "S(omega,k_perp)", omega_axis(r.grid), k_axis(r.grid),
            max_normalized(real_part(r.intensity)), meta);
  json map_meta = meta;
  map_meta["mode_density_weighted"] = r.map.weighting_applied;
  map_meta["lambda_ref_m"] = r.map.lambda_ref_m;
  map_meta["instrument_fwhm"] = {{"lambda_nm", cfg.fwhm_lambda_nm}, {"theta_mrad", cfg.fwhm_theta_mrad}};
  emit_grid(stage, cfg, "spectrum_lambda_theta", "S(lambda,theta_ext)", uniform(r.map.lambda_m, "lambda", "m"),
            uniform(r.map.theta_rad, "theta_ext", "rad"), max_normalized(r.map.values), map_meta);
  json report = meta;
  report["topology"] = std::string(to_string(r.topology));
  report.erase("normalization");
  io::write_json(stage.file("spectrum_report.json"), report);
  stage.commit();
  out << to_string(r.topology) << "\n";
  return kOk;
}

inline int run_correlations(const pipeline::RunConfig& cfg, io::OutputStage& stage, std::ostream& out,
                            bool require_ring) {
  const auto r = pipeline::compute_correlations(cfg);
  json report = {{"tau_c_fs", r.fit.tau_c * 1e15},
                 {"xi_c_um", r.fit.xi_c * 1e6},
                 {"residual", r.fit.rms_residual},
                 {"valid", r.fit.valid},
                 {"fedorov_omega", r.widths ? json(r.widths->fedorov_omega) : json(nullptr)},
                 {"fedorov_k", r.widths ? json(r.widths->fedorov_k) : json(nullptr)},
                 {"mask_n", r.mask.order_n},
                 {"g2_center", std::abs(r.g2.values(r.g2.tau_center(), r.g2.xi_center()))}};
  out << report.dump() << "\n";
  if (require_ring && !r.fit.valid) return kFitFailed;

  json meta = {{"omega_center_rad_s", r.grid.omega_center},
               {"ring_scales", scales_json(r.scales)},
               {"mask", {{"order_n", r.mask.order_n},
                         {"omega_scale_rad_s", r.mask.omega_scale},
                         {"k_scale_rad_m", r.mask.k_scale}}},
               {"spectral_grid", {{"omega", io::to_json(omega_axis(r.grid))}, {"k_perp", io::to_json(k_axis(r.grid))}}},
               {"crystal", crystal_json(r.setup.crystal)},
               {"pump", pump_json(r.setup.pump)},
               {"theta_pm_deg", rad_to_deg(r.setup.theta_pm_rad)}};
  json m = meta;
  m["normalization"] = "max";
  emit_grid(stage, cfg, "g1_abs", "|G1(tau,xi)|", tau_axis(r.g1), xi_axis(r.g1), max_normalized(abs_values(r.g1.values)), m);
  emit_grid(stage, cfg, "g2_abs", "|G2(tau,xi)|", tau_axis(r.g2), xi_axis(r.g2), abs_values(r.g2.values), m);
  m["normalization"] = "none";
  emit_grid(stage, cfg, "mask_phase", "arg exp(i n phi) [rad]", omega_axis(r.grid), k_axis(r.grid), r.mask_phase, m,
            kPi);
  if (wants(cfg, "bin")) {
    io::write_bin_complex(stage.file("amplitude_masked.bin"), r.masked_amplitude.values);
    json a = meta;
    a["quantity"] = "F(omega,k_perp) exp(i n phi)";
    a["rows"] = io::to_json(omega_axis(r.grid));
    a["cols"] = io::to_json(k_axis(r.grid));
    a["layout"] = "row-major";
    a["files"] = {{"bin", {{"file", "amplitude_masked.bin"}, {"encoding", "complex128-le-interleaved"}}}};
    io::write_json(stage.file("amplitude_masked.json"), a);
  }
  json full = report;
  full.update(meta);
  if (r.widths) {
    full["widths"] = {{"spectrum_fwhm_omega_rad_s", r.widths->spectrum_fwhm_omega},
                      {"spectrum_fwhm_k_rad_m", r.widths->spectrum_fwhm_k},
                      {"corr_fwhm_tau_s", r.widths->corr_fwhm_tau},
                      {"corr_fwhm_xi_m", r.widths->corr_fwhm_xi}};
  }
  io::write_json(stage.file("fit_report.json"), full);
  stage.commit();
  return kOk;
}

inline std::string angle_tag(std::size_t i, double deg) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%02zu_%.3fdeg", i, deg);
  return buf;
}

inline int run_tuning(const pipeline::RunConfig& cfg, const std::vector<double>& angles, io::OutputStage& stage,
                      std::ostream& out) {
  const auto r = pipeline::compute_tuning(cfg, angles);
  for (std::size_t i = 0; i < r.panels.size(); ++i) {
    const auto& p = r.panels[i];
    const std::string tag = angle_tag(i, p.theta_cut_deg);
    CrystalSpec oriented = r.crystal;
    oriented.cut_angle_rad = deg_to_rad(p.theta_cut_deg);
    json meta = {{"omega_center_rad_s", 0.5 * r.pump.omega()},
                 {"ring_scales", nullptr},
                 {"crystal", crystal_json(oriented)},
                 {"pump", pump_json(r.pump)},
                 {"mode_density_weighted", p.map.weighting_applied},
                 {"lambda_ref_m", p.map.lambda_ref_m},
                 {"normalization", "max"}};
    emit_grid(stage, cfg, "tuning_" + tag, "S(lambda,theta_ext)", uniform(p.map.lambda_m, "lambda", "m"),
              uniform(p.map.theta_rad, "theta_ext", "rad"), max_normalized(p.map.values), meta);

    // one polyline per branch: upper (theta >= 0) then lower (theta < 0)
    std::string csv = "branch,lambda_m,theta_ext_rad\n";
    for (int branch = 0; branch < 2; ++branch) {
      for (const auto& pt : p.loci) {
        if ((pt.theta_ext_rad < 0.0) != (branch == 1)) continue;
        csv += (branch == 0 ? "upper," : "lower,") + io::format_double(pt.lambda_m) + "," +
               io::format_double(pt.theta_ext_rad) + "\n";
      }
    }
    io::write_text(stage.file("loci_" + tag + ".csv"), csv);
    out << tag << " loci " << p.loci.size() << "\n";
  }
  stage.commit();
  return kOk;
}

}  // namespace detail

/// Runs one command; all files appear together or not at all.
inline int execute(const Options& opt, std::ostream& out, std::ostream& err) {
  pipeline::RunConfig cfg;
  std::vector<double> angles;
  try {
    cfg = pipeline::load_run_config(opt.config);
    if (opt.out_dir) cfg.out_dir = *opt.out_dir;
    if (opt.formats) cfg.formats = *opt.formats;
    pipeline::validate(cfg);
    angles = opt.angles_deg ? *opt.angles_deg : cfg.tuning_angles_deg;
    if (opt.command == "tuning" && angles.empty()) throw pipeline::ConfigError("tuning needs at least one angle");
  } catch (const pipeline::ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  }

  try {
    io::OutputStage stage(cfg.out_dir);
    if (opt.command == "dispersion") return detail::run_dispersion(cfg, stage, out);
    if (opt.command == "spectrum") return detail::run_spectrum(cfg, stage, out);
    if (opt.command == "correlations") return detail::run_correlations(cfg, stage, out, opt.require_ring);
    if (opt.command == "tuning") return detail::run_tuning(cfg, angles, stage, out);
    err << "unknown command " << opt.command << "\n";
    return kConfigError;
  } catch (const pipeline::ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const Error& e) {
    err << to_string(e.code()) << ": " << e.what() << "\n";
    return kPhysicsError;
  } catch (const io::IoError& e) {
    err << "I/O error: " << e.what() << "\n";
    return kIoError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "I/O error: " << e.what() << "\n";
    return kIoError;
  }
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Two-photon spectra and correlation maps of type-I SPDC"};
  app.require_subcommand(1);
  Options opt;
  std::string out_dir;
  std::vector<std::string> formats;
  std::vector<double> angles;
  for (const char* name : {"dispersion", "spectrum", "correlations", "tuning"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", opt.config, "run configuration (JSON)")->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--format", formats, "comma-separated subset of csv,bin,pgm")->delimiter(',');
    sub->add_flag("--require-ring", opt.require_ring, "exit 5 unless the ring fit is valid");
    if (std::string(name) == "tuning") {
      sub->add_option("--angles", angles, "crystal cut angles in degrees")->delimiter(',');
    }
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kConfigError;
  }
  opt.command = app.get_subcommands().front()->get_name();
  if (!out_dir.empty()) opt.out_dir = out_dir;
  if (!formats.empty()) opt.formats = formats;
  if (opt.command == "tuning" && app.get_subcommands().front()->count("--angles") > 0) opt.angles_deg = angles;
  return execute(opt, out, err);
}

}  // namespace pdc::cli
