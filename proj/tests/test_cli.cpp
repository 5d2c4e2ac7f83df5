#include <gtest/gtest.h>
#include <unistd.h>

#include <algorithm>
#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "pdc/cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "pdc");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = pdc::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("pdc_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()) + "_" +
            std::to_string(::getpid()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    crystal_ = fs::path(PDC_SOURCE_DIR) / "data" / "bbo.json";
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write_config(const json& doc, const std::string& name = "run.json") {
    const fs::path p = dir_ / name;
    std::ofstream(p) << doc.dump();
    return p;
  }

  json base(const json& geometry, std::size_t n = 512) const {
    json doc = {{"pump", {{"lambda_p_nm", 800}}},
                {"geometry", geometry},
                {"grid", {{"n_omega", n}, {"n_k", n}}},
                {"map", {{"n_lambda", 64}, {"n_theta", 32}}},
                {"outputs", {{"formats", {"bin"}}}}};
    doc["crystal"] = {{"file", crystal_.string()}};
    return doc;
  }

  fs::path dir_;
  fs::path crystal_;
};

json auto_delta(double d) { return {{"theta_cut_deg", "auto"}, {"delta_deg", d}}; }

}  // namespace

TEST_F(CliTest, DispersionWritesTableAndZdw) {
  const auto cfg = write_config(base(auto_delta(0.0)));
  const auto out = dir_ / "out";
  const auto r = run({"dispersion", "--config", cfg.string(), "--out", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string zdw = slurp(out / "zdw.csv");
  ASSERT_EQ(zdw.rfind("quantity,value\nzdw_um,", 0), 0u);
  const double value = std::stod(zdw.substr(zdw.find("zdw_um,") + 7));
  EXPECT_NEAR(value, 1.432399539, 2e-6);
  const std::string table = slurp(out / "dispersion.csv");
  EXPECT_EQ(table.rfind("lambda_um,n_o,n_e,gvd_o_s2_per_m,gvd_e_s2_per_m\n", 0), 0u);
  EXPECT_EQ(std::count(table.begin(), table.end(), '\n'), 501);
  EXPECT_EQ(table.find('\r'), std::string::npos);
  EXPECT_FALSE(fs::exists(out / ".pdc.lock"));
}

TEST_F(CliTest, MalformedConfigExitsTwoWithoutOutputs) {
  const auto cfg = dir_ / "bad.json";
  std::ofstream(cfg) << "{\"pump\": {\"lambda_p_nm\": 800,,}";
  const auto out = dir_ / "out";
  EXPECT_EQ(run({"dispersion", "--config", cfg.string(), "--out", out.string()}).code, 2);
  EXPECT_FALSE(fs::exists(out));
}

TEST_F(CliTest, ConfigInvariantsEnforced) {
  const auto out = (dir_ / "out").string();
  auto doc = base({{"theta_cut_deg", 19.9}, {"delta_deg", 0.1}});
  EXPECT_EQ(run({"spectrum", "--config", write_config(doc).string(), "--out", out}).code, 2);
  doc = base(auto_delta(0.0));
  doc["outputs"]["formats"] = json::array();
  EXPECT_EQ(run({"spectrum", "--config", write_config(doc).string(), "--out", out}).code, 2);
  doc["outputs"]["formats"] = {"png"};
  EXPECT_EQ(run({"spectrum", "--config", write_config(doc).string(), "--out", out}).code, 2);
  doc = base(auto_delta(0.0));
  doc["pump"]["wavelength"] = 800;
  EXPECT_EQ(run({"spectrum", "--config", write_config(doc).string(), "--out", out}).code, 2);
  doc = base(auto_delta(0.0));
  doc["grid"]["n_omega"] = 500;
  EXPECT_EQ(run({"spectrum", "--config", write_config(doc).string(), "--out", out}).code, 2);
  EXPECT_EQ(run({"spectrum", "--config", (dir_ / "missing.json").string()}).code, 2);
  EXPECT_EQ(run({"bogus", "--config", write_config(base(auto_delta(0.0))).string()}).code, 2);
  EXPECT_FALSE(fs::exists(out));
}

TEST_F(CliTest, WindowWithoutRootExitsThree) {
  json crystal = pdc::crystal_to_json(pdc::bbo());
  crystal["validity_um"] = {0.22, 1.3};
  std::ofstream(dir_ / "narrow.json") << crystal.dump();
  auto doc = base(auto_delta(0.0));
  doc["crystal"] = {{"file", "narrow.json"}};
  const auto out = dir_ / "out";
  const auto r = run({"dispersion", "--config", write_config(doc).string(), "--out", out.string()});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("NoSignChange"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(out));
}

TEST_F(CliTest, SpectrumClassifiesSpotRingNone) {
  const std::vector<std::pair<double, std::string>> cases{{0.0, "spot\n"}, {0.08, "ring\n"}, {-0.5, "none\n"}};
  for (const auto& [delta, expected] : cases) {
    const auto out = dir_ / ("out" + std::to_string(delta));
    const auto r = run({"spectrum", "--config", write_config(base(auto_delta(delta))).string(), "--out", out.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out, expected) << delta;
  }
}

TEST_F(CliTest, SpectrumFilesAndSidecars) {
  auto doc = base(auto_delta(0.08), 64);
  doc["outputs"]["formats"] = {"csv", "bin", "pgm"};
  const auto out = dir_ / "out";
  ASSERT_EQ(run({"spectrum", "--config", write_config(doc).string(), "--out", out.string()}).code, 0);

  const json side = json::parse(slurp(out / "spectrum_omega_k.json"));
  for (const char* key : {"rows", "cols", "omega_center_rad_s", "ring_scales", "crystal", "pump", "files"}) {
    EXPECT_TRUE(side.contains(key)) << key;
  }
  EXPECT_EQ(side["rows"]["count"], 64);
  EXPECT_EQ(side["rows"]["unit"], "rad_s");
  EXPECT_EQ(side["cols"]["name"], "k_perp");
  EXPECT_TRUE(side["ring_scales"].contains("omega_ring_rad_s"));
  EXPECT_DOUBLE_EQ(side["pump"]["lambda_p_nm"].get<double>(), 800.0);

  // axes re-derivable from the sidecar alone
  const double start = side["rows"]["start"], step = side["rows"]["step"];
  EXPECT_NEAR(start + 32 * step, side["omega_center_rad_s"].get<double>(), 1e-6 * step);

  EXPECT_EQ(fs::file_size(out / "spectrum_omega_k.bin"), 64u * 64u * 8u);
  const std::string pgm = slurp(out / "spectrum_omega_k.pgm");
  ASSERT_EQ(pgm.rfind("P5\n64 64\n65535\n", 0), 0u);
  EXPECT_EQ(pgm.size(), std::string("P5\n64 64\n65535\n").size() + 64u * 64u * 2u);

  const std::string csv = slurp(out / "spectrum_omega_k.csv");
  EXPECT_EQ(csv.rfind("omega_rad_s,k_perp_rad_m,value\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 64 * 64 + 1);

  // binary payload is max-normalized little-endian float64
  const std::string bin = slurp(out / "spectrum_omega_k.bin");
  double peak = 0.0;
  for (std::size_t i = 0; i < 64 * 64; ++i) {
    std::uint64_t bits = 0;
    for (int b = 7; b >= 0; --b) bits = (bits << 8) | static_cast<unsigned char>(bin[8 * i + b]);
    peak = std::max(peak, std::bit_cast<double>(bits));
  }
  EXPECT_DOUBLE_EQ(peak, 1.0);

  const json side2 = json::parse(slurp(out / "spectrum_lambda_theta.json"));
  EXPECT_EQ(side2["rows"]["count"], 64);
  EXPECT_EQ(side2["cols"]["count"], 32);
  EXPECT_TRUE(side2["mode_density_weighted"].get<bool>());
  const json rep = json::parse(slurp(out / "spectrum_report.json"));
  ASSERT_TRUE(rep.contains("topology"));
  EXPECT_NE(std::string("spot ring none other").find(rep["topology"].get<std::string>()), std::string::npos);
}

TEST_F(CliTest, OutputsAreByteIdenticalAcrossRuns) {
  auto doc = base(auto_delta(0.08), 64);
  doc["outputs"]["formats"] = {"csv", "bin", "pgm"};
  doc["mask"] = {{"n", 2}};
  const auto cfg = write_config(doc).string();
  for (const char* cmd : {"spectrum", "correlations"}) {
    const auto a = dir_ / (std::string(cmd) + "_a");
    const auto b = dir_ / (std::string(cmd) + "_b");
    ASSERT_EQ(run({cmd, "--config", cfg, "--out", a.string()}).code, 0);
    ASSERT_EQ(run({cmd, "--config", cfg, "--out", b.string()}).code, 0);
    std::size_t files = 0;
    for (const auto& e : fs::directory_iterator(a)) {
      EXPECT_EQ(slurp(e.path()), slurp(b / e.path().filename())) << e.path();
      ++files;
    }
    EXPECT_GT(files, 5u);
  }
}

TEST_F(CliTest, CorrelationsReportAndMaps) {
  auto doc = base({{"theta_cut_deg", 19.98}});
  doc["mask"] = {{"n", 2}, {"auto_scales", true}};
  const auto out = dir_ / "out";
  const auto r = run({"correlations", "--config", write_config(doc).string(), "--out", out.string(), "--require-ring"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json rep = json::parse(slurp(out / "fit_report.json"));
  for (const char* key : {"tau_c_fs", "xi_c_um", "residual", "valid", "fedorov_omega", "fedorov_k"}) {
    EXPECT_TRUE(rep.contains(key)) << key;
  }
  EXPECT_TRUE(rep["valid"].get<bool>());
  EXPECT_NEAR(rep["tau_c_fs"].get<double>(), 13.0, 0.3 * 13.0);
  EXPECT_NEAR(rep["xi_c_um"].get<double>(), 35.0, 0.3 * 35.0);
  for (const char* f : {"g1_abs.bin", "g2_abs.bin", "mask_phase.bin", "amplitude_masked.bin", "g2_abs.json"}) {
    EXPECT_TRUE(fs::exists(out / f)) << f;
  }
  EXPECT_EQ(fs::file_size(out / "amplitude_masked.bin"), 512u * 512u * 16u);
  const json side = json::parse(slurp(out / "g2_abs.json"));
  EXPECT_EQ(side["rows"]["unit"], "s");
  EXPECT_EQ(side["mask"]["order_n"], 2);
}

TEST_F(CliTest, RequireRingFailsWithoutMask) {
  auto doc = base(auto_delta(0.08), 256);
  doc["mask"] = {{"n", 0}};
  const auto out = dir_ / "out";
  const auto r = run({"correlations", "--config", write_config(doc).string(), "--out", out.string(), "--require-ring"});
  EXPECT_EQ(r.code, 5);
  EXPECT_NE(r.out.find("\"valid\":false"), std::string::npos) << r.out;
  EXPECT_FALSE(fs::exists(out));
}

TEST_F(CliTest, ExplicitMaskScalesRequiredWhenAutoOff) {
  auto doc = base(auto_delta(0.08), 64);
  doc["mask"] = {{"n", 2}, {"auto_scales", false}};
  EXPECT_EQ(run({"correlations", "--config", write_config(doc).string(), "--out", (dir_ / "o").string()}).code, 2);
  doc["mask"]["omega_scale_rad_s"] = 5e13;
  doc["mask"]["k_scale_rad_m"] = 4e4;
  EXPECT_EQ(run({"correlations", "--config", write_config(doc).string(), "--out", (dir_ / "o").string()}).code, 0);
  const json side = json::parse(slurp(dir_ / "o" / "g2_abs.json"));
  EXPECT_DOUBLE_EQ(side["mask"]["omega_scale_rad_s"].get<double>(), 5e13);
}

TEST_F(CliTest, UnwritableOutputExitsFour) {
  std::ofstream(dir_ / "plainfile") << "x";
  const auto r = run({"spectrum", "--config", write_config(base(auto_delta(0.0), 64)).string(), "--out",
                      (dir_ / "plainfile" / "sub").string()});
  EXPECT_EQ(r.code, 4);
}

TEST_F(CliTest, LockedDirectoryExitsFourAndKeepsExistingFiles) {
  const auto out = dir_ / "out";
  fs::create_directories(out);
  std::ofstream(out / ".pdc.lock") << "";
  std::ofstream(out / "keep.txt") << "old";
  const auto r = run({"spectrum", "--config", write_config(base(auto_delta(0.0), 64)).string(), "--out", out.string()});
  EXPECT_EQ(r.code, 4);
  EXPECT_EQ(slurp(out / "keep.txt"), "old");
  std::size_t n = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(out)) ++n;
  EXPECT_EQ(n, 2u);
}

TEST_F(CliTest, PhysicsErrorLeavesExistingDirectoryUntouched) {
  const auto out = dir_ / "out";
  fs::create_directories(out);
  std::ofstream(out / "keep.txt") << "old";
  auto doc = base({{"theta_cut_deg", 19.9}}, 64);
  doc["grid"]["omega_halfspan_frac"] = 0.99;  // reaches down to lambda > window
  const auto r = run({"spectrum", "--config", write_config(doc).string(), "--out", out.string()});
  EXPECT_EQ(r.code, 3) << r.err;
  std::size_t n = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(out)) ++n;
  EXPECT_EQ(n, 1u);
}

TEST_F(CliTest, TuningRequiresAngles) {
  auto doc = base(auto_delta(0.0));
  doc["pump"]["lambda_p_nm"] = 400;
  const auto out = dir_ / "out";
  EXPECT_EQ(run({"tuning", "--config", write_config(doc).string(), "--out", out.string()}).code, 2);
  EXPECT_FALSE(fs::exists(out));
}

TEST_F(CliTest, TuningWritesMapsAndLoci) {
  auto doc = base(auto_delta(0.0));
  doc["pump"]["lambda_p_nm"] = 400;
  doc["tuning"] = {{"n_lambda", 64}, {"n_theta", 32}};
  doc["outputs"]["formats"] = {"csv"};
  const auto out = dir_ / "out";
  const auto r = run({"tuning", "--config", write_config(doc).string(), "--out", out.string(), "--angles", "0,29.5"});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string axis = slurp(out / "loci_00_0.000deg.csv");
  EXPECT_EQ(axis, "branch,lambda_m,theta_ext_rad\n");
  const std::string matched = slurp(out / "loci_01_29.500deg.csv");
  EXPECT_GT(std::count(matched.begin(), matched.end(), '\n'), 10);
  EXPECT_NE(matched.find("upper,"), std::string::npos);
  EXPECT_NE(matched.find("lower,"), std::string::npos);
  EXPECT_TRUE(fs::exists(out / "tuning_01_29.500deg.csv"));
  EXPECT_TRUE(fs::exists(out / "tuning_01_29.500deg.json"));
}

TEST(Io, ShortestRoundTripFormatting) {
  EXPECT_EQ(pdc::io::format_double(0.1), "0.1");
  EXPECT_EQ(pdc::io::format_double(1e-26), "1e-26");
  EXPECT_EQ(pdc::io::format_double(-2.5), "-2.5");
  const double v = 0.1 + 0.2;
  EXPECT_EQ(std::stod(pdc::io::format_double(v)), v);
}
