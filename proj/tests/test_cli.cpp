#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <mixedness/io.hpp>

namespace fs = std::filesystem;
using mixedness::io::json;

namespace {

const std::string kCli = MIXEDNESS_CLI;
const std::string kConfigs = MIXEDNESS_CONFIGS;
const std::string kData = MIXEDNESS_TEST_DATA;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("mixedness_cli_test_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run(const std::string& args) {
  const int status = std::system((kCli + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path write_config(const std::string& name, const std::string& text) {
  const fs::path p = scratch("configs") .parent_path() / name;
  std::ofstream(p) << text;
  return p;
}

std::string config(const std::string& name) { return kConfigs + "/" + name; }

}  // namespace

TEST(Cli, PurityMapShapeAndManifest) {
  const auto out = scratch("map");
  ASSERT_EQ(run("purity-map --config " + config("purity_map_bspline2_mass.json") + " --out " + out.string()), 0);
  const auto g = mixedness::io::parse_grid_csv(slurp(out / "purity_map.csv"));
  EXPECT_EQ(g.x_axis.size(), 8u);
  EXPECT_EQ(g.y_axis.size(), 8u);
  EXPECT_EQ(g.values.size(), 64u);
  for (double v : g.values) {
    EXPECT_GT(v, 0.0);
    EXPECT_LE(v, 1.0 + 1e-9);
  }
  const auto m = json::parse(slurp(out / "manifest.json"));
  EXPECT_EQ(m["schema"], 1);
  EXPECT_EQ(m["command"], "purity-map");
  EXPECT_EQ(m["config"]["profile"]["family"], "BSpline");
  EXPECT_EQ(m["outputs"].size(), 2u);
  const auto j = json::parse(slurp(out / "purity_map.json"));
  EXPECT_EQ(j["schema"], 1);
  EXPECT_EQ(j["values"].size(), 8u);
}

TEST(Cli, ConfigErrorsExitTwo) {
  const auto out = scratch("bad");
  EXPECT_EQ(run("purity-map --out " + out.string()), 2);
  EXPECT_EQ(run("purity-map --config /nonexistent.json --out " + out.string()), 2);
  EXPECT_EQ(run("frobnicate"), 2);
  EXPECT_EQ(run("purity-map --workers 0 --config " + config("purity_map_bspline2_mass.json")), 2);
  const auto malformed = write_config("malformed.json", "{\n  \"schema\": 1,\n  \"profile\": {\"family\": }\n}\n");
  EXPECT_EQ(run("purity-map --config " + malformed.string() + " --out " + out.string()), 2);
  const auto empty_kappa = write_config("empty_kappa.json", R"({"schema": 1, "m": [5], "kappa_ell_over_pi": []})");
  EXPECT_EQ(run("min-mix --config " + empty_kappa.string() + " --out " + out.string()), 2);
  const auto bad_family = write_config("bad_family.json", R"({"schema": 1, "profile": {"family": "Gauss", "m": 2},
    "field": {"regulator": "Mass"}, "grid": {"x": {"min": 1, "max": 2, "count": 2}, "y": {"min": 1, "max": 2, "count": 2}}})");
  EXPECT_EQ(run("purity-map --config " + bad_family.string() + " --out " + out.string()), 2);
  EXPECT_EQ(run("purity-map --tol 0.5 --config " + config("purity_map_bspline2_mass.json") + " --out " + out.string()), 2);
}

TEST(Cli, NumericalFailuresExitThreeAndFlagCells) {
  const auto out = scratch("ir");
  // Massless, unregulated BSpline(2) in 1D: every cell is IR-divergent.
  const auto ir = write_config("ir.json", R"({"schema": 1, "profile": {"family": "BSpline", "m": 2},
    "field": {"dim": 1, "regulator": "None"},
    "grid": {"x": {"min": 0.1, "max": 1, "count": 2}, "y": {"min": 1, "max": 2, "count": 2}}})");
  EXPECT_EQ(run("purity-map --config " + ir.string() + " --out " + out.string()), 3);
  const auto j = json::parse(slurp(out / "purity_map.json"));
  EXPECT_EQ(j["status"][0][0], "ir_divergence");
  EXPECT_TRUE(j["values"][0][0].is_null());
  EXPECT_TRUE(fs::exists(out / "manifest.json"));
  // m = 3 without a UV cutoff diverges logarithmically.
  const auto uv = write_config("uv.json", R"({"schema": 1, "beta": 100, "m": [3], "kappa_ell_over_pi": [5]})");
  EXPECT_EQ(run("min-mix --config " + uv.string() + " --out " + out.string()), 3);
}

TEST(Cli, DeterministicAcrossRunsAndWorkers) {
  for (const auto& [cmd, cfg, file] : {std::tuple{"purity-map", "purity_map_bspline2_cavity.json", "purity_map.csv"},
                                       std::tuple{"harvest", "harvest_benchmark.json", "harvest.json"}}) {
    std::string reference;
    for (int w : {1, 4, 8, 8}) {
      const auto out = scratch(std::string(cmd) + std::to_string(w));
      ASSERT_EQ(run(std::string(cmd) + " --workers " + std::to_string(w) + " --config " + config(cfg) + " --out " +
                    out.string()),
                0);
      const std::string body = slurp(out / file);
      ASSERT_FALSE(body.empty());
      if (reference.empty()) reference = body;
      EXPECT_EQ(body, reference) << cmd << " workers=" << w;
    }
  }
}

TEST(Cli, Ball3DCurveIsNonIncreasingInTemperature) {
  const auto out = scratch("curve");
  ASSERT_EQ(run("purity-curve --config " + config("purity_curve_ball3d3.json") + " --out " + out.string()), 0);
  const auto g = mixedness::io::parse_grid_csv(slurp(out / "purity_curve.csv"));
  ASSERT_EQ(g.y_axis.size(), 1u);
  for (std::size_t i = 0; i + 1 < g.values.size(); ++i) EXPECT_GE(g.values[i], g.values[i + 1] - 1e-12);
  EXPECT_LT(g.values.back(), 0.5 * g.values.front());
}

TEST(Cli, MinMixLadderDecreases) {
  const auto out = scratch("minmix");
  ASSERT_EQ(run("min-mix --config " + config("min_mix_ladder.json") + " --out " + out.string()), 0);
  const auto j = json::parse(slurp(out / "min_mix.json"));
  EXPECT_TRUE(j["strictly_decreasing"].get<bool>());
  EXPECT_EQ(j["table"].size(), 5u);
  EXPECT_EQ(j["best"]["m"], 7);
  const auto single = write_config("single.json", R"({"schema": 1, "beta": 100, "m": [5], "kappa_ell_over_pi": [25]})");
  ASSERT_EQ(run("min-mix --config " + single.string() + " --out " + out.string()), 0);
  const auto s = json::parse(slurp(out / "min_mix.json"));
  EXPECT_EQ(s["best"]["u"], s["table"][0]["u"]);
}

TEST(Cli, HarvestZSweepAndLadder) {
  const auto out = scratch("harvest");
  ASSERT_EQ(run("harvest --config " + config("harvest_gap2.json") + " --out " + out.string()), 0);
  const auto j = json::parse(slurp(out / "harvest.json"));
  const double n0 = j["threshold"]["z_c"].get<double>();
  ASSERT_GT(n0, 0.0);
  const double want[4] = {n0, 0.5 * n0, 0.0, 0.0};
  ASSERT_EQ(j["z_sweep"].size(), 4u);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(j["z_sweep"][i]["closed_form"].get<double>(), want[i], 1e-15);
  for (const auto& row : j["lambda_ladder"]) {
    const double s = row["scale"].get<double>();
    EXPECT_NEAR(row["z_c"].get<double>() / (s * s * n0), 1.0, 1e-12);
  }
  EXPECT_TRUE(j["negativity"].contains("pt_oracle"));

  const auto th = scratch("threshold");
  ASSERT_EQ(run("threshold --config " + config("threshold_gap2.json") + " --out " + th.string()), 0);
  const auto t = json::parse(slurp(th / "threshold.json"));
  const auto& lc = t["threshold"]["lambda_c"];
  ASSERT_EQ(lc.size(), 4u);
  EXPECT_NEAR(lc[1]["lambda_c"].get<double>() / lc[0]["lambda_c"].get<double>(), 2.0, 1e-12);
}

TEST(Cli, CavityBenchmarkMatchesShippedOracle) {
  const auto golden = json::parse(slurp(fs::path(kData) / "cavity_oracle_golden.json"));
  const auto out = scratch("cavity");
  ASSERT_EQ(run("harvest --config " + config("harvest_cavity_mapped.json") + " --out " + out.string()), 0);
  const auto j = json::parse(slurp(out / "harvest.json"));
  const auto& e = j["elements"];
  const auto& r = golden["results"];
  EXPECT_NEAR(e["L_AA"][0].get<double>() / r["L_AA"].get<double>(), 1.0, 1e-2);
  EXPECT_NEAR(e["L_BB"][0].get<double>() / r["L_BB"].get<double>(), 1.0, 1e-2);
  const double abs_m = std::hypot(e["M"][0].get<double>(), e["M"][1].get<double>());
  EXPECT_NEAR(abs_m / r["abs_M"].get<double>(), 1.0, 1e-2);
}

TEST(Cli, OracleReproducesGoldenFile) {
  const auto out = scratch("oracle");
  ASSERT_EQ(run("oracle --config " + config("oracle_cavity.json") + " --out " + out.string()), 0);
  EXPECT_EQ(json::parse(slurp(out / "cavity_oracle.json")), json::parse(slurp(fs::path(kData) / "cavity_oracle_golden.json")));
}
