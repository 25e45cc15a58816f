#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "cli.hpp"
#include "finsler/errors.hpp"

using namespace finsler;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "finsler_cli");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// data rows of a csv (comment and header lines dropped)
std::vector<std::vector<std::string>> rows(const std::string& text) {
  std::vector<std::vector<std::string>> out;
  std::istringstream is(text);
  std::string line;
  bool header = true;
  while (std::getline(is, line)) {
    if (line.starts_with("#")) continue;
    if (header) {
      header = false;
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string c;
    while (std::getline(ls, c, ',')) cells.push_back(c);
    out.push_back(cells);
  }
  return out;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() /
          ("finsler_cli_" + std::to_string(::getpid()) + "_" +
           ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir);
  }
  void TearDown() override { fs::remove_all(dir); }
  fs::path dir;
};

}  // namespace

TEST_F(Cli, VerifyFunk) {
  auto r = invoke({"verify", "--metric", "funk", "--dim", "2", "--mc-samples", "200000", "--out",
                dir.string()});
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  const auto j = nlohmann::json::parse(slurp(dir / "verify_funk.json"));
  bool saw_kappa = false;
  for (const auto& c : j["checks"]) {
    EXPECT_EQ(c["status"], "pass") << c["id"];
    EXPECT_FALSE(c["anchor"].get<std::string>().empty());
    EXPECT_FALSE(c.contains("runtime_s"));
    if (c["id"] == "curvature.constant") {
      saw_kappa = true;
      EXPECT_NE(c["note"].get<std::string>().find("-0.25"), std::string::npos);
    }
  }
  EXPECT_TRUE(saw_kappa);
  EXPECT_EQ(j["config"]["metric"], "funk");
  EXPECT_TRUE(fs::exists(dir / "verify_funk.csv"));
}

TEST_F(Cli, VerifyEuclidean3) {
  auto r = invoke({"verify", "--metric", "euclidean", "--dim", "3", "--out", dir.string()});
  EXPECT_EQ(r.code, 0) << r.out;
}

TEST_F(Cli, VerifyHilbertQuartic) {
  auto r = invoke({"verify", "--metric", "hilbert", "--domain", "quartic:0.1", "--out", dir.string()});
  EXPECT_EQ(r.code, 0) << r.out;
  const auto j = nlohmann::json::parse(slurp(dir / "verify_hilbert.json"));
  int seen = 0;
  for (const auto& c : j["checks"])
    if (c["id"] == "curvature.constant" || c["id"] == "hilbert.landsberg_dot") {
      ++seen;
      EXPECT_EQ(c["status"], "pass");
    }
  EXPECT_EQ(seen, 2);
}

TEST_F(Cli, AnchorPerCheckIdIsUnique) {
  invoke({"verify", "--metric", "sphere", "--out", dir.string()});
  const auto j = nlohmann::json::parse(slurp(dir / "verify_sphere.json"));
  std::map<std::string, std::string> anchors;
  for (const auto& c : j["checks"]) {
    const auto [it, fresh] = anchors.emplace(c["id"], c["anchor"]);
    EXPECT_TRUE(fresh) << c["id"];
  }
}

TEST_F(Cli, ToleranceOverrideFails) {
  auto r = invoke({"verify", "--metric", "funk", "--mc-samples", "10000", "--tol",
                "funk.okada=1e-30", "--out", dir.string()});
  EXPECT_EQ(r.code, 1);
  const auto j = nlohmann::json::parse(slurp(dir / "verify_funk.json"));
  EXPECT_EQ(j["config"]["tolerances"]["funk.okada"], 1e-30);
}

TEST_F(Cli, VolumeFunkTable) {
  auto r = invoke({"volume", "--metric", "funk", "--radii", "0.5,1,2", "--out", dir.string()});
  EXPECT_EQ(r.code, 0) << r.err;
  const std::string text = slurp(dir / "volume_funk.csv");
  EXPECT_TRUE(text.starts_with("# finsler-volume v1\n# config: "));
  const auto t = rows(text);
  ASSERT_EQ(t.size(), 3u);
  EXPECT_EQ(t[1][0], "1");
  EXPECT_NEAR(std::stod(t[1][1]), 1.2554, 0.01 * 1.2554);
  for (const auto& row : t) EXPECT_NEAR(std::stod(row[5]), 1.0, 1e-3);
}

TEST_F(Cli, GeodesicHilbertConservesF) {
  auto r = invoke({"geodesic", "--metric", "hilbert", "--from", "0,0", "--dir", "1,0", "--t", "3",
                "--out", dir.string()});
  EXPECT_EQ(r.code, 0) << r.err;
  const auto t = rows(slurp(dir / "geodesic_hilbert.csv"));
  ASSERT_GT(t.size(), 50u);
  EXPECT_EQ(std::stod(t.back()[0]), 3.0);
  for (const auto& row : t) EXPECT_NEAR(std::stod(row.back()), 1.0, 1e-6);
}

TEST_F(Cli, GeodesicChartExitIsAFlagNotACrash) {
  // Funk is only forward complete: backwards from (0.5, 0) it reaches the boundary at -ln 2
  auto r = invoke({"geodesic", "--metric", "funk", "--from", "0.5,0", "--dir", "1,0", "--t", "-5",
                "--out", dir.string()});
  EXPECT_EQ(r.code, 0) << r.err;
  const std::string text = slurp(dir / "geodesic_funk.csv");
  EXPECT_NE(text.find("exited=1"), std::string::npos);
  EXPECT_NEAR(std::stod(rows(text).back()[0]), -std::log(2.0), 1e-6);
}

TEST_F(Cli, CompareFunkRatioIsOne) {
  auto r = invoke({"compare", "--metric", "funk", "--lambda", "-0.25", "--delta", "1.5", "--out",
                dir.string()});
  EXPECT_EQ(r.code, 0) << r.err;
  for (const auto& row : rows(slurp(dir / "compare_funk.csv")))
    EXPECT_NEAR(std::stod(row[4]), 1.0, 1e-3);
  const auto j = nlohmann::json::parse(slurp(dir / "compare_funk.json"));
  EXPECT_TRUE(j["ratio"]["non_increasing"].get<bool>());
  EXPECT_FALSE(j["conjugate_point"]["applicable"].get<bool>());
}

TEST_F(Cli, CompareSphereConjugatePoint) {
  auto r = invoke({"compare", "--metric", "sphere", "--radii", "0.5,1", "--angles", "60",
                "--center", "0.5,0", "--samples", "5", "--out", dir.string()});
  EXPECT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(slurp(dir / "compare_sphere.json"));
  EXPECT_TRUE(j["conjugate_point"]["found"].get<bool>());
  EXPECT_NEAR(j["conjugate_point"]["t"].get<double>(), 3.14159265358979, 1e-3);
}

TEST_F(Cli, CompareSkipsWhenBoundsFail) {
  auto r = invoke({"compare", "--metric", "hyperbolic", "--lambda", "0", "--radii", "0.5",
                "--angles", "30", "--out", dir.string()});
  EXPECT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(slurp(dir / "compare_hyperbolic.json"));
  EXPECT_TRUE(j["ratio"]["skipped"].get<bool>());
}

TEST_F(Cli, CurvatureTable) {
  auto r = invoke({"curvature", "--metric", "sphere", "--samples", "6", "--out", dir.string()});
  EXPECT_EQ(r.code, 0);
  const auto t = rows(slurp(dir / "curvature_sphere.csv"));
  ASSERT_EQ(t.size(), 6u);
  for (const auto& row : t) EXPECT_NEAR(std::stod(row[9]), 1.0, 1e-8);  // kappa_constant
}

TEST_F(Cli, Deterministic) {
  const std::vector<std::string> a{"volume", "--metric", "funk", "--radii", "0.5,1",
                                   "--mc-samples", "50000", "--seed", "7"};
  auto args = a;
  args.insert(args.end(), {"--out", (dir / "a").string()});
  invoke(args);
  args = a;
  args.insert(args.end(), {"--out", (dir / "b").string(), "--jobs", "2"});
  invoke(args);
  EXPECT_EQ(slurp(dir / "a" / "volume_funk.csv"), slurp(dir / "b" / "volume_funk.csv"));

  invoke({"curvature", "--metric", "randers", "--samples", "8", "--out", (dir / "c").string()});
  invoke({"curvature", "--metric", "randers", "--samples", "8", "--jobs", "3", "--out",
       (dir / "d").string()});
  EXPECT_EQ(slurp(dir / "c" / "curvature_randers.csv"), slurp(dir / "d" / "curvature_randers.csv"));

  invoke({"verify", "--metric", "funk", "--mc-samples", "20000", "--out", (dir / "e").string()});
  invoke({"verify", "--metric", "funk", "--mc-samples", "20000", "--out", (dir / "f").string()});
  EXPECT_EQ(slurp(dir / "e" / "verify_funk.json"), slurp(dir / "f" / "verify_funk.json"));
  EXPECT_EQ(slurp(dir / "e" / "verify_funk.csv"), slurp(dir / "f" / "verify_funk.csv"));
}

TEST_F(Cli, ConfigFileAndOverrides) {
  fs::create_directories(dir);
  const auto cfg = dir / "run.json";
  std::ofstream(cfg) << R"({"metric": "funk", "seed": 3, "mc_samples": 20000,
                            "volume": {"radii": [0.5, 1.0]}, "output_dir": ")"
                     << (dir / "cfg").string() << "\"}";
  auto r = invoke({"volume", "--config", cfg.string(), "--seed", "4"});
  EXPECT_EQ(r.code, 0) << r.err;
  const std::string text = slurp(dir / "cfg" / "volume_funk.csv");
  EXPECT_NE(text.find("\"seed\":4"), std::string::npos);
  EXPECT_NE(text.find("\"radii\":[0.5,1.0]"), std::string::npos);
  EXPECT_EQ(rows(text).size(), 2u);
}

TEST_F(Cli, UnknownConfigKeyRejected) {
  fs::create_directories(dir);
  const auto cfg = dir / "bad.json";
  std::ofstream(cfg) << R"({"metric": "funk", "volume": {"radius": 1}})";
  auto r = invoke({"volume", "--config", cfg.string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("volume.radius"), std::string::npos);
}

TEST_F(Cli, InvalidMetricListsCatalog) {
  auto r = invoke({"verify", "--metric", "nope"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("hilbert"), std::string::npos);
  EXPECT_NE(r.err.find("berwald_product"), std::string::npos);
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(invoke({}).code, 2);
  EXPECT_EQ(invoke({"frobnicate"}).code, 2);
  EXPECT_EQ(invoke({"verify", "--metric", "funk", "--param", "strength"}).code, 2);
  EXPECT_EQ(invoke({"verify", "--metric", "funk", "--param", "wat=1"}).code, 2);
  EXPECT_EQ(invoke({"geodesic", "--metric", "funk", "--from", "2,0", "--out", dir.string()}).code, 2);
  EXPECT_EQ(invoke({"geodesic", "--metric", "funk", "--from", "0,0,0", "--out", dir.string()}).code,
            2);
  EXPECT_EQ(invoke({"volume", "--metric", "funk", "--source", "psychic", "--out", dir.string()}).code,
            2);
  EXPECT_EQ(invoke({"verify", "--help"}).code, 0);
}

TEST_F(Cli, EnvironmentOutputDirectory) {
  ::setenv("FINSLER_OUTPUT_DIR", dir.c_str(), 1);
  auto r = invoke({"curvature", "--metric", "euclidean", "--samples", "2"});
  ::unsetenv("FINSLER_OUTPUT_DIR");
  EXPECT_EQ(r.code, 0);
  EXPECT_TRUE(fs::exists(dir / "curvature_euclidean.csv"));
}
