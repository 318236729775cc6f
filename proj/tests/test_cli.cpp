#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#ifndef CQED_CLI_PATH
#error "CQED_CLI_PATH must point at the cqed executable"
#endif

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int status;
  std::string output;
};

class Cli : public ::testing::Test {
protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("cqed_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  Outcome run(const std::string& args) const {
    const fs::path log = dir_ / "log.txt";
    const std::string cmd = std::string(CQED_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
    const int rc = std::system(cmd.c_str());
    return {WIFEXITED(rc) ? WEXITSTATUS(rc) : -1, read(log)};
  }

  static std::string read(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  }

  fs::path write(const std::string& name, const std::string& content) const {
    const fs::path p = dir_ / name;
    std::ofstream(p) << content;
    return p;
  }

  fs::path dir_;
};

/// Numeric rows of a CSV with '#' comments and a header line.
std::vector<std::vector<double>> csv_rows(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::istringstream is(text);
  std::string line;
  bool header_seen = false;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    std::vector<double> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) row.push_back(cell == "ok" ? 0.0 : std::strtod(cell.c_str(), nullptr));
    rows.push_back(row);
  }
  return rows;
}

constexpr const char* kShortTrajectories = R"({"trajectories": {"duration": 3000000.0, "n_traj": 3, "detection_efficiency": 1.0}})";

}  // namespace

TEST_F(Cli, SpectrumFig2StructureAndJobIndependence) {
  const auto d = dir_.string();
  ASSERT_EQ(run("spectrum --preset fig2 --jobs 1 --out " + d + "/j1").status, 0);
  ASSERT_EQ(run("spectrum --preset fig2 --jobs 3 --out " + d + "/j3").status, 0);
  const std::string a = read(dir_ / "j1/fig2_spectrum.csv");
  EXPECT_EQ(a, read(dir_ / "j3/fig2_spectrum.csv"));
  EXPECT_EQ(read(dir_ / "j1/fig2_spectrum.json"), read(dir_ / "j3/fig2_spectrum.json"));

  const auto rows = csv_rows(a);
  ASSERT_EQ(rows.size(), 201u);
  std::size_t best = 0;
  for (std::size_t i = 0; i < 100; ++i)
    if (rows[i][4] > rows[best][4]) best = i;
  // Column 0 is nu in Hz; the maximum sits near the lower two-photon state at -g/sqrt2.
  EXPECT_NEAR(rows[best][0], -10e6 / std::sqrt(2.0), 0.6e6);
  EXPECT_GT(rows[best][4], 0.0);
}

TEST_F(Cli, EmptyCavityPresetIsPoissonian) {
  ASSERT_EQ(run("spectrum --preset empty-cavity --out " + dir_.string()).status, 0);
  for (const auto& row : csv_rows(read(dir_ / "empty-cavity_spectrum.csv"))) EXPECT_NEAR(row[3], 1.0, 1e-9);
}

TEST_F(Cli, CorrelateTraces) {
  ASSERT_EQ(run("correlate --preset fig3c --out " + dir_.string()).status, 0);
  const auto c = csv_rows(read(dir_ / "fig3c_trace_0.csv"));
  EXPECT_GT(c.front()[2], 0.0);  // bunching
  EXPECT_GT(c.front()[1], 10.0);
  EXPECT_LT(std::abs(c.back()[1] - 1.0), 1e-3);

  ASSERT_EQ(run("correlate --preset fig3d --out " + dir_.string()).status, 0);
  const auto d = csv_rows(read(dir_ / "fig3d_trace_0.csv"));
  // Far from the two-photon state the correlation is weak compared with (c).
  EXPECT_LT(std::abs(d.front()[1] - 1.0), 0.1 * (c.front()[1] - 1.0));
  EXPECT_LT(std::abs(d.back()[1] - 1.0), 1e-3);
}

TEST_F(Cli, TrajectoriesAreByteIdentical) {
  const auto cfg = write("short.json", kShortTrajectories).string();
  const auto d = dir_.string();
  ASSERT_EQ(run("trajectories --preset fig3c --config " + cfg + " --seed 5 --jobs 1 --out " + d + "/a").status, 0);
  ASSERT_EQ(run("trajectories --preset fig3c --config " + cfg + " --seed 5 --jobs 2 --out " + d + "/b").status, 0);
  ASSERT_EQ(run("trajectories --preset fig3c --config " + cfg + " --seed 6 --jobs 1 --out " + d + "/c").status, 0);
  const std::string a = read(dir_ / "a/fig3c_clicks.txt");
  EXPECT_EQ(a, read(dir_ / "b/fig3c_clicks.txt"));
  EXPECT_EQ(read(dir_ / "a/fig3c_clicks.bin"), read(dir_ / "b/fig3c_clicks.bin"));
  EXPECT_NE(a, read(dir_ / "c/fig3c_clicks.txt"));
}

TEST_F(Cli, UndrivenRunWritesEmptyStream) {
  const auto cfg = write("dark.json", R"({
    "units": {"frequency": "MHz", "time": "ns"},
    "system": {"g": 11.5, "kappa": 1.3, "gamma": 3.0, "eta": 0.0},
    "trajectories": {"delta_c": 0.0, "duration": 10000.0, "dt": 0.3}
  })");
  ASSERT_EQ(run("trajectories --config " + cfg.string() + " --out " + dir_.string()).status, 0);
  const std::string text = read(dir_ / "run_clicks.txt");
  EXPECT_EQ(text.find("\n1 "), std::string::npos);
  EXPECT_EQ(text.find("\n2 "), std::string::npos);
}

TEST_F(Cli, AnalyzeShowsBunchingOnTwoPhotonResonance) {
  const auto cfg = write("short.json", kShortTrajectories).string();
  ASSERT_EQ(run("trajectories --preset fig3c --config " + cfg + " --out " + dir_.string()).status, 0);
  for (const char* file : {"fig3c_clicks.txt", "fig3c_clicks.bin"}) {
    const Outcome r = run("analyze " + (dir_ / file).string() + " --preset fig3c --out " + dir_.string());
    ASSERT_EQ(r.status, 0) << r.output;
  }
  const auto rows = csv_rows(read(dir_ / "fig3c_clicks_histogram.csv"));
  const std::size_t zero = rows.size() / 2;
  EXPECT_DOUBLE_EQ(rows[zero][0], 0.0);
  EXPECT_GT(rows[zero][3], 3.0);  // g2 in the 170 ns zero bin
  EXPECT_GT(rows[zero][5], 3 * rows[zero][6]);

  // High-resolution window; kappa comes from the stream header.
  const Outcome hr = run("analyze " + (dir_ / "fig3c_clicks.txt").string() + " --window-ns 30 --tau-max-ns 3000 --out " +
                     dir_.string());
  ASSERT_EQ(hr.status, 0) << hr.output;
  EXPECT_EQ(csv_rows(read(dir_ / "fig3c_clicks_histogram.csv")).size(), 201u);
}

TEST_F(Cli, AnalyzeFitsScaleToRegressionTrace) {
  const auto cfg = write("short.json", kShortTrajectories).string();
  const auto d = dir_.string();
  ASSERT_EQ(run("trajectories --preset fig3c --config " + cfg + " --out " + d).status, 0);
  ASSERT_EQ(run("correlate --preset fig3c --out " + d).status, 0);
  const Outcome r = run("analyze " + (dir_ / "fig3c_clicks.txt").string() + " --preset fig3c --theory " +
                        (dir_ / "fig3c_trace_0.csv").string() + " --out " + d);
  ASSERT_EQ(r.status, 0) << r.output;
  const std::string text = read(dir_ / "fig3c_clicks_histogram.csv");
  const auto pos = text.find("# scale_factor = ");
  ASSERT_NE(pos, std::string::npos);
  EXPECT_GT(std::strtod(text.c_str() + pos + 17, nullptr), 0.0);

  const auto junk = write("junk.csv", "not a trace\n");
  EXPECT_NE(run("analyze " + (dir_ / "fig3c_clicks.txt").string() + " --preset fig3c --theory " + junk.string()).status,
            0);
}

TEST_F(Cli, MalformedStreamIsReported) {
  const auto p = write("bad.txt", "# duration_seconds 0.001\n1 0.0001\n2 0.0002x\n");
  const Outcome r = run("analyze " + p.string() + " --preset fig3c");
  EXPECT_NE(r.status, 0);
  EXPECT_NE(r.output.find("line 3"), std::string::npos) << r.output;
  EXPECT_NE(r.output.find("0.0002x"), std::string::npos) << r.output;
}

TEST_F(Cli, ConfigErrorsAreReported) {
  const auto typo = write("typo.json", R"({"units": {"frequency": "MHz", "time": "ns"},
    "system": {"g": 1, "kappa": 1, "gamma": 1, "n_empty": 0.01, "detuning": 2}})");
  const Outcome r = run("spectrum --config " + typo.string());
  EXPECT_NE(r.status, 0);
  EXPECT_NE(r.output.find("detuning"), std::string::npos) << r.output;

  const auto no_units = write("nounits.json", R"({"system": {"g": 1, "kappa": 1, "gamma": 1, "n_empty": 0.01}})");
  EXPECT_NE(run("spectrum --config " + no_units.string()).status, 0);
  EXPECT_NE(run("spectrum --preset nonexistent").status, 0);
  EXPECT_NE(run("spectrum --preset fig3c").status, 0);  // no spectrum section
}
