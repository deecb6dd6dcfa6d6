#include "gaugelab/cli.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace gaugelab;

namespace {

const char* kSmall = R"({
  "name": "small",
  "grid": {"dim": 1, "x": [-8.0, 8.0], "points": [128]},
  "fields": [{"family": "linear_static_e", "k": 1.0}, {"family": "dipole_drive", "ex": 0.01, "omega": 1.0}],
  "basis": {"states": 4},
  "sample_times": [0.0, 0.5, 1.0],
  "gauges": [
    {"type": "polynomial", "label": "x^2+0.7t", "terms": [{"px": 2, "c": 1.0}], "g": 0.7},
    {"type": "product_xt", "label": "x*t"}
  ],
  "propagation": {"t_final": 1.0, "dt": 0.01, "stride": 50}
})";

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "gaugelab");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out;
  std::ostringstream err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path workdir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("gaugelab_cli_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

std::string write_config(const std::filesystem::path& dir, json j) {
  const auto path = dir / "config.json";
  std::ofstream(path) << j.dump(2);
  return path.string();
}

}  // namespace

TEST(CheckTest, Relations) {
  EXPECT_TRUE(at_most("X", "", 1e-9, 1e-8).pass);
  EXPECT_FALSE(at_most("X", "", 1e-7, 1e-8).pass);
  EXPECT_FALSE(at_most("X", "", std::nan(""), 1e-8).pass);
  EXPECT_TRUE(within("X", "", 4.0, 3.5, 4.5).pass);
  EXPECT_FALSE(within("X", "", 3.4, 3.5, 4.5).pass);
  EXPECT_TRUE(at_least("X", "", 2.0, 1.0).pass);
  EXPECT_FALSE(holds("X", "", false).pass);
  EXPECT_EQ(relation_text(at_most("X", "", 0.0, 1e-8)), "<= 1e-08");
  EXPECT_FALSE(SuiteResult{}.passed());
}

TEST(SuiteTest, UnknownNameAndJsonOrder) {
  const auto cfg = parse_config(json::parse(kSmall));
  EXPECT_THROW(run_suite("everything", cfg), InvalidInput);
  const auto r = run_suite("gauge_laws", cfg);
  EXPECT_TRUE(r.passed()) << r.table();
  const json j = r.to_json();
  std::vector<std::string> keys;
  for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
  EXPECT_EQ(keys, (std::vector<std::string>{"suite", "passed", "wall_seconds", "checks"}));
}

TEST(CliTest, UsageErrors) {
  EXPECT_EQ(cli({}).code, kExitUsage);
  EXPECT_EQ(cli({"verify", "--suite", "gauge_laws"}).code, kExitUsage);
  const auto dir = workdir("usage");
  const auto config = write_config(dir, json::parse(kSmall));
  const auto unknown = cli({"verify", "--config", config, "--suite", "nonsense"});
  EXPECT_EQ(unknown.code, kExitUsage);
  EXPECT_NE(unknown.err.find("gauge_laws"), std::string::npos);
  auto bad = json::parse(kSmall);
  bad["basis"]["size"] = 3;
  EXPECT_EQ(cli({"eigen", "--config", write_config(dir, bad), "--out", dir.string()}).code, kExitUsage);
  EXPECT_EQ(cli({"eigen", "--config", (dir / "absent.json").string()}).code, kExitUsage);
}

TEST(CliTest, VerifyPassesAndBrokenToleranceFails) {
  const auto dir = workdir("verify");
  const auto ok = cli({"verify", "--config", write_config(dir, json::parse(kSmall)), "--suite", "gauge_laws", "--out",
                       dir.string()});
  EXPECT_EQ(ok.code, kExitOk) << ok.out << ok.err;
  EXPECT_NE(ok.out.find("PASS"), std::string::npos);
  const json report = json::parse(read_text(dir / "suite_gauge_laws.json"));
  EXPECT_TRUE(report.at("passed").get<bool>());

  auto broken = json::parse(kSmall);
  broken["tolerances"] = {{"gauge_shift", 1e-30}};
  const auto fail = cli({"verify", "--config", write_config(dir, broken), "--suite", "gauge_laws", "--out",
                         dir.string(), "--quiet"});
  EXPECT_EQ(fail.code, kExitFailure);
  EXPECT_TRUE(fail.out.empty());
}

TEST(CliTest, EigenExportsBasis) {
  const auto dir = workdir("eigen");
  const auto r = cli({"eigen", "--config", write_config(dir, json::parse(kSmall)), "--out", dir.string(), "--seed", "7"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto rows = parse_csv(read_text(dir / "basis.csv"));
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"n", "energy", "residual"}));
  const double e0 = std::stod(rows[1][1]);
  EXPECT_NEAR(e0, 0.5, 2e-3);
  const Wavefunction psi = load_wavefunction(dir / "state_0.bin");
  EXPECT_NEAR(psi.norm_squared(), 1.0, 1e-12);
  const auto cfg = parse_config(json::parse(kSmall));
  const auto H = build_H0(multipolar_potentials(cfg.fields.static_part(), cfg.R), zero_gauge(), cfg.grid, cfg.constants);
  EXPECT_NEAR(inner_product(psi, H.apply(psi)).real(), e0, 1e-10);
  EXPECT_TRUE(std::filesystem::exists(dir / "state_3.bin"));
}

TEST(CliTest, PotentialsAndPropagateWriteTables) {
  const auto dir = workdir("tables");
  const auto config = write_config(dir, json::parse(kSmall));
  ASSERT_EQ(cli({"potentials", "--config", config, "--out", dir.string(), "--quiet"}).code, kExitOk);
  const auto pots = parse_csv(read_text(dir / "potentials_multipolar.csv"));
  ASSERT_EQ(pots.size(), 129u);
  EXPECT_NEAR(std::stod(pots[1][4]), 32.0 + 0.08, 1e-12);
  EXPECT_TRUE(std::filesystem::exists(dir / "potentials_x_t.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "truncation.csv"));

  const auto r = cli({"propagate", "--config", config, "--out", dir.string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto gauges = parse_csv(read_text(dir / "gauges.csv"));
  ASSERT_EQ(gauges.size(), 4u);
  EXPECT_EQ(gauges[2][0], "x^2+0.7t");
  EXPECT_EQ(gauges[2][1], "ALLOWED");
  EXPECT_EQ(gauges[3][1], "DISALLOWED");
  EXPECT_LE(std::stod(gauges[3][2]), 1e-6);
  const auto amps = parse_csv(read_text(dir / "amplitudes.csv"));
  // header + 3 gauges x 3 samples x 4 states
  EXPECT_EQ(amps.size(), 1u + 3 * 3 * 4);
}

TEST(CliTest, PropagateNeedsPropagationBlock) {
  const auto dir = workdir("noprop");
  auto j = json::parse(kSmall);
  j.erase("propagation");
  EXPECT_EQ(cli({"propagate", "--config", write_config(dir, j), "--out", dir.string()}).code, kExitUsage);
}
