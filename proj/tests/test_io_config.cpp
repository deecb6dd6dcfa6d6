#include "gaugelab/config.hpp"
#include "gaugelab/io.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

using namespace gaugelab;

namespace {

json minimal() {
  return json::parse(R"({
    "grid": {"dim": 1, "x": [-8.0, 8.0], "points": [128]},
    "fields": [{"family": "linear_static_e", "k": 1.0}]
  })");
}

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("gaugelab_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

}  // namespace

TEST(CsvTest, EscapingRoundTrip) {
  std::ostringstream out;
  CsvWriter csv(out);
  const std::vector<std::vector<std::string>> rows = {
      {"a", "b,c", "say \"hi\""}, {"line\nbreak", "", "x"}, {"1e-17", "-0", " spaced "}};
  for (const auto& r : rows) csv.row(r);
  const std::string text = out.str();
  EXPECT_NE(text.find("\"b,c\""), std::string::npos);
  EXPECT_NE(text.find("\"say \"\"hi\"\"\""), std::string::npos);
  EXPECT_EQ(text.substr(text.size() - 2), "\r\n");
  EXPECT_EQ(parse_csv(text), rows);
  EXPECT_THROW(parse_csv("\"open"), InvalidInput);
}

TEST(CsvTest, DoublesRoundTripExactly) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0}) {
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
}

TEST(WavefunctionFileTest, RoundTrip1DAnd2D) {
  for (const Grid& g : {Grid(Axis{-3.0, 5.0, 17}), Grid(Axis{-1.0, 1.0, 9}, Axis{0.0, 4.0, 12})}) {
    CVector v(static_cast<Eigen::Index>(g.size()));
    for (Eigen::Index k = 0; k < v.size(); ++k) v[k] = complex(std::sin(0.3 * k), std::cos(1.7 * k) / 3.0);
    const Wavefunction psi(g, v, 2.75);
    std::stringstream buf(std::ios::in | std::ios::out | std::ios::binary);
    write_wavefunction(buf, psi);
    const std::string bytes = buf.str();
    EXPECT_EQ(bytes.size(), 8 + 4 + 4 + 16 + 32 + 8 + 16 * g.size());
    EXPECT_EQ(bytes.substr(0, 8), "GLWAVE01");
    const Wavefunction back = read_wavefunction(buf);
    EXPECT_TRUE(back.grid() == g);
    EXPECT_EQ(back.time(), 2.75);
    EXPECT_EQ((back.values() - v).norm(), 0.0);
  }
}

TEST(WavefunctionFileTest, RejectsCorruptFiles) {
  std::stringstream bad("NOTAWAVEFILE");
  EXPECT_THROW(read_wavefunction(bad), InvalidInput);
  std::stringstream full(std::ios::in | std::ios::out | std::ios::binary);
  write_wavefunction(full, Wavefunction(Grid(Axis{0.0, 1.0, 8}), CVector::Ones(8)));
  std::stringstream cut(full.str().substr(0, 70), std::ios::in | std::ios::binary);
  EXPECT_THROW(read_wavefunction(cut), InvalidInput);
  EXPECT_THROW(load_wavefunction(scratch("missing.bin")), InvalidInput);
}

TEST(WavefunctionFileTest, SaveCreatesDirectories) {
  const auto dir = scratch("wave");
  const Wavefunction psi(Grid(Axis{0.0, 1.0, 8}), CVector::Constant(8, complex(0.5, -0.5)));
  save_wavefunction(dir / "nested" / "psi.bin", psi);
  EXPECT_EQ((load_wavefunction(dir / "nested" / "psi.bin").values() - psi.values()).norm(), 0.0);
  std::filesystem::remove_all(dir);
}

TEST(TableTest, AmplitudeColumns) {
  AmplitudeTrajectory traj;
  traj.times = {0.0, 0.5};
  traj.amplitudes = {CVector::Unit(2, 0), CVector::Unit(2, 1) * complex(0.0, 1.0)};
  traj.gauge_label = "x,t";
  std::ostringstream out;
  write_amplitudes_csv(out, traj);
  const auto rows = parse_csv(out.str());
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"time", "n", "re", "im", "abs2", "gauge_label"}));
  EXPECT_EQ(rows[4][3], "1");
  EXPECT_EQ(rows[4][4], "1");
  EXPECT_EQ(rows[4][5], "x,t");
}

TEST(ConfigTest, ShippedScenariosParse) {
  std::size_t count = 0;
  for (const auto& entry : std::filesystem::directory_iterator(GAUGELAB_SCENARIO_DIR)) {
    if (entry.path().extension() != ".json") continue;
    EXPECT_NO_THROW(load_config(entry.path())) << entry.path();
    ++count;
  }
  EXPECT_GE(count, 11u);
}

TEST(ConfigTest, DefaultsAndReferencePoint) {
  const auto cfg = parse_config(minimal());
  EXPECT_EQ(cfg.grid.nx(), 128u);
  EXPECT_EQ(cfg.R, (Vec2{0.0, 0.0}));
  EXPECT_EQ(cfg.basis_states, 6u);
  EXPECT_EQ(cfg.quadrature_order, 16);
  EXPECT_FALSE(cfg.propagation.has_value());
  EXPECT_EQ(cfg.tolerances.gauge_shift, 1e-9);
  EXPECT_EQ(cfg.families.size(), 1u);
}

TEST(ConfigTest, GaugesAndTolerances) {
  auto j = minimal();
  j["gauges"] = json::parse(R"([
    {"type": "polynomial", "terms": [{"px": 2, "c": 1.0}, {"px": 1, "py": 0, "c": -2.0}], "g": 0.7, "label": "p"},
    {"type": "product_xt", "coefficient": 0.5},
    {"type": "temporal", "of": "static", "T": 1.0}
  ])");
  j["tolerances"] = {{"gauge_shift", 1e-7}};
  const auto cfg = parse_config(j);
  ASSERT_EQ(cfg.gauges.size(), 3u);
  EXPECT_EQ(cfg.gauges[0].label, "p");
  EXPECT_DOUBLE_EQ(cfg.gauges[0].chi({3.0, 0.0}, 2.0), 9.0 - 6.0 + 1.4);
  EXPECT_EQ(cfg.gauges[0].declared_form, GaugeForm::restricted);
  EXPECT_DOUBLE_EQ(cfg.gauges[1].chi({2.0, 0.0}, 3.0), 3.0);
  EXPECT_NEAR(cfg.gauges[2].chi({2.0, 0.0}, 3.0), 0.5 * 4.0 * 2.0, 1e-12);
  EXPECT_EQ(cfg.tolerances.gauge_shift, 1e-7);
  EXPECT_EQ(cfg.tolerances.coulomb, 1e-8);
}

TEST(ConfigTest, StrictKeys) {
  auto top = minimal();
  top["bogus"] = 1;
  EXPECT_THROW(parse_config(top), InvalidInput);
  auto nested = minimal();
  nested["grid"]["spacing"] = 0.1;
  EXPECT_THROW(parse_config(nested), InvalidInput);
  auto family = minimal();
  family["fields"][0]["kk"] = 1.0;
  EXPECT_THROW(parse_config(family), InvalidInput);
  auto tol = minimal();
  tol["tolerances"] = {{"gauge_shfit", 1e-3}};
  EXPECT_THROW(parse_config(tol), InvalidInput);
}

TEST(ConfigTest, RejectsInvalidValues) {
  auto missing = minimal();
  missing.erase("fields");
  EXPECT_THROW(parse_config(missing), InvalidInput);
  auto magnetic = minimal();
  magnetic["fields"].push_back({{"family", "uniform_static_b"}, {"b", 0.5}});
  EXPECT_THROW(parse_config(magnetic), InvalidInput);
  auto family = minimal();
  family["fields"][0]["family"] = "plane_wave";
  EXPECT_THROW(parse_config(family), InvalidInput);
  auto dt = minimal();
  dt["propagation"] = {{"t_final", 1.0}, {"dt", -0.01}};
  EXPECT_THROW(parse_config(dt), InvalidInput);
  auto ragged = minimal();
  ragged["propagation"] = {{"t_final", 1.0}, {"dt", 0.3}};
  EXPECT_THROW(parse_config(ragged), InvalidInput);
  auto times = minimal();
  times["sample_times"] = {0.0, 1.0, 0.5};
  EXPECT_THROW(parse_config(times), InvalidInput);
  auto state = minimal();
  state["state"] = 6;
  EXPECT_THROW(parse_config(state), InvalidInput);
  auto type = minimal();
  type["grid"]["points"] = "many";
  EXPECT_THROW(parse_config(type), InvalidInput);
  auto gauge = minimal();
  gauge["gauges"] = json::parse(R"([{"type": "sinusoidal"}])");
  EXPECT_THROW(parse_config(gauge), InvalidInput);
  EXPECT_THROW(load_config(scratch("absent.json")), InvalidInput);
}

TEST(ConfigTest, FaradayViolationNeedsOptIn) {
  json j = json::parse(R"({
    "grid": {"dim": 2, "x": [-2.0, 2.0], "y": [-2.0, 2.0], "points": [33, 33]},
    "fields": [{"family": "affine_field", "ex": 0.0, "ey": 0.0, "jxx": 0.0, "jxy": -0.5, "jyx": 0.5, "jyy": 0.0,
                "b": 1.0, "omega": 1.0}]
  })");
  EXPECT_THROW(parse_config(j), InvalidInput);
  j["allow_inconsistent_fields"] = true;
  EXPECT_NO_THROW(parse_config(j));
}

TEST(ConfigTest, BuildFamilyReproducesFields) {
  json j = json::parse(R"({
    "grid": {"dim": 2, "x": [-2.0, 2.0], "y": [-2.0, 2.0], "points": [17, 17]},
    "reference_point": [0.5, 0.0],
    "fields": [{"family": "linear_static_e", "k": 2.0}, {"family": "uniform_static_b", "b": 0.3}]
  })");
  const auto cfg = parse_config(j);
  // linear_static_e centres on the reference point unless told otherwise.
  const auto f = build_family(cfg.families[0], cfg.R);
  EXPECT_DOUBLE_EQ(f.E0({1.5, 0.0}).x, -2.0);
  EXPECT_DOUBLE_EQ(cfg.fields.B0({0.0, 0.0}), 0.3);
}
