// Acceptance gate: one PASS/FAIL line per criterion. Tolerances are fixed
// here and override whatever the scenario files say.

#include "gaugelab/gaugelab.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

using namespace gaugelab;

namespace {

Tolerances pinned() {
  Tolerances t;
  t.uniform_b_potential = 1e-12;
  t.reconstruction_coefficient = 5.0;
  t.coulomb = 1e-8;
  t.lorenz = 1e-6;
  t.gauge_shift = 1e-9;
  t.gauge_shift_general = 1e-6;
  t.gauge_invariance = 1e-5;
  t.tdpt_ratio_factor = 3.0;
  t.rabi_relative = 0.02;
  t.multipole_exact = 1e-12;
  t.multipole_ratio_min = 3.5;
  t.multipole_ratio_max = 4.5;
  t.v_invariance = 1e-10;
  t.norm_drift = 1e-10;
  t.phase = 1e-6;
  t.temporal_phi = 1e-10;
  return t;
}

struct Criterion {
  const char* id;
  const char* file;
  double seconds;
  const char* statement;
  std::function<std::vector<Check>(const ScenarioConfig&)> run;
};

std::vector<Check> with_basis(const ScenarioConfig& cfg,
                              std::vector<Check> (*f)(const ScenarioConfig&, const StationaryBasis&)) {
  return f(cfg, detail::config_basis(cfg));
}

}  // namespace

int main(int argc, char** argv) {
  const std::string dir = argc > 1 ? argv[1] : GAUGELAB_SCENARIO_DIR;
  const std::vector<Criterion> criteria = {
      {"C1", "c01_uniform_b_potential.json", 1.0, "uniform-B multipolar A equals B x (r-R)/2 to 1e-12",
       check_uniform_b_potential},
      {"C2", "c02_field_reconstruction.json", 10.0, "families (a)-(g) reconstruct E and B to 5 h^2 scale",
       check_field_reconstruction},
      {"C3", "c03_gauge_conditions.json", 5.0, "Coulomb |div A0| <= 1e-8, Lorenz residual <= 1e-6",
       check_gauge_conditions},
      {"C4", "c04_gauge_shift.json", 30.0, "diagonal shift -e g, <0|dH|1> = -e x01, x t flagged",
       [](const ScenarioConfig& c) { return with_basis(c, check_gauge_shift); }},
      {"C5", "c05_gauge_invariance.json", 120.0, "TDSE populations agree across gauges to 1e-5",
       check_gauge_invariance},
      {"C6", "c06_tdpt_consistency.json", 120.0, "TDPT/TDSE gap shrinks 100x (factor 3) for 10x weaker drive",
       [](const ScenarioConfig& c) { return with_basis(c, check_tdpt_consistency); }},
      {"C7", "c07_rabi.json", 120.0, "fitted Rabi frequency within 2% of |e eps x01|/hbar",
       [](const ScenarioConfig& c) { return with_basis(c, check_rabi); }},
      {"C8", "c08_multipole.json", 5.0, "quadrupole phi1 exact to 1e-12, dipole error ratio in [3.5, 4.5]",
       check_multipole},
      {"C9", "c09_v_invariance.json", 120.0, "<m_chi|V_chi|n_chi> = <m_0|V_0|n_0> to 1e-10",
       [](const ScenarioConfig& c) { return with_basis(c, check_v_invariance); }},
      {"C10", "c10_propagator.json", 120.0, "norm drift <= 1e-10 over 1000 steps, phase error <= 1e-6",
       [](const ScenarioConfig& c) { return with_basis(c, check_propagator); }},
      {"C11", "c11_temporal_gauge.json", 120.0, "temporal gauge gives phi_chi = 0 to 1e-10 and is DISALLOWED",
       check_temporal_gauge},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    std::vector<Check> checks;
    std::string error;
    try {
      ScenarioConfig cfg = load_config(dir + "/" + c.file);
      cfg.tolerances = pinned();
      checks = c.run(cfg);
    } catch (const std::exception& e) {
      error = e.what();
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    bool ok = error.empty() && !checks.empty() && seconds < c.seconds;
    for (const auto& k : checks) ok = ok && k.pass;
    std::printf("%s %-4s %s (%.2f s, limit %.0f s)\n", ok ? "PASS" : "FAIL", c.id, c.statement, seconds, c.seconds);
    for (const auto& k : checks) {
      std::printf("       %s  %-70s %.4g %s\n", k.pass ? "ok " : "BAD", k.description.c_str(), k.measured,
                  relation_text(k).c_str());
    }
    if (!error.empty()) std::printf("       error: %s\n", error.c_str());
    if (!ok) ++failed;
  }
  std::printf("%s: %d of %zu criteria failed\n", failed == 0 ? "ACCEPTED" : "REJECTED", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
