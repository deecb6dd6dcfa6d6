#pragma once

// Command-line front end: potentials | eigen | propagate | verify.
// Exit status: 0 all checks pass, 1 check or run failure, 2 config or usage error.

#include "gaugelab/config.hpp"
#include "gaugelab/io.hpp"
#include "gaugelab/verify.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

namespace gaugelab {

enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitUsage = 2 };

struct CliOptions {
  std::string config;
  std::string out;
  std::string suite;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

namespace detail {

inline std::string file_label(std::string label) {
  for (char& c : label) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-' && c != '.') c = '_';
  }
  return label;
}

inline void write_checks_csv(const std::filesystem::path& path, const std::vector<Check>& checks) {
  auto f = open_output(path);
  CsvWriter csv(f);
  csv.row({"id", "description", "measured", "relation", "pass"});
  for (const auto& c : checks) {
    csv.row({c.id, c.description, format_double(c.measured), relation_text(c), c.pass ? "true" : "false"});
  }
}

inline int cmd_potentials(const ScenarioConfig& cfg, const std::filesystem::path& out, const CliOptions& opt,
                          std::ostream& log) {
  const PotentialSet multipolar = multipolar_potentials(cfg.fields, cfg.R, cfg.quadrature_order);
  {
    auto f = open_output(out / "potentials_multipolar.csv");
    write_potentials_csv(f, multipolar, cfg.grid, cfg.time);
  }
  for (const auto& chi : cfg.gauges) {
    auto f = open_output(out / ("potentials_" + file_label(chi.label) + ".csv"));
    write_potentials_csv(f, apply_gauge_to_potentials(multipolar, chi), cfg.grid, cfg.time);
  }
  if (!cfg.fields.is_static()) {
    const double step = 0.25 * cfg.grid.h(0);
    const auto exp = make_multipole_expansion(cfg.fields, cfg.R, step, MultipoleOrder::quadrupole);
    auto f = open_output(out / "potentials_expanded.csv");
    write_potentials_csv(f, expanded_potentials(exp), cfg.grid, cfg.time);
    if (cfg.fields.has_dynamic_E()) {
      auto t = open_output(out / "truncation.csv");
      write_truncation_csv(t, truncation_report(cfg.fields, cfg.R, cfg.grid, cfg.time, cfg.quadrature_order));
    }
  }
  std::vector<Check> summary;
  if (!cfg.families.empty()) summary = check_field_reconstruction(cfg);
  write_checks_csv(out / "reconstruction.csv", summary);
  bool ok = true;
  for (const auto& c : summary) {
    ok = ok && c.pass;
    if (!opt.quiet) log << (c.pass ? "PASS  " : "FAIL  ") << c.description << "  " << c.measured << " " << relation_text(c) << "\n";
  }
  if (!opt.quiet) log << "wrote potentials to " << out.string() << "\n";
  return ok ? kExitOk : kExitFailure;
}

inline int cmd_eigen(const ScenarioConfig& cfg, const std::filesystem::path& out, const CliOptions& opt,
                     std::ostream& log) {
  const StationaryBasis basis = config_basis(cfg);
  {
    auto f = open_output(out / "basis.csv");
    write_basis_csv(f, basis);
  }
  for (std::size_t n = 0; n < basis.count(); ++n) {
    save_wavefunction(out / ("state_" + std::to_string(n) + ".bin"), basis.states[n]);
  }
  if (!opt.quiet) {
    for (std::size_t n = 0; n < basis.count(); ++n) {
      log << "E_" << n << " = " << format_double(basis.energies[n]) << "  residual " << basis.residuals[n] << "\n";
    }
  }
  return kExitOk;
}

inline int cmd_propagate(const ScenarioConfig& cfg, const std::filesystem::path& out, const CliOptions& opt,
                         std::ostream& log) {
  require_propagation(cfg);
  const GaugeComparison cmp = compare_gauges(cfg.scenario(), cfg.gauges);
  {
    auto f = open_output(out / "amplitudes.csv");
    write_amplitudes_csv(f, cmp.reference);
    for (const auto& traj : cmp.trajectories) write_amplitudes_csv(f, traj, false);
  }
  {
    auto f = open_output(out / "gauges.csv");
    CsvWriter csv(f);
    csv.row({"gauge_label", "classification", "max_deviation"});
    csv.row({cmp.reference.gauge_label, "ALLOWED", format_double(0.0)});
    for (const auto& row : cmp.rows) {
      csv.row({row.label, verdict(row.classification.allowed), format_double(row.max_deviation)});
    }
  }
  if (cfg.tdpt) {
    const StationaryBasis basis = config_basis(cfg);
    auto f = open_output(out / "amplitudes_tdpt.csv");
    write_amplitudes_csv(f, run_tdpt(cfg, cfg.fields, basis, cfg.tdpt->states));
  }
  if (!opt.quiet) {
    for (const auto& row : cmp.rows) {
      log << row.label << " (" << verdict(row.classification.allowed) << "): max population deviation "
          << row.max_deviation << "\n";
    }
    log << "wrote amplitudes to " << out.string() << "\n";
  }
  return kExitOk;
}

inline int cmd_verify(const ScenarioConfig& cfg, const std::filesystem::path& out, const CliOptions& opt,
                      std::ostream& log) {
  const SuiteResult r = run_suite(opt.suite, cfg);
  auto f = open_output(out / ("suite_" + opt.suite + ".json"));
  f << r.to_json().dump(2) << "\n";
  if (!opt.quiet) log << r.table();
  return r.passed() ? kExitOk : kExitFailure;
}

}  // namespace detail

inline int run_cli(int argc, char** argv, std::ostream& log = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Gauge-explicit wave mechanics on uniform grids"};
  app.require_subcommand(1);
  CliOptions opt;
  std::uint64_t seed = 0;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config, "Scenario config (JSON)")->required();
    sub->add_option("--out", opt.out, "Output directory (overrides the config)");
    sub->add_option("--seed", seed, "Seed for randomized parts (eigensolver start)");
    sub->add_flag("--quiet", opt.quiet, "Print nothing on success");
  };
  CLI::App* potentials = app.add_subcommand("potentials", "Tabulate multipolar, transformed and expanded potentials");
  CLI::App* eigen = app.add_subcommand("eigen", "Export the stationary basis");
  CLI::App* propagate = app.add_subcommand("propagate", "Run the TDSE in each gauge (and TDPT if configured)");
  CLI::App* verify = app.add_subcommand("verify", "Run a verification suite");
  for (CLI::App* sub : {potentials, eigen, propagate, verify}) add_common(sub);
  verify->add_option("--suite", opt.suite, "Suite name")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, log, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, log, err);
    return kExitUsage;
  }

  try {
    if (verify->parsed()) {
      const auto& names = suite_names();
      if (std::find(names.begin(), names.end(), opt.suite) == names.end()) {
        err << "unknown suite '" << opt.suite << "'; expected one of:";
        for (const auto& n : names) err << " " << n;
        err << "\n";
        return kExitUsage;
      }
    }
    ScenarioConfig cfg = load_config(opt.config);
    for (CLI::App* sub : {potentials, eigen, propagate, verify}) {
      if (sub->parsed() && sub->count("--seed") > 0) cfg.eigen.seed = seed;
    }
    const std::filesystem::path out = std::filesystem::path(opt.out.empty() ? cfg.output_directory : opt.out);
    if (potentials->parsed()) return detail::cmd_potentials(cfg, out, opt, log);
    if (eigen->parsed()) return detail::cmd_eigen(cfg, out, opt, log);
    if (propagate->parsed()) return detail::cmd_propagate(cfg, out, opt, log);
    return detail::cmd_verify(cfg, out, opt, log);
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ConvergenceError& e) {
    err << "convergence failure: " << e.what() << "\n";
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "failure: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace gaugelab
