#pragma once

// Scenario files: one JSON object per scenario, validated in full before
// anything is computed. Unknown keys are errors.

#include "gaugelab/dynamics.hpp"
#include "gaugelab/fields.hpp"
#include "gaugelab/gauge.hpp"
#include "gaugelab/io.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace gaugelab {

using json = nlohmann::ordered_json;

/// Thresholds used by the verification checks. Defaults are the
/// acceptance bounds.
struct Tolerances {
  double uniform_b_potential = 1e-12;
  double reconstruction_coefficient = 5.0;
  double coulomb = 1e-8;
  double lorenz = 1e-6;
  double two_path = 1e-10;
  double gauge_shift = 1e-9;
  double gauge_shift_general = 1e-6;
  double gauge_invariance = 1e-5;
  double tdpt_ratio_factor = 3.0;
  double rabi_relative = 0.02;
  double multipole_exact = 1e-12;
  double multipole_ratio_min = 3.5;
  double multipole_ratio_max = 4.5;
  double v_invariance = 1e-10;
  double norm_drift = 1e-10;
  double phase = 1e-6;
  double time_reversal = 1e-6;
  double temporal_phi = 1e-10;
  double hermiticity = 1e-10;
  double orthonormality = 1e-8;
  double residual = 1e-8;
  double maxwell_coefficient = 10.0;
};

struct TdptConfig {
  std::size_t states = 6;
  /// Drive amplitude multiplier for the weak-field run.
  double weak_drive_factor = 0.1;
  /// States kept for the Rabi fit.
  std::size_t rabi_states = 2;
  /// Upper end of the Rabi frequency search.
  double omega_max = 0.1;
};

struct NamedFamily {
  std::string family;
  /// The family's config entry, including the "family" key.
  json spec;
};

struct ScenarioConfig {
  std::string name = "scenario";
  PhysicalConstants constants;
  Grid grid = Grid(Axis{});
  std::vector<NamedFamily> families;
  FieldSpec fields;
  bool allow_inconsistent_fields = false;
  Vec2 R;
  int quadrature_order = 16;
  std::vector<GaugeFunction> gauges;
  std::size_t basis_states = 6;
  EigenOptions eigen;
  std::optional<PropagationOptions> propagation;
  std::optional<TdptConfig> tdpt;
  /// Instants used for audits, invariance checks and gauge classification.
  std::vector<double> sample_times{0.0, 0.5, 1.0};
  /// Evaluation instant for potential tables and truncation reports.
  double time = 0.0;
  /// Eigenstate used by the propagator checks.
  std::size_t state = 0;
  Tolerances tolerances;
  std::string output_directory = "out";

  Scenario scenario() const {
    Scenario sc{grid, constants, fields, R, quadrature_order, basis_states, propagation.value_or(PropagationOptions{}),
                eigen};
    return sc;
  }
};

namespace detail {

/// Reads members of one JSON object and remembers which were consumed so
/// that leftovers can be reported.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw InvalidInput(path_ + ": expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  template <class T>
  T get(const std::string& key, T fallback) {
    if (!j_.contains(key)) {
      seen_.insert(key);
      return fallback;
    }
    return require<T>(key);
  }

  template <class T>
  T require(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) throw InvalidInput(path_ + ": missing key '" + key + "'");
    try {
      return j_.at(key).template get<T>();
    } catch (const nlohmann::json::exception&) {
      throw InvalidInput(path_ + "." + key + ": wrong type");
    }
  }

  const json& child(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) throw InvalidInput(path_ + ": missing key '" + key + "'");
    return j_.at(key);
  }

  std::string path(const std::string& key) const { return path_ + "." + key; }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw InvalidInput(path_ + ": unknown key '" + it.key() + "'");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

inline Vec2 read_vec2(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() < 1 || j.size() > 2) throw InvalidInput(path + ": expected [x] or [x, y]");
  try {
    return {j.at(0).get<double>(), j.size() == 2 ? j.at(1).get<double>() : 0.0};
  } catch (const nlohmann::json::exception&) {
    throw InvalidInput(path + ": expected numbers");
  }
}

inline Axis read_axis(const json& extent, std::size_t points, const std::string& path) {
  if (!extent.is_array() || extent.size() != 2) throw InvalidInput(path + ": expected [min, max]");
  try {
    return Axis{extent.at(0).get<double>(), extent.at(1).get<double>(), points};
  } catch (const nlohmann::json::exception&) {
    throw InvalidInput(path + ": expected numbers");
  }
}

inline Grid read_grid(const json& j) {
  ObjectReader r(j, "grid");
  const int dim = r.require<int>("dim");
  const auto points = r.require<std::vector<std::size_t>>("points");
  if (dim != 1 && dim != 2) throw InvalidInput("grid.dim must be 1 or 2");
  if (points.size() != static_cast<std::size_t>(dim)) throw InvalidInput("grid.points needs one entry per dimension");
  const Axis x = read_axis(r.child("x"), points[0], "grid.x");
  std::optional<Grid> g;
  if (dim == 2) {
    g.emplace(x, read_axis(r.child("y"), points[1], "grid.y"));
  } else {
    g.emplace(x);
  }
  r.finish();
  return *g;
}

inline PhysicalConstants read_constants(const json& j) {
  ObjectReader r(j, "constants");
  PhysicalConstants c;
  c.e = r.get("e", c.e);
  c.m = r.get("m", c.m);
  c.hbar = r.get("hbar", c.hbar);
  c.c = r.get("c", c.c);
  r.finish();
  c.validate();
  return c;
}

inline FieldSpec read_family(const json& j, const std::string& path, Vec2 R) {
  ObjectReader r(j, path);
  const auto family = r.require<std::string>("family");
  FieldSpec spec;
  if (family == "uniform_static_e") {
    spec = uniform_static_e({r.get("ex", 0.0), r.get("ey", 0.0)});
  } else if (family == "linear_static_e") {
    spec = linear_static_e(r.require<double>("k"), {r.get("cx", R.x), r.get("cy", R.y)});
  } else if (family == "uniform_static_b") {
    spec = uniform_static_b(r.require<double>("b"));
  } else if (family == "gradient_static_b") {
    spec = gradient_static_b(r.require<double>("beta"));
  } else if (family == "dipole_drive") {
    spec = dipole_drive({r.get("ex", 0.0), r.get("ey", 0.0)}, r.require<double>("omega"));
  } else if (family == "gradient_drive") {
    spec = gradient_drive(r.require<double>("eps"), r.require<double>("alpha"), r.require<double>("omega"));
  } else if (family == "oscillating_uniform_b") {
    spec = oscillating_uniform_b(r.require<double>("b"), r.require<double>("omega"), {r.get("cx", R.x), r.get("cy", R.y)});
  } else if (family == "affine_field") {
    spec = affine_field({r.get("ex", 0.0), r.get("ey", 0.0)},
                        {r.get("jxx", 0.0), r.get("jxy", 0.0), r.get("jyx", 0.0), r.get("jyy", 0.0)}, r.get("b", 0.0),
                        {r.get("bx", 0.0), r.get("by", 0.0)}, r.require<double>("omega"), r.get("phase", 0.0));
  } else {
    throw InvalidInput(path + ": unknown field family '" + family + "'");
  }
  r.finish();
  return spec;
}

inline Polynomial2 read_polynomial(const json& terms, const std::string& path) {
  if (!terms.is_array()) throw InvalidInput(path + ": expected a list of terms");
  Polynomial2 poly;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    ObjectReader t(terms.at(i), path + "[" + std::to_string(i) + "]");
    Polynomial2::Term term{t.get("px", 0), t.get("py", 0), t.require<double>("c")};
    t.finish();
    if (term.px < 0 || term.py < 0) throw InvalidInput(path + ": negative exponent");
    poly.terms.push_back(term);
  }
  if (poly.degree() > 4) throw InvalidInput(path + ": polynomial gauge functions are limited to degree 4");
  return poly;
}

inline GaugeFunction read_gauge(const json& j, std::size_t index, const FieldSpec& fields, Vec2 R, int quad_order) {
  const std::string path = "gauges[" + std::to_string(index) + "]";
  ObjectReader r(j, path);
  const auto type = r.require<std::string>("type");
  GaugeFunction chi;
  if (type == "zero") {
    chi = zero_gauge();
  } else if (type == "constant") {
    chi = constant_gauge(r.require<double>("value"));
  } else if (type == "linear_t") {
    chi = linear_time_gauge(r.require<double>("g"));
  } else if (type == "polynomial") {
    chi = polynomial_gauge(read_polynomial(r.child("terms"), r.path("terms")), r.get("g", 0.0));
  } else if (type == "product_xt") {
    chi = product_xt_gauge(r.get("coefficient", 1.0));
  } else if (type == "t_squared") {
    chi = t_squared_gauge(r.get("coefficient", 1.0));
  } else if (type == "temporal") {
    const auto of = r.get<std::string>("of", "static");
    if (of != "static" && of != "full") throw InvalidInput(path + ".of must be 'static' or 'full'");
    const FieldSpec source = of == "static" ? fields.static_part() : fields;
    const PotentialSet pots = multipolar_potentials(source, R, quad_order);
    chi = temporal_gauge_function(pots.phi, r.get("T", 0.0));
  } else {
    throw InvalidInput(path + ": unknown gauge type '" + type + "'");
  }
  chi.label = r.get("label", chi.label);
  r.finish();
  return chi;
}

inline PropagationOptions read_propagation(const json& j) {
  ObjectReader r(j, "propagation");
  PropagationOptions p;
  p.t_final = r.require<double>("t_final");
  p.dt = r.require<double>("dt");
  p.stride = r.get<std::size_t>("stride", 1);
  const auto method = r.get<std::string>("method", "exponential_midpoint");
  if (method == "exponential_midpoint") {
    p.method = PropagationMethod::exponential_midpoint;
  } else if (method == "crank_nicolson") {
    p.method = PropagationMethod::crank_nicolson;
  } else {
    throw InvalidInput("propagation.method: unknown method '" + method + "'");
  }
  p.krylov_tolerance = r.get("krylov_tolerance", p.krylov_tolerance);
  p.max_krylov = r.get("max_krylov", p.max_krylov);
  r.finish();
  if (!(p.dt > 0.0)) throw InvalidInput("propagation.dt must be positive");
  if (!(p.t_final > 0.0)) throw InvalidInput("propagation.t_final must be positive");
  if (p.stride < 1) throw InvalidInput("propagation.stride must be at least 1");
  detail::step_count(0.0, p);
  return p;
}

inline TdptConfig read_tdpt(const json& j) {
  ObjectReader r(j, "tdpt");
  TdptConfig t;
  t.states = r.get("states", t.states);
  t.weak_drive_factor = r.get("weak_drive_factor", t.weak_drive_factor);
  t.rabi_states = r.get("rabi_states", t.rabi_states);
  t.omega_max = r.get("omega_max", t.omega_max);
  r.finish();
  if (t.states < 2 || t.rabi_states < 2) throw InvalidInput("tdpt needs at least 2 states");
  if (!(t.weak_drive_factor > 0.0)) throw InvalidInput("tdpt.weak_drive_factor must be positive");
  if (!(t.omega_max > 0.0)) throw InvalidInput("tdpt.omega_max must be positive");
  return t;
}

inline Tolerances read_tolerances(const json& j) {
  ObjectReader r(j, "tolerances");
  Tolerances t;
  t.uniform_b_potential = r.get("uniform_b_potential", t.uniform_b_potential);
  t.reconstruction_coefficient = r.get("reconstruction_coefficient", t.reconstruction_coefficient);
  t.coulomb = r.get("coulomb", t.coulomb);
  t.lorenz = r.get("lorenz", t.lorenz);
  t.two_path = r.get("two_path", t.two_path);
  t.gauge_shift = r.get("gauge_shift", t.gauge_shift);
  t.gauge_shift_general = r.get("gauge_shift_general", t.gauge_shift_general);
  t.gauge_invariance = r.get("gauge_invariance", t.gauge_invariance);
  t.tdpt_ratio_factor = r.get("tdpt_ratio_factor", t.tdpt_ratio_factor);
  t.rabi_relative = r.get("rabi_relative", t.rabi_relative);
  t.multipole_exact = r.get("multipole_exact", t.multipole_exact);
  t.multipole_ratio_min = r.get("multipole_ratio_min", t.multipole_ratio_min);
  t.multipole_ratio_max = r.get("multipole_ratio_max", t.multipole_ratio_max);
  t.v_invariance = r.get("v_invariance", t.v_invariance);
  t.norm_drift = r.get("norm_drift", t.norm_drift);
  t.phase = r.get("phase", t.phase);
  t.time_reversal = r.get("time_reversal", t.time_reversal);
  t.temporal_phi = r.get("temporal_phi", t.temporal_phi);
  t.hermiticity = r.get("hermiticity", t.hermiticity);
  t.orthonormality = r.get("orthonormality", t.orthonormality);
  t.residual = r.get("residual", t.residual);
  t.maxwell_coefficient = r.get("maxwell_coefficient", t.maxwell_coefficient);
  r.finish();
  return t;
}

inline std::vector<double> read_times(const json& j, const std::string& path) {
  std::vector<double> times;
  try {
    times = j.get<std::vector<double>>();
  } catch (const nlohmann::json::exception&) {
    throw InvalidInput(path + ": expected a list of numbers");
  }
  if (times.empty()) throw InvalidInput(path + ": needs at least one time");
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) throw InvalidInput(path + ": times must be strictly increasing");
  }
  return times;
}

}  // namespace detail

/// One configured family on its own.
inline FieldSpec build_family(const NamedFamily& family, Vec2 R) {
  return detail::read_family(family.spec, "fields", R);
}

/// Parses and validates a scenario. Any inconsistency raises InvalidInput.
inline ScenarioConfig parse_config(const json& j) {
  detail::ObjectReader r(j, "config");
  ScenarioConfig cfg;
  cfg.name = r.get<std::string>("name", cfg.name);
  if (r.has("constants")) cfg.constants = detail::read_constants(r.child("constants"));
  cfg.grid = detail::read_grid(r.child("grid"));
  cfg.R = r.has("reference_point") ? detail::read_vec2(r.child("reference_point"), "reference_point") : cfg.grid.center();
  cfg.quadrature_order = r.get("quadrature_order", cfg.quadrature_order);
  if (cfg.quadrature_order < 2) throw InvalidInput("quadrature_order must be at least 2");
  cfg.allow_inconsistent_fields = r.get("allow_inconsistent_fields", false);

  if (r.has("fields")) {
    const json& fields = r.child("fields");
    if (!fields.is_array()) throw InvalidInput("fields: expected a list of field families");
    for (std::size_t i = 0; i < fields.size(); ++i) {
      const json& entry = fields.at(i);
      cfg.fields = cfg.fields + detail::read_family(entry, "fields[" + std::to_string(i) + "]", cfg.R);
      cfg.families.push_back({entry.at("family").get<std::string>(), entry});
    }
  } else {
    r.child("fields");
  }
  if (cfg.grid.dim() == 1 && cfg.fields.is_magnetic()) {
    throw InvalidInput("fields: magnetic families need a 2D grid");
  }

  if (r.has("sample_times")) cfg.sample_times = detail::read_times(r.child("sample_times"), "sample_times");
  cfg.time = r.get("time", cfg.time);
  if (r.has("gauges")) {
    const json& gauges = r.child("gauges");
    if (!gauges.is_array()) throw InvalidInput("gauges: expected a list");
    for (std::size_t i = 0; i < gauges.size(); ++i) {
      cfg.gauges.push_back(detail::read_gauge(gauges.at(i), i, cfg.fields, cfg.R, cfg.quadrature_order));
    }
  }
  if (r.has("basis")) {
    detail::ObjectReader b(r.child("basis"), "basis");
    cfg.basis_states = b.get("states", cfg.basis_states);
    cfg.eigen.dense_limit = b.get("dense_limit", cfg.eigen.dense_limit);
    cfg.eigen.tolerance = b.get("tolerance", cfg.eigen.tolerance);
    cfg.eigen.max_iterations = b.get("max_iterations", cfg.eigen.max_iterations);
    cfg.eigen.seed = b.get("seed", cfg.eigen.seed);
    b.finish();
    if (cfg.basis_states < 1) throw InvalidInput("basis.states must be at least 1");
  }
  cfg.state = r.get("state", cfg.state);
  if (cfg.state >= cfg.basis_states) throw InvalidInput("state must index into the basis");
  if (r.has("propagation")) cfg.propagation = detail::read_propagation(r.child("propagation"));
  if (r.has("tdpt")) {
    cfg.tdpt = detail::read_tdpt(r.child("tdpt"));
    if (cfg.tdpt->states > cfg.basis_states || cfg.tdpt->rabi_states > cfg.basis_states) {
      throw InvalidInput("tdpt uses more states than basis.states");
    }
  }
  if (r.has("tolerances")) cfg.tolerances = detail::read_tolerances(r.child("tolerances"));
  if (r.has("output")) {
    detail::ObjectReader o(r.child("output"), "output");
    cfg.output_directory = o.get<std::string>("directory", cfg.output_directory);
    o.finish();
  }
  r.finish();

  // Fields must be genuine before any potential is built from them.
  if (!cfg.fields.is_static()) {
    const MaxwellReport m = check_maxwell_consistency(cfg.fields, cfg.grid, cfg.sample_times,
                                                      cfg.tolerances.maxwell_coefficient);
    if (!m.pass && !cfg.allow_inconsistent_fields) {
      throw InvalidInput("fields violate Faraday's law (residual " + format_double(m.faraday_residual) +
                         "); set allow_inconsistent_fields to use them anyway");
    }
  }
  return cfg;
}

inline ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot read config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidInput(path.string() + ": " + e.what());
  }
  return parse_config(j);
}

}  // namespace gaugelab
