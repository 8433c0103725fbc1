#include "stratlab/harness/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "stratlab/core/error.hpp"

namespace stratlab::harness {

using nlohmann::json;

namespace {

/// Reads typed members of one JSON object and rejects keys it was not asked about.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + ": expected an object");
  }
  ~ObjectReader() = default;

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  template <class T>
  void get(const std::string& key, T& out) {
    if (!has(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(where_ + "." + key + ": " + e.what());
    }
  }

  const json& child(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  std::string path(const std::string& key) const { return where_ + "." + key; }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(where_ + ": unknown key '" + it.key() + "'");
    }
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

void read_layer(const json& j, const std::string& where, LayerData& d) {
  ObjectReader r(j, where);
  std::string shape = "zero";
  r.get("shape", shape);
  if (shape == "zero") {
    d.shape = Profile::Zero;
  } else if (shape == "sine") {
    d.shape = Profile::Sine;
  } else if (shape == "gaussian") {
    d.shape = Profile::Gaussian;
  } else {
    throw ConfigError(where + ".shape: unknown shape '" + shape + "'");
  }
  r.get("amplitude", d.amplitude);
  r.get("wavenumber", d.wavenumber);
  r.get("phase", d.phase);
  r.finish();
  if (!std::isfinite(d.amplitude) || !std::isfinite(d.wavenumber) || !std::isfinite(d.phase)) {
    throw ConfigError(where + ": values must be finite");
  }
  if (d.shape == Profile::Sine && (d.wavenumber != std::round(d.wavenumber) || d.wavenumber < 0.0)) {
    throw ConfigError(where + ".wavenumber: sine data need a non-negative integer wavenumber");
  }
}

void require_sorted(const std::vector<double>& v, const std::string& where) {
  if (!std::is_sorted(v.begin(), v.end()) || std::adjacent_find(v.begin(), v.end()) != v.end()) {
    throw ConfigError(where + ": values must be strictly increasing");
  }
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
  ExperimentConfig c;
  ObjectReader top(j, "config");
  std::string schema;
  top.get("schema", schema);
  if (schema != kConfigSchema) {
    throw ConfigError("config.schema: expected \"" + std::string(kConfigSchema) + "\", got \"" + schema + "\"");
  }
  top.get("experiment", c.experiment);
  if (!c.experiment.empty() &&
      std::find(experiment_ids().begin(), experiment_ids().end(), c.experiment) == experiment_ids().end()) {
    throw ConfigError("config.experiment: unknown experiment '" + c.experiment + "'");
  }
  top.get("seed", c.seed);
  top.get("output", c.output);
  top.get("threads", c.threads);
  top.get("plots", c.plots);
  if (c.threads == 0) throw ConfigError("config.threads: must be at least 1");

  if (top.has("grid")) {
    ObjectReader r(top.child("grid"), "config.grid");
    r.get("length", c.grid.length);
    r.get("n_x", c.grid.n_x);
    r.finish();
  }
  if (top.has("levels")) {
    ObjectReader r(top.child("levels"), "config.levels");
    r.get("kind", c.levels.kind);
    r.get("n_r", c.levels.n_r);
    r.get("half_width", c.levels.half_width);
    r.get("n_band", c.levels.n_band);
    r.get("zone_half_width", c.levels.zone_half_width);
    r.get("growth", c.levels.growth);
    r.get("n_below", c.levels.n_below);
    r.get("n_above", c.levels.n_above);
    r.get("edges", c.levels.edges);
    r.finish();
    static const std::set<std::string> kinds{"interface", "uniform", "clustered", "graded", "edges"};
    if (!kinds.count(c.levels.kind)) throw ConfigError("config.levels.kind: unknown kind '" + c.levels.kind + "'");
  }
  if (top.has("bilayer")) {
    ObjectReader r(top.child("bilayer"), "config.bilayer");
    r.get("rho_s", c.bilayer.rho_s);
    r.get("rho_b", c.bilayer.rho_b);
    r.get("Hbar_s", c.bilayer.Hbar_s);
    r.get("Hbar_b", c.bilayer.Hbar_b);
    r.get("Ubar_s", c.bilayer.Ubar_s);
    r.get("Ubar_b", c.bilayer.Ubar_b);
    r.get("kappa", c.bilayer.kappa);
    r.finish();
  }
  if (top.has("initial")) {
    ObjectReader r(top.child("initial"), "config.initial");
    r.get("source", c.initial.source);
    r.get("path", c.initial.path);
    const char* names[4] = {"H_s", "H_b", "U_s", "U_b"};
    for (std::size_t f = 0; f < 4; ++f) {
      if (r.has(names[f])) read_layer(r.child(names[f]), r.path(names[f]), c.initial.layers[f]);
    }
    r.finish();
    if (c.initial.source != "closed-form" && c.initial.source != "csv") {
      throw ConfigError("config.initial.source: expected closed-form or csv");
    }
    if (c.initial.source == "csv" && c.initial.path.empty()) throw ConfigError("config.initial.path: required for csv");
  }
  if (top.has("profile")) {
    ObjectReader r(top.child("profile"), "config.profile");
    r.get("source", c.profile.source);
    r.get("epsilon", c.profile.epsilon);
    std::string shape = to_string(c.profile.shape);
    r.get("shape", shape);
    r.get("path", c.profile.path);
    r.get("perturbation", c.profile.perturbation);
    r.finish();
    c.profile.shape = pycnocline_shape_from_string(shape);
    if (c.profile.source != "bilayer-embed" && c.profile.source != "smooth-pycnocline" && c.profile.source != "csv") {
      throw ConfigError("config.profile.source: expected bilayer-embed, smooth-pycnocline or csv");
    }
    if (c.profile.source == "csv" && c.profile.path.empty()) throw ConfigError("config.profile.path: required for csv");
  }
  if (top.has("time")) {
    ObjectReader r(top.child("time"), "config.time");
    auto& o = c.time.options;
    r.get("T", c.time.T);
    r.get("dt", o.dt);
    r.get("cfl", o.cfl);
    r.get("samples", o.samples);
    r.get("sigma", o.sigma);
    r.get("sobolev_s", o.sobolev_s);
    r.get("blowup_factor", o.blowup_factor);
    r.get("depth_floor", o.depth_floor);
    r.get("integrating_factor", o.integrating_factor);
    r.finish();
    if (!(c.time.T >= 0.0) || !(o.dt >= 0.0) || !(o.cfl > 0.0)) {
      throw ConfigError("config.time: T and dt must be non-negative, cfl positive");
    }
  }
  if (top.has("sweep")) {
    ObjectReader r(top.child("sweep"), "config.sweep");
    r.get("values", c.sweep.values);
    r.get("expected_slope", c.sweep.expected_slope);
    r.get("tolerance", c.sweep.tolerance);
    r.get("amplitude_factors", c.sweep.amplitude_factors);
    r.get("band_factor", c.sweep.band_factor);
    r.get("perturbation", c.sweep.perturbation);
    r.get("band_halfwidth_factor", c.sweep.band_halfwidth_factor);
    r.finish();
    require_sorted(c.sweep.values, "config.sweep.values");
    if (!(c.sweep.tolerance > 0.0)) throw ConfigError("config.sweep.tolerance: must be positive");
  }
  if (top.has("atlas")) {
    ObjectReader r(top.child("atlas"), "config.atlas");
    r.get("h_ratio", c.atlas.h_ratio);
    r.get("rho_ratios", c.atlas.rho_ratios);
    r.get("intercepts", c.atlas.intercepts);
    r.get("samples", c.atlas.samples);
    r.get("window", c.atlas.window);
    r.finish();
    if (c.atlas.rho_ratios.empty() || c.atlas.intercepts.empty()) {
      throw ConfigError("config.atlas: rho_ratios and intercepts must be non-empty");
    }
  }
  if (top.has("point")) {
    ObjectReader r(top.child("point"), "config.point");
    r.get("rho_s", c.point.rho_s);
    r.get("rho_b", c.point.rho_b);
    r.get("H_s", c.point.H_s);
    r.get("H_b", c.point.H_b);
    r.get("U_s", c.point.U_s);
    r.get("U_b", c.point.U_b);
    r.finish();
  }
  if (top.has("check")) {
    ObjectReader r(top.child("check"), "config.check");
    r.get("random_points", c.check.random_points);
    r.get("suites", c.check.suites);
    r.get("fault_montgomery_sign", c.check.fault_montgomery_sign);
    r.get("bd_kappa", c.check.bd_kappa);
    r.finish();
  }
  top.finish();

  try {
    c.bilayer.check_physical();
  } catch (const DomainError& e) {
    throw ConfigError(std::string("config.bilayer: ") + e.what());
  }
  if (c.grid.n_x < 8 || c.grid.n_x % 2 != 0 || !(c.grid.length > 0.0)) {
    throw ConfigError("config.grid: n_x must be even and >= 8, length positive");
  }
  if ((c.experiment == "sweep-kappa" || c.experiment == "sweep-epsilon") && c.sweep.values.empty()) {
    throw ConfigError("config.sweep.values: a sweep needs at least one value");
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return parse_config(j);
}

SpatialGrid make_grid(const ExperimentConfig& c) {
  try {
    return SpatialGrid(c.grid.length, c.grid.n_x);
  } catch (const DomainError& e) {
    throw ConfigError(std::string("config.grid: ") + e.what());
  }
}

LevelGrid make_levels(const LevelConfig& c, double interface) {
  try {
    if (c.kind == "uniform") return LevelGrid::uniform(c.n_r);
    if (c.kind == "edges") return LevelGrid(c.edges);
    if (c.kind == "clustered") {
      return LevelGrid::clustered(interface, c.half_width, c.n_band, c.n_r > c.n_band ? c.n_r - c.n_band : 2);
    }
    if (c.kind == "graded") {
      return LevelGrid::graded(interface, c.half_width, c.n_band, c.zone_half_width, c.growth, c.n_below,
                               c.n_above);
    }
    const double frac = interface + 1.0;
    auto n_lower = static_cast<std::size_t>(std::lround(static_cast<double>(c.n_r) * frac));
    n_lower = std::clamp<std::size_t>(n_lower, 1, c.n_r > 1 ? c.n_r - 1 : 1);
    return LevelGrid::with_interface(interface, n_lower, c.n_r - n_lower);
  } catch (const DomainError& e) {
    throw ConfigError(std::string("config.levels: ") + e.what());
  }
}

BilayerState make_initial_bilayer(const ExperimentConfig& c, const SpatialGrid& grid) {
  if (c.initial.source == "csv") return read_bilayer_csv(c.initial.path, grid);
  return make_bilayer_state(grid, c.initial.layers);
}

}  // namespace stratlab::harness
