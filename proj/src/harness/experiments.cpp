#include "stratlab/harness/experiments.hpp"

#include <cmath>
#include <filesystem>
#include <sstream>

#include "stratlab/core/csv.hpp"
#include "stratlab/core/error.hpp"
#include "stratlab/harness/io.hpp"
#include "stratlab/harness/sweeps.hpp"
#include "stratlab/refined.hpp"

namespace stratlab::harness {

using nlohmann::json;

int ExperimentResult::exit_code() const noexcept {
  switch (outcome) {
    case Outcome::Pass:
    case Outcome::Skipped: return 0;
    case Outcome::Fail: return 1;
    case Outcome::Inconclusive: return 3;
  }
  return 1;
}

json ExperimentResult::summary() const {
  json j = {{"id", id},
            {"seed", seed},
            {"pass", outcome == Outcome::Pass || outcome == Outcome::Skipped},
            {"outcome", to_string(outcome)},
            {"slope", nullptr},
            {"interval", nullptr},
            {"files", files},
            {"detail", detail},
            {"details", details}};
  if (fit) {
    j["slope"] = fit->slope;
    j["interval"] = {fit->lo, fit->hi};
  }
  return j;
}

namespace {

class Writer {
 public:
  Writer(const ExperimentConfig& c, ExperimentResult& r) : dir_(c.output), plots_(c.plots), r_(r) {
    ensure_directory(dir_);
  }

  std::string path(const std::string& name) {
    std::string p = (std::filesystem::path(dir_) / name).string();
    r_.files.push_back(p);
    return p;
  }

  void csv(const std::string& name, const std::vector<std::string>& header,
           const std::vector<std::vector<double>>& rows) {
    write_csv(path(name), header, rows);
  }

  void plot(const std::string& name, const std::vector<PlotSeries>& series, const PlotOptions& o) {
    if (plots_) write_svg_plot(path(name), series, o);
  }

  bool plots() const noexcept { return plots_; }

 private:
  std::string dir_;
  bool plots_;
  ExperimentResult& r_;
};

StratifiedProfile make_profile(const ExperimentConfig& c, const LevelGrid& levels, json& details) {
  if (c.profile.source == "csv") return read_profile_csv(c.profile.path, levels);
  if (c.profile.source == "smooth-pycnocline") {
    SmoothedProfile s = smooth_pycnocline(PycnoclineSpec{c.bilayer, c.profile.epsilon, c.profile.shape}, levels);
    details["delta0"] = s.rho_l1;
    details["ubar_l1"] = s.ubar_l1;
    return s.profile;
  }
  return bilayer_profile(c.bilayer, levels);
}

std::string tag(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

void atlas_experiment(const ExperimentConfig& c, ExperimentResult& r, Writer& w) {
  AtlasOptions o;
  o.samples_per_branch = c.atlas.samples;
  o.window = c.atlas.window;
  std::vector<std::vector<double>> counts;
  std::size_t mismatches = 0;
  for (double rho : c.atlas.rho_ratios) {
    const Atlas a = atlas(c.atlas.h_ratio, rho, c.atlas.intercepts, o);
    std::vector<std::vector<double>> rows;
    std::vector<PlotSeries> series;
    for (const auto* group : {&a.curve, &a.lines}) {
      for (const Polyline& p : *group) {
        for (std::size_t k = 0; k < p.p_s.size(); ++k) rows.push_back({static_cast<double>(p.id), p.p_s[k], p.p_b[k]});
        series.push_back({(p.id >= 100 ? "line c=" + tag(a.intercepts[p.id - 100]) : "branch " + std::to_string(p.id)),
                          p.p_s, p.p_b, false});
        if (p.closed && !p.p_s.empty()) {
          series.back().x.push_back(p.p_s.front());
          series.back().y.push_back(p.p_b.front());
        }
      }
    }
    w.csv("atlas_rho" + tag(rho) + ".csv", {"branch_id", "p_s", "p_b"}, rows);
    PlotOptions po;
    po.title = "h = " + tag(c.atlas.h_ratio) + ", rho_s/rho_b = " + tag(rho);
    po.x_label = "p_s";
    po.y_label = "p_b";
    po.equal_axes = true;
    po.x_lo = po.y_lo = -4.0;
    po.x_hi = po.y_hi = 4.0;
    w.plot("atlas_rho" + tag(rho) + ".svg", series, po);
    for (double ic : c.atlas.intercepts) {
      const int n = count_intersections(a, ic);
      const HyperbolicityReport rep = classify(StatePoint{rho, 1.0, c.atlas.h_ratio, 1.0, 0.0, ic});
      if (n != rep.real_roots) ++mismatches;
      counts.push_back({c.atlas.h_ratio, rho, ic, static_cast<double>(n), static_cast<double>(rep.real_roots)});
    }
  }
  w.csv("atlas_counts.csv", {"h_ratio", "rho_ratio", "intercept", "intersections", "real_roots"}, counts);
  r.outcome = mismatches == 0 ? Outcome::Pass : Outcome::Fail;
  r.detail = std::to_string(mismatches) + " intersection/root-count mismatches";
  r.details = {{"mismatches", mismatches}};
}

void classify_experiment(const ExperimentConfig& c, ExperimentResult& r, Writer& w) {
  HyperbolicityReport rep;
  try {
    rep = classify(c.point);
  } catch (const DomainError& e) {
    throw ConfigError(std::string("config.point: ") + e.what());
  }
  json roots = json::array();
  for (const auto& z : rep.roots) roots.push_back({z.real(), z.imag()});
  r.details = {{"roots", roots},
               {"regime", to_string(rep.regime)},
               {"fr_minus", rep.fr_minus},
               {"fr_plus", rep.fr_plus},
               {"margin", rep.margin},
               {"real_roots", rep.real_roots},
               {"near_degenerate", rep.near_degenerate}};
  write_json(w.path("classify.json"), r.details);
  r.detail = to_string(rep.regime);
}

void simulate_bilayer(const ExperimentConfig& c, ExperimentResult& r, Writer& w) {
  const SpatialGrid grid = make_grid(c);
  const BilayerState s0 = make_initial_bilayer(c, grid);
  BilayerRun run;
  try {
    run = integrate(grid, s0, c.bilayer, c.time.T, c.time.options);
  } catch (const DomainError& e) {
    throw ConfigError(std::string("simulate-bilayer: ") + e.what());
  }
  write_bilayer_trajectory_csv(w.path("trajectory.csv"), grid, run.trajectory);
  write_bilayer_diagnostics_csv(w.path("diagnostics.csv"), run.diagnostics);
  if (w.plots()) {
    PlotSeries hs{"H^s norm", {}, {}, false}, margin{"margin", {}, {}, false};
    for (const auto& d : run.diagnostics) {
      hs.x.push_back(d.t);
      hs.y.push_back(d.hs_norm);
      margin.x.push_back(d.t);
      margin.y.push_back(d.margin);
    }
    w.plot("diagnostics.svg", {hs, margin}, {"bilayer diagnostics", "t", "value"});
    const auto xs = grid.points();
    w.plot("final_state.svg",
           {{"H_s", xs, run.final_state.H_s.values(), false},
            {"H_b", xs, run.final_state.H_b.values(), false},
            {"U_s", xs, run.final_state.U_s.values(), false},
            {"U_b", xs, run.final_state.U_b.values(), false}},
           {"t = " + tag(run.final_state.t), "x", "deviation"});
  }
  r.outcome = run.status == RunStatus::Completed ? Outcome::Pass : Outcome::Inconclusive;
  r.detail = to_string(run.status) + " after " + std::to_string(run.steps) + " steps";
  r.details = {{"status", to_string(run.status)}, {"dt", run.dt},        {"steps", run.steps},
               {"halt_time", run.halt_time},      {"warnings", run.warnings}};
}

void simulate_stratified(const ExperimentConfig& c, ExperimentResult& r, Writer& w) {
  const SpatialGrid grid = make_grid(c);
  const LevelGrid levels = make_levels(c.levels, -c.bilayer.Hbar_s);
  const StratifiedProfile profile = make_profile(c, levels, r.details);
  StratifiedState s0;
  if (c.initial.source == "csv") {
    s0 = read_stratified_csv(c.initial.path, grid, levels);
  } else {
    try {
      s0 = embed_bilayer(make_bilayer_state(grid, c.initial.layers), c.bilayer, levels).second;
    } catch (const DomainError& e) {
      throw ConfigError(std::string("config.levels: ") + e.what());
    }
  }
  StratifiedRun run;
  try {
    run = integrate(grid, s0, profile, c.bilayer.kappa, c.time.T, c.time.options);
  } catch (const DomainError& e) {
    throw ConfigError(std::string("simulate-stratified: ") + e.what());
  }
  write_profile_csv(w.path("profile.csv"), profile);
  write_stratified_csv(w.path("initial_state.csv"), grid, levels, s0);
  write_stratified_csv(w.path("final_state.csv"), grid, levels, run.final_state);
  std::vector<std::vector<double>> rows;
  for (const auto& d : run.diagnostics) {
    double mass = 0.0;
    for (std::size_t i = 0; i < d.mass.size(); ++i) mass += levels.weight(i) * d.mass[i];
    rows.push_back({d.t, d.min_depth, d.hs_norm, mass});
  }
  w.csv("diagnostics.csv", {"t", "min_depth", "hs_norm", "mass"}, rows);
  if (w.plots()) {
    PlotSeries hs{"H^s norm", {}, {}, false};
    for (const auto& row : rows) {
      hs.x.push_back(row[0]);
      hs.y.push_back(row[2]);
    }
    w.plot("diagnostics.svg", {hs}, {"stratified diagnostics", "t", "norm"});
  }
  r.outcome = run.status == RunStatus::Completed ? Outcome::Pass : Outcome::Inconclusive;
  r.detail = to_string(run.status) + " after " + std::to_string(run.steps) + " steps";
  r.details["status"] = to_string(run.status);
  r.details["dt"] = run.dt;
  r.details["steps"] = run.steps;
  r.details["levels"] = levels.size();
}

void refine_experiment(const ExperimentConfig& c, ExperimentResult& r, Writer& w) {
  RefinedSetup s;
  s.params = c.bilayer;
  s.layers = c.initial.layers;
  s.length = c.grid.length;
  s.n_x = c.grid.n_x;
  s.levels = make_levels(c.levels, -c.bilayer.Hbar_s);
  s.epsilon = c.profile.epsilon;
  s.shape = c.profile.shape;
  s.perturbation = c.profile.perturbation;
  s.T = c.time.T;
  s.dt = c.time.options.dt;
  s.cfl = c.time.options.cfl;
  s.sobolev_s = c.time.options.sobolev_s;
  RefinedOutcome out = [&] {
    try {
      return run_refined_case(s);
    } catch (const DomainError& e) {
      throw ConfigError(std::string("refine: ") + e.what());
    }
  }();
  write_residual_csv(w.path("residual.csv"), s.levels, out.report);
  write_profile_csv(w.path("target_profile.csv"), out.target);
  write_stratified_csv(w.path("refined_final.csv"), out.grid, s.levels, out.run.trajectory.back());
  write_stratified_csv(w.path("reference_final.csv"), out.grid, s.levels, out.reference.snapshots.back());
  if (w.plots()) {
    PlotSeries ratio{"max ratio", {}, {}, false};
    for (const auto& smp : out.report.samples) {
      ratio.x.push_back(smp.t);
      ratio.y.push_back(smp.max_ratio);
    }
    w.plot("ratio.svg", {ratio}, {"residual / bound", "t", "ratio"});
  }
  const bool ok = out.report.max_ratio <= 1.0 + 1e-9 && out.report.max_relative_gap <= 1e-10;
  r.outcome = ok ? Outcome::Pass : Outcome::Fail;
  std::ostringstream os;
  os << "max ratio " << out.report.max_ratio << ", substitution gap " << out.report.max_relative_gap;
  r.detail = os.str();
  r.details = {{"max_ratio", out.report.max_ratio},
               {"max_relative_gap", out.report.max_relative_gap},
               {"samples", out.report.samples.size()},
               {"levels", s.levels.size()},
               {"dt", out.run.dt}};
}

void sweep_experiment(const ExperimentConfig& c, ExperimentResult& r, Writer& w, bool kappa) {
  const SweepResult s = kappa ? sweep_kappa(c) : sweep_epsilon(c);
  r.outcome = s.outcome;
  r.fit = s.fit;
  r.detail = s.detail;
  r.details = s.data;
  r.details["abscissae"] = s.abscissae;
  r.details["errors"] = s.errors;
  r.details["expected_slope"] = s.expected;
  r.details["tolerance"] = s.tolerance;
  if (!s.points.rows.empty()) w.csv("sweep.csv", s.points.header, s.points.rows);
  if (!s.levels.rows.empty()) w.csv("levels.csv", s.levels.header, s.levels.rows);
  if (w.plots() && !s.errors.empty()) {
    PlotOptions po;
    po.log_x = po.log_y = true;
    po.x_label = kappa ? "kappa" : "delta_0";
    po.y_label = "terminal H^s distance";
    po.title = s.name;
    std::vector<PlotSeries> series;
    if (kappa) {
      series.push_back({"distance", s.abscissae, s.errors, true});
    } else {
      for (const auto& lv : s.data.at("per_level")) {
        series.push_back({"r = " + tag(lv.at("r").get<double>()), s.abscissae,
                          lv.at("distances").get<std::vector<double>>(), false});
      }
      series.push_back({"outside band, L1", s.abscissae, s.errors, true});
    }
    if (s.fit) {
      PlotSeries f{"fit", s.abscissae, {}, false};
      for (double x : s.abscissae) f.y.push_back(std::exp(s.fit->intercept) * std::pow(x, s.fit->slope));
      if (kappa) series.push_back(std::move(f));
    }
    w.plot("sweep.svg", series, po);
  }
}

void check_all(const ExperimentConfig& c, ExperimentResult& r, Writer& w) {
  CheckAllOptions o;
  o.seed = c.seed;
  o.random_points = c.check.random_points;
  o.bd_kappa = c.check.bd_kappa;
  o.fault_montgomery_sign = c.check.fault_montgomery_sign;
  o.only = c.check.suites;
  o.threads = c.threads;
  const std::vector<SuiteResult> results = run_suites(o);
  json suites = json::array();
  bool fail = false, inconclusive = false;
  std::size_t passed = 0;
  for (const auto& s : results) {
    suites.push_back(to_json(s));
    fail = fail || s.outcome == Outcome::Fail;
    inconclusive = inconclusive || s.outcome == Outcome::Inconclusive;
    if (s.passed()) ++passed;
  }
  write_json(w.path("check.json"), {{"seed", c.seed}, {"suites", suites}});
  r.outcome = fail ? Outcome::Fail : inconclusive ? Outcome::Inconclusive : Outcome::Pass;
  r.detail = std::to_string(passed) + "/" + std::to_string(results.size()) + " suites passed";
  r.details = {{"suites", suites}};
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& c) {
  ExperimentResult r;
  r.id = c.experiment;
  r.seed = c.seed;
  Writer w(c, r);
  if (c.experiment == "atlas") {
    atlas_experiment(c, r, w);
  } else if (c.experiment == "classify") {
    classify_experiment(c, r, w);
  } else if (c.experiment == "simulate-bilayer") {
    simulate_bilayer(c, r, w);
  } else if (c.experiment == "simulate-stratified") {
    simulate_stratified(c, r, w);
  } else if (c.experiment == "refine") {
    refine_experiment(c, r, w);
  } else if (c.experiment == "sweep-kappa" || c.experiment == "sweep-epsilon") {
    sweep_experiment(c, r, w, c.experiment == "sweep-kappa");
  } else if (c.experiment == "check-all") {
    check_all(c, r, w);
  } else {
    throw ConfigError("unknown experiment '" + c.experiment + "'");
  }
  const std::string summary = w.path("summary.json");
  write_json(summary, r.summary());
  return r;
}

}  // namespace stratlab::harness
