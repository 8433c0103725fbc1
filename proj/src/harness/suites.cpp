#include "stratlab/harness/suites.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <sstream>

#include "stratlab/core/error.hpp"
#include "stratlab/core/rk4.hpp"
#include "stratlab/harness/fit.hpp"
#include "stratlab/harness/pool.hpp"
#include "stratlab/hyperbolicity.hpp"
#include "stratlab/oracles.hpp"

namespace stratlab::harness {

using nlohmann::json;

std::string to_string(Outcome o) {
  switch (o) {
    case Outcome::Pass: return "pass";
    case Outcome::Fail: return "fail";
    case Outcome::Skipped: return "skipped";
    case Outcome::Inconclusive: return "inconclusive";
  }
  return "unknown";
}

json to_json(const SuiteResult& r) {
  return json{{"name", r.name},       {"outcome", to_string(r.outcome)}, {"measured", r.measured},
              {"tolerance", r.tolerance}, {"detail", r.detail},          {"seconds", r.seconds},
              {"data", r.data}};
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

SuiteResult finish(SuiteResult r, bool ok, Clock::time_point t0) {
  r.outcome = ok ? Outcome::Pass : Outcome::Fail;
  r.seconds = seconds_since(t0);
  return r;
}

double uniform(std::mt19937_64& rng, double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }

double log_uniform(std::mt19937_64& rng, double a, double b) { return std::exp(uniform(rng, std::log(a), std::log(b))); }

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

}  // namespace

// ---------------------------------------------------------------------------

SuiteResult classification_suite(const ClassificationSuite& s) {
  const auto t0 = Clock::now();
  SuiteResult r;
  r.name = "classification";
  std::mt19937_64 rng(s.seed);
  const Regime regimes[3] = {Regime::Hyperbolic, Regime::Elliptic, Regime::FastHyperbolic};
  std::size_t mismatches = 0, sturm_mismatches = 0, flagged = 0, total = 0;
  std::vector<std::pair<double, double>> pairs;
  json examples = json::array();
  for (Regime want : regimes) {
    for (std::size_t k = 0; k < s.points_per_regime; ++k) {
      const double rho = uniform(rng, 0.02, 0.98);
      const double h = log_uniform(rng, 0.1, 10.0);
      const double Hb = uniform(rng, 0.2, 2.0);
      const CriticalFroude fr = critical_froude(h, rho);
      const double g = s.threshold_gap;
      double shear = 0.0;
      switch (want) {
        case Regime::Hyperbolic: shear = uniform(rng, 0.0, fr.minus * (1.0 - g)); break;
        case Regime::Elliptic: shear = uniform(rng, fr.minus * (1.0 + g), fr.plus * (1.0 - g)); break;
        case Regime::FastHyperbolic: shear = uniform(rng, fr.plus * (1.0 + g), 2.0 * fr.plus); break;
      }
      const double rho_b = uniform(rng, 0.5, 2.0);
      const double Us = uniform(rng, -1.0, 1.0);
      const double sign = uniform(rng, 0.0, 1.0) < 0.5 ? -1.0 : 1.0;
      const StatePoint p{rho * rho_b, rho_b, h * Hb, Hb, Us, Us + sign * shear * std::sqrt(Hb)};

      const HyperbolicityReport rep = classify(p);
      const int brute = oracles::matrix_real_root_count(p);
      const int sturm = oracles::sturm_real_root_count(characteristic_polynomial(p));
      const int expected = want == Regime::Elliptic ? 2 : 4;
      const bool ok = rep.regime == want && rep.real_roots == brute && brute == expected;
      ++total;
      if (rep.near_degenerate) ++flagged;
      if (sturm != expected) ++sturm_mismatches;
      if (!ok) {
        ++mismatches;
        if (examples.size() < 5) {
          examples.push_back({{"rho_ratio", rho}, {"h_ratio", h}, {"shear", shear}, {"regime", to_string(rep.regime)},
                              {"expected", to_string(want)}, {"classifier_roots", rep.real_roots},
                              {"matrix_roots", brute}});
        }
      }
      if (pairs.size() < s.bracket_checks) pairs.emplace_back(h, rho);
    }
  }

  double bracket_drift = 0.0, sign_drift = 0.0, tangency_gap = 0.0;
  for (const auto& [h, rho] : pairs) {
    const CriticalFroude base = critical_froude(h, rho);
    for (std::size_t scan : {256u, 1024u}) {
      CriticalFroudeOptions o;
      o.scan_points = scan;
      const CriticalFroude f = critical_froude(h, rho, o);
      bracket_drift = std::max({bracket_drift, std::abs(f.minus - base.minus), std::abs(f.plus - base.plus)});
    }
    CriticalFroudeOptions neg;
    neg.sign = -1;
    const CriticalFroude f = critical_froude(h, rho, neg);
    sign_drift = std::max({sign_drift, std::abs(f.minus - base.minus), std::abs(f.plus - base.plus)});
    const CriticalFroude t = oracles::tangency_froude(h, rho);
    tangency_gap = std::max({tangency_gap, std::abs(t.minus - base.minus), std::abs(t.plus - base.plus)});
  }

  r.measured = static_cast<double>(mismatches);
  r.tolerance = 0.0;
  r.data = {{"points", total},
            {"mismatches", mismatches},
            {"near_degenerate_flags", flagged},
            {"sturm_mismatches", sturm_mismatches},
            {"bracket_drift", bracket_drift},
            {"bracket_tolerance", s.bracket_tolerance},
            {"sign_symmetry_drift", sign_drift},
            {"tangency_oracle_gap", tangency_gap},
            {"failures", examples},
            {"seed", s.seed}};
  std::ostringstream os;
  os << mismatches << "/" << total << " disagreements with the eigenvalue count; Fr bracket drift " << bracket_drift;
  r.detail = os.str();
  return finish(std::move(r), mismatches == 0 && bracket_drift <= s.bracket_tolerance, t0);
}

SuiteResult atlas_suite(const AtlasSuite& s) {
  const auto t0 = Clock::now();
  SuiteResult r;
  r.name = "atlas";
  AtlasOptions o;
  o.samples_per_branch = s.samples;
  o.window = s.window;
  std::size_t mismatches = 0;
  json rows = json::array();
  for (double rho : s.rho_ratios) {
    const Atlas a = atlas(s.h_ratio, rho, s.intercepts, o);
    for (double c : s.intercepts) {
      const int crossings = count_intersections(a, c);
      const StatePoint p{rho, 1.0, s.h_ratio, 1.0, 0.0, c};
      const HyperbolicityReport rep = classify(p);
      if (crossings != rep.real_roots) ++mismatches;
      rows.push_back({{"rho_ratio", rho},
                      {"intercept", c},
                      {"intersections", crossings},
                      {"real_roots", rep.real_roots},
                      {"regime", to_string(rep.regime)}});
    }
  }
  r.measured = static_cast<double>(mismatches);
  r.data = {{"comparisons", rows}};
  r.detail = std::to_string(mismatches) + " intersection/root-count mismatches over " + std::to_string(rows.size()) +
             " lines";
  return finish(std::move(r), mismatches == 0, t0);
}

SuiteResult symmetrizer_suite(const SymmetrizerSuite& s) {
  const auto t0 = Clock::now();
  SuiteResult r;
  r.name = "symmetrizer";
  std::mt19937_64 rng(s.seed);
  std::size_t failures = 0, clipped = 0, fallback = 0, outside = 0;
  double worst_asym = 0.0, worst_minor = 0.0, min_eig = std::numeric_limits<double>::infinity();
  std::size_t done = 0;
  while (done < s.points) {
    const double sig = s.sigma;
    const double rho = uniform(rng, sig / 2.0, 1.0 - sig / 2.0);
    const double h = log_uniform(rng, sig, 1.0 / sig);
    const double Hb = uniform(rng, 0.2, 2.0);
    if (h * Hb + Hb < sig) continue;
    const CriticalFroude fr = critical_froude(h, rho);
    if (fr.minus - sig <= 0.0) continue;
    const double shear = uniform(rng, 0.0, fr.minus - sig);
    const double Us = uniform(rng, -1.0, 1.0);
    const double sign = uniform(rng, 0.0, 1.0) < 0.5 ? -1.0 : 1.0;
    const double rho_b = uniform(rng, 0.5, 2.0);
    const StatePoint p{rho * rho_b, rho_b, h * Hb, Hb, Us, Us + sign * shear * std::sqrt(Hb)};
    if (!in_hyperbolic_set(p, sig)) {
      ++outside;
      continue;
    }
    ++done;
    const Symmetrizer sym = symmetrizer(p);
    if (sym.clipped) ++clipped;
    if (sym.fallback) ++fallback;
    const double eig = min_eigenvalue(sym.S);
    min_eig = std::min(min_eig, eig);
    const double asym = (sym.SA - sym.SA.transpose()).cwiseAbs().maxCoeff();
    worst_asym = std::max(worst_asym, asym);
    const double P = characteristic_polynomial(p)(sym.lambda);
    const double rr = p.rho_ratio();
    const double minor = std::abs(sym.leading_minors[3] / (rr * rr) - P) / std::abs(P);
    worst_minor = std::max(worst_minor, minor);
    const bool ok = sym.certified && eig > 0.0 && asym <= s.symmetry_tolerance && minor <= s.minor_tolerance && P > 0.0;
    if (!ok) ++failures;
  }
  r.measured = static_cast<double>(failures);
  r.data = {{"points", s.points},
            {"failures", failures},
            {"max_asymmetry", worst_asym},
            {"max_minor_identity_error", worst_minor},
            {"min_eigenvalue", min_eig},
            {"clipped", clipped},
            {"fallback_search", fallback},
            {"rejected_outside_set", outside},
            {"sigma", s.sigma},
            {"seed", s.seed}};
  std::ostringstream os;
  os << failures << " uncertified; max |SA - SA^T| " << worst_asym << ", minor identity error " << worst_minor
     << ", midpoint clipped " << clipped << " times";
  r.detail = os.str();
  return finish(std::move(r), failures == 0, t0);
}

// ---------------------------------------------------------------------------

std::array<LayerData, 4> default_layers(double amplitude) {
  return {LayerData{Profile::Sine, 0.05 * amplitude, 1.0, 0.0}, LayerData{Profile::Sine, 0.03 * amplitude, 1.0, 0.3},
          LayerData{Profile::Sine, 0.02 * amplitude, 1.0, 1.0}, LayerData{Profile::Sine, 0.01 * amplitude, 2.0, 2.0}};
}

BilayerParams default_params(double kappa) {
  BilayerParams p;
  p.rho_s = 0.5;
  p.rho_b = 1.0;
  p.Hbar_s = 0.5;
  p.Hbar_b = 0.5;
  p.Ubar_s = 0.1;
  p.Ubar_b = -0.1;
  p.kappa = kappa;
  return p;
}

void perturb_pycnocline(StratifiedState& s, const SpatialGrid& grid, const LevelGrid& levels, double interface,
                        double eps, double amplitude) {
  const double k = 2.0 * std::numbers::pi / grid.length();
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const double z = std::abs(levels.midpoint(i) - interface);
    if (z >= eps) continue;
    const double a = amplitude * (1.0 - z / eps);
    for (std::size_t j = 0; j < grid.size(); ++j) s.h(i, j) += a * std::sin(k * grid.x(j));
  }
}

RefinedOutcome run_refined_case(const RefinedSetup& s) {
  const SpatialGrid grid(s.length, s.n_x);
  const BilayerState b0 = make_bilayer_state(grid, s.layers);
  auto [ref_profile, ref_init] = embed_bilayer(b0, s.params, s.levels);
  const SmoothedProfile target = smooth_pycnocline(PycnoclineSpec{s.params, s.epsilon, s.shape}, s.levels);
  StratifiedState app_init = ref_init;
  perturb_pycnocline(app_init, grid, s.levels, -s.params.Hbar_s, s.epsilon, s.perturbation);

  double dt = s.dt;
  if (dt <= 0.0) {
    StratifiedSolver a(grid, ref_profile, s.params.kappa), b(grid, target.profile, s.params.kappa);
    dt = std::min(a.stable_dt(flatten(ref_init), s.cfl), b.stable_dt(flatten(app_init), s.cfl));
  }
  IntegrateOptions o;
  o.dt = dt;
  o.cfl = s.cfl;
  o.samples = 0;
  ReferenceRun ref = run_reference(grid, ref_init, ref_profile, s.params.kappa, s.T, o);
  ForcingSeries forcing = build_forcing(grid, ref, target.profile);
  RefinedRun run = solve_refined(grid, app_init, target.profile, forcing, s.params.kappa, s.T, o);
  if (run.status != RunStatus::Completed) {
    throw BlowUpError("refined run halted: " + to_string(run.status), run.halt_time);
  }
  ConsistencyReport report = consistency_residual(grid, run, ref, forcing, s.sobolev_s);
  return RefinedOutcome{grid, target.profile, std::move(ref), std::move(forcing), std::move(run), std::move(report)};
}

// ---------------------------------------------------------------------------

SuiteResult conservation_suite(const ConservationSuite& s) {
  const auto t0 = Clock::now();
  SuiteResult r;
  r.name = "conservation";
  r.tolerance = s.tolerance;
  const SpatialGrid grid(2.0 * std::numbers::pi, s.n_x);
  json rows = json::array();
  double worst = 0.0;
  bool completed = true;
  for (double kappa : s.kappas) {
    const BilayerParams p = default_params(kappa);
    IntegrateOptions o;
    o.samples = 20;
    const BilayerRun run = integrate(grid, make_bilayer_state(grid, default_layers()), p, s.T, o);
    completed = completed && run.status == RunStatus::Completed;
    const auto& d0 = run.diagnostics.front();
    double mass = 0.0, mom = 0.0;
    for (const auto& d : run.diagnostics) {
      mass = std::max({mass, std::abs(d.mass_s - d0.mass_s), std::abs(d.mass_b - d0.mass_b)});
      mom = std::max({mom, std::abs(d.mom_s - d0.mom_s), std::abs(d.mom_b - d0.mom_b)});
    }
    mass /= s.T;
    mom /= s.T;
    worst = std::max(worst, mass);
    if (kappa == 0.0) worst = std::max(worst, mom);
    rows.push_back({{"kappa", kappa},
                    {"mass_drift_per_time", mass},
                    {"velocity_mean_drift_per_time", mom},
                    {"velocity_checked", kappa == 0.0},
                    {"status", to_string(run.status)}});
  }
  r.measured = worst;
  r.data = {{"runs", rows}};
  std::ostringstream os;
  os << "max drift per unit time " << worst;
  r.detail = os.str();
  return finish(std::move(r), completed && worst <= s.tolerance, t0);
}

SuiteResult bd_suite(const BdSuite& s) {
  const auto t0 = Clock::now();
  SuiteResult r;
  r.name = "bd-consistency";
  r.tolerance = s.order_tolerance;
  if (s.kappa == 0.0) {
    r.outcome = Outcome::Skipped;
    r.detail = "kappa = 0: the total velocity equals the velocity";
    return r;
  }
  const SpatialGrid grid(2.0 * std::numbers::pi, s.n_x);
  const BilayerParams p = default_params(s.kappa);
  const BilayerState b0 = make_bilayer_state(grid, default_layers());
  std::vector<double> res;
  json rows = json::array();
  for (double dt : s.dts) {
    IntegrateOptions o;
    o.dt = dt;
    o.samples = 0;
    const BilayerRun run = integrate(grid, b0, p, s.T, o);
    if (run.status != RunStatus::Completed || run.steps < 4) {
      r.outcome = Outcome::Inconclusive;
      r.detail = "run at dt = " + std::to_string(dt) + " did not complete";
      return r;
    }
    const std::size_t m = run.steps / 2;
    const BdResidual bd = bd_residual(grid, p, std::span(run.trajectory).subspan(m - 2, 5), run.dt);
    res.push_back(bd.l2);
    rows.push_back({{"dt", run.dt}, {"t", bd.t}, {"residual", bd.l2}, {"per_field", bd.per_field}});
  }
  const auto orders = observed_orders(res, s.dts[0] / s.dts[1]);
  double worst = 0.0;
  for (double q : orders) worst = std::max(worst, std::abs(q - s.expected_order));
  r.measured = orders.empty() ? 0.0 : orders.back();
  r.data = {{"runs", rows}, {"orders", orders}, {"kappa", s.kappa}, {"residual_bound", s.residual_bound}};
  std::ostringstream os;
  os << "orders";
  for (double q : orders) os << ' ' << q;
  os << ", finest residual " << res.back();
  r.detail = os.str();
  return finish(std::move(r), worst <= s.order_tolerance && res.back() <= s.residual_bound, t0);
}

SuiteResult richardson_suite(const RichardsonSuite& s) {
  const auto t0 = Clock::now();
  SuiteResult r;
  r.name = "richardson";
  const SpatialGrid grid(2.0 * std::numbers::pi, s.n_x);
  const BilayerParams p = default_params(s.kappa);
  const BilayerState b0 = make_bilayer_state(grid, default_layers());
  std::vector<std::vector<double>> finals;
  for (double dt : {s.dt, s.dt / 2.0, s.dt / 4.0}) {
    IntegrateOptions o;
    o.dt = dt;
    o.samples = 1;
    o.keep_trajectory = false;
    finals.push_back(flatten(integrate(grid, b0, p, s.T, o).final_state));
  }
  const double e1 = max_abs_diff(finals[0], finals[1]);
  const double e2 = max_abs_diff(finals[1], finals[2]);
  const double ratio = e1 / e2;
  r.measured = ratio;
  r.tolerance = 2.0;
  r.data = {{"e_dt", e1}, {"e_dt_half", e2}, {"ratio", ratio}};
  std::ostringstream os;
  os << "successive differences " << e1 << ", " << e2 << " (ratio " << ratio << ", expected 16)";
  r.detail = os.str();
  return finish(std::move(r), ratio >= 8.0 && ratio <= 32.0, t0);
}

SuiteResult embedding_suite(const EmbeddingSuite& s) {
  const auto t0 = Clock::now();
  SuiteResult r;
  r.name = "embedding";
  r.tolerance = s.rhs_tolerance;
  const SpatialGrid grid(2.0 * std::numbers::pi, s.n_x);
  const BilayerParams p = default_params(s.kappa);
  const LevelGrid levels = LevelGrid::with_interface(-p.Hbar_s, s.n_lower, s.n_upper);
  const BilayerState b0 = make_bilayer_state(grid, default_layers());
  const auto [profile, st0] = embed_bilayer(b0, p, levels);

  StratifiedSolver strat(grid, profile, p.kappa);
  strat.inject_pressure_sign_fault(s.fault_montgomery_sign);
  BilayerSolver bil(grid, p);
  const StratifiedState rs = strat.rhs(st0);
  const auto [unused, rb] = embed_bilayer(bil.rhs(b0), p, levels);
  const double rhs_h = max_abs_diff(rs.h.span(), rb.h.span());
  const double rhs_u = max_abs_diff(rs.u.span(), rb.u.span());

  IntegrateOptions o;
  o.dt = s.dt;
  o.samples = 1;
  const BilayerRun brun = integrate(grid, b0, p, s.T, o);
  auto y = flatten(st0);
  const std::size_t steps = steps_for(s.T, s.dt);
  const double dt = s.T / static_cast<double>(steps);
  for (std::size_t k = 0; k < steps; ++k) strat.step(y, dt);
  const auto [unused2, bend] = embed_bilayer(brun.final_state, p, levels);
  const double traj = max_abs_diff(y, flatten(bend));

  r.measured = std::max(rhs_h, rhs_u);
  r.data = {{"rhs_h", rhs_h},
            {"rhs_u", rhs_u},
            {"trajectory", traj},
            {"trajectory_tolerance", s.trajectory_tolerance},
            {"levels", levels.size()},
            {"fault_injected", s.fault_montgomery_sign}};
  std::ostringstream os;
  os << "rhs difference h " << rhs_h << ", u " << rhs_u << "; trajectory difference " << traj << " at T = " << s.T;
  r.detail = os.str();
  const bool ok = std::isfinite(traj) && rhs_h <= s.rhs_tolerance && rhs_u <= s.rhs_tolerance &&
                  traj <= s.trajectory_tolerance;
  return finish(std::move(r), ok, t0);
}

SuiteResult lipschitz_suite(const LipschitzSuite& s) {
  const auto t0 = Clock::now();
  SuiteResult r;
  r.name = "montgomery-lipschitz";
  r.tolerance = 1.0 + s.tolerance;
  std::mt19937_64 rng(s.seed);
  double worst = 0.0;
  for (std::size_t trial = 0; trial < s.trials; ++trial) {
    const std::size_t nr = 2 + static_cast<std::size_t>(uniform(rng, 0.0, 23.0));
    std::vector<double> cuts(nr - 1);
    for (double& c : cuts) c = uniform(rng, -0.999, -0.001);
    std::sort(cuts.begin(), cuts.end());
    std::vector<double> edges{-1.0};
    for (double c : cuts) {
      if (c - edges.back() > 1e-4) edges.push_back(c);
    }
    edges.push_back(0.0);
    const LevelGrid levels(edges);
    StratifiedProfile a, b;
    a.levels = b.levels = levels;
    const bool nearby = trial % 2 == 0;
    for (std::size_t i = 0; i < levels.size(); ++i) {
      a.rho.push_back(log_uniform(rng, 0.2, 5.0));
      b.rho.push_back(nearby ? a.rho.back() * (1.0 + uniform(rng, -0.1, 0.1)) : log_uniform(rng, 0.2, 5.0));
      a.ubar.push_back(0.0);
      b.ubar.push_back(0.0);
    }
    const std::size_t n = 8;
    Field2D h(levels.size(), n);
    for (std::size_t k = 0; k < h.size(); ++k) h.data()[k] = uniform(rng, -1.0, 1.0);
    worst = std::max(worst, montgomery_lipschitz_check(a, b, h).max_ratio);
  }
  r.measured = worst;
  r.data = {{"trials", s.trials}, {"max_ratio", worst}, {"seed", s.seed}};
  std::ostringstream os;
  os << "max left/right ratio " << worst << " over " << s.trials << " trials";
  r.detail = os.str();
  return finish(std::move(r), worst <= 1.0 + s.tolerance, t0);
}

namespace {

RefinedSetup refined_defaults(std::size_t n_x, double kappa, double T) {
  RefinedSetup c;
  c.params = default_params(kappa);
  c.params.Hbar_s = 0.4;
  c.params.Hbar_b = 0.6;
  c.layers = default_layers();
  c.n_x = n_x;
  c.epsilon = 0.02;
  c.levels = LevelGrid::graded(-c.params.Hbar_s, 6.0 * c.epsilon, 24, 0.3, 1.2, 8, 3);
  c.T = T;
  return c;
}

}  // namespace

SuiteResult refined_suite(const RefinedSuite& s) {
  const auto t0 = Clock::now();
  SuiteResult r;
  r.name = "refined-consistency";
  r.tolerance = 1.0 + s.ratio_tolerance;
  std::mt19937_64 rng(s.seed);
  json rows = json::array();
  double worst_ratio = 0.0, worst_gap = 0.0;
  for (std::size_t k = 0; k <= s.random_runs; ++k) {
    RefinedSetup c = refined_defaults(k == 0 ? s.n_x : 32, s.kappa, s.T);
    if (k > 0) {
      c.epsilon = uniform(rng, 0.005, 0.05);
      c.perturbation = uniform(rng, 0.1, 0.5);
      c.layers = default_layers(uniform(rng, 0.5, 1.5));
      c.levels = LevelGrid::graded(-c.params.Hbar_s, 6.0 * c.epsilon, 16, 0.35, 1.25, 6, 2);
    }
    const RefinedOutcome out = run_refined_case(c);
    worst_ratio = std::max(worst_ratio, out.report.max_ratio);
    worst_gap = std::max(worst_gap, out.report.max_relative_gap);
    rows.push_back({{"epsilon", c.epsilon},
                    {"perturbation", c.perturbation},
                    {"n_x", c.n_x},
                    {"levels", c.levels.size()},
                    {"samples", out.report.samples.size()},
                    {"max_ratio", out.report.max_ratio},
                    {"max_relative_gap", out.report.max_relative_gap}});
  }
  r.measured = worst_ratio;
  r.data = {{"runs", rows}, {"gap_tolerance", s.gap_tolerance}, {"seed", s.seed}};
  std::ostringstream os;
  os << "bound ratio " << worst_ratio << ", substitution/closed-form gap " << worst_gap;
  r.detail = os.str();
  return finish(std::move(r), worst_ratio <= 1.0 + s.ratio_tolerance && worst_gap <= s.gap_tolerance, t0);
}

SuiteResult refined_self_consistency_suite(const SelfConsistencySuite& s) {
  const auto t0 = Clock::now();
  SuiteResult r;
  r.name = "refined-self-consistency";
  const SpatialGrid grid(2.0 * std::numbers::pi, s.n_x);
  BilayerParams p = default_params(s.kappa);
  const LevelGrid levels = LevelGrid::with_interface(-p.Hbar_s, 8, 8);
  const auto [profile, st0] = embed_bilayer(make_bilayer_state(grid, default_layers()), p, levels);

  StratifiedSolver probe(grid, profile, s.kappa);
  const double dt = probe.stable_dt(flatten(st0), 0.4);
  IntegrateOptions o;
  o.dt = dt;
  o.samples = 0;
  const ReferenceRun ref = run_reference(grid, st0, profile, s.kappa, s.T, o);
  const ForcingSeries forcing = build_forcing(grid, ref, profile);
  const RefinedRun run = solve_refined(grid, st0, profile, forcing, s.kappa, s.T, o);

  // Integrator error scale: the reference against itself at half the step.
  IntegrateOptions half = o;
  half.dt = ref.snapshots.size() > 1 ? (ref.snapshots[1].t - ref.snapshots[0].t) / 2.0 : dt / 2.0;
  half.samples = 1;
  const StratifiedRun fine = integrate(grid, st0, profile, s.kappa, s.T, half);
  const double integrator = max_abs_diff(flatten(ref.snapshots.back()), flatten(fine.final_state));

  double diff = 0.0;
  const std::size_t count = std::min(run.trajectory.size(), ref.snapshots.size());
  for (std::size_t k = 0; k < count; ++k) {
    diff = std::max(diff, max_abs_diff(flatten(run.trajectory[k]), flatten(ref.snapshots[k])));
  }

  // Level decoupling.
  const std::size_t zeroed = levels.size() / 2;
  ForcingSeries cut = forcing;
  cut.zero_level(zeroed);
  const RefinedRun other = solve_refined(grid, st0, profile, cut, s.kappa, s.T, o);
  bool bitwise = other.trajectory.size() == run.trajectory.size();
  for (std::size_t k = 0; bitwise && k < run.trajectory.size(); ++k) {
    for (std::size_t i = 0; i < levels.size(); ++i) {
      if (i == zeroed) continue;
      const auto a = run.trajectory[k].h.level(i), b = other.trajectory[k].h.level(i);
      const auto c = run.trajectory[k].u.level(i), d = other.trajectory[k].u.level(i);
      if (!std::equal(a.begin(), a.end(), b.begin()) || !std::equal(c.begin(), c.end(), d.begin())) bitwise = false;
    }
  }
  bool changed = false;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    changed = changed || run.trajectory.back().u(zeroed, j) != other.trajectory.back().u(zeroed, j);
  }

  const double bound = 10.0 * std::max(integrator, 1e-14);
  r.measured = diff;
  r.tolerance = bound;
  r.data = {{"max_difference", diff},
            {"integrator_error", integrator},
            {"other_levels_bitwise_equal", bitwise},
            {"zeroed_level_changed", changed},
            {"count", count}};
  std::ostringstream os;
  os << "refined vs reference " << diff << " (integrator scale " << integrator << "); decoupling "
     << (bitwise && changed ? "holds" : "broken");
  r.detail = os.str();
  return finish(std::move(r), count == ref.snapshots.size() && diff <= bound && bitwise && changed, t0);
}

// ---------------------------------------------------------------------------

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"classification",       "atlas",      "symmetrizer",
                                              "conservation",         "bd-consistency", "richardson",
                                              "embedding",            "montgomery-lipschitz",
                                              "refined-consistency",  "refined-self-consistency"};
  return names;
}

std::vector<SuiteResult> run_suites(const CheckAllOptions& o) {
  for (const auto& name : o.only) {
    if (std::find(suite_names().begin(), suite_names().end(), name) == suite_names().end()) {
      throw ConfigError("unknown suite '" + name + "'");
    }
  }
  std::vector<std::string> selected;
  for (const auto& name : suite_names()) {
    if (o.only.empty() || std::find(o.only.begin(), o.only.end(), name) != o.only.end()) selected.push_back(name);
  }
  const auto run_one = [&](const std::string& name) -> SuiteResult {
    if (name == "classification") {
      ClassificationSuite s;
      s.seed = o.seed;
      s.points_per_regime = o.random_points;
      return classification_suite(s);
    }
    if (name == "atlas") return atlas_suite({});
    if (name == "symmetrizer") {
      SymmetrizerSuite s;
      s.seed = o.seed + 1;
      s.points = o.random_points;
      return symmetrizer_suite(s);
    }
    if (name == "conservation") return conservation_suite({});
    if (name == "bd-consistency") {
      BdSuite s;
      s.kappa = o.bd_kappa;
      return bd_suite(s);
    }
    if (name == "richardson") return richardson_suite({});
    if (name == "embedding") {
      EmbeddingSuite s;
      s.fault_montgomery_sign = o.fault_montgomery_sign;
      return embedding_suite(s);
    }
    if (name == "montgomery-lipschitz") {
      LipschitzSuite s;
      s.seed = o.seed + 2;
      s.trials = o.random_points;
      return lipschitz_suite(s);
    }
    if (name == "refined-consistency") {
      RefinedSuite s;
      s.seed = o.seed + 3;
      return refined_suite(s);
    }
    return refined_self_consistency_suite({});
  };
  std::vector<SuiteResult> out(selected.size());
  parallel_for(selected.size(), o.threads, [&](std::size_t i) {
    try {
      out[i] = run_one(selected[i]);
    } catch (const BlowUpError& e) {
      out[i].name = selected[i];
      out[i].outcome = Outcome::Inconclusive;
      out[i].detail = e.what();
    } catch (const DomainError& e) {
      out[i].name = selected[i];
      out[i].outcome = Outcome::Fail;
      out[i].detail = e.what();
    }
  });
  return out;
}

}  // namespace stratlab::harness
