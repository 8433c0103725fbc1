#include "stratlab/refined.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "stratlab/core/csv.hpp"
#include "stratlab/core/error.hpp"
#include "stratlab/core/rk4.hpp"

namespace stratlab {

void ReferenceRun::validate() const {
  profile.validate();
  if (snapshots.size() < 2) throw DomainError("ReferenceRun: need at least two snapshots");
  const auto& first = snapshots.front().h;
  for (std::size_t k = 0; k < snapshots.size(); ++k) {
    const auto& s = snapshots[k];
    if (s.h.levels() != profile.size() || s.h.levels() != first.levels() || s.h.points() != first.points()) {
      throw DomainError("ReferenceRun: snapshot shapes differ");
    }
    if (k > 0 && !(s.t > snapshots[k - 1].t)) throw DomainError("ReferenceRun: times must increase strictly");
  }
}

double ReferenceRun::horizon() const { return snapshots.empty() ? 0.0 : snapshots.back().t; }

ReferenceRun run_reference(const SpatialGrid& grid, const StratifiedState& initial, const StratifiedProfile& profile,
                           double kappa, double T, const IntegrateOptions& options) {
  IntegrateOptions o = options;
  o.samples = 0;
  o.keep_trajectory = true;
  StratifiedRun run = integrate(grid, initial, profile, kappa, T, o);
  if (run.status != RunStatus::Completed) {
    throw BlowUpError("reference run halted: " + to_string(run.status), run.halt_time);
  }
  ReferenceRun ref;
  ref.profile = profile;
  ref.kappa = kappa;
  ref.snapshots = std::move(run.trajectory);
  for (auto& s : ref.snapshots) s.t += initial.t;
  return ref;
}

ForcingSeries::ForcingSeries(const SpatialGrid& grid, const ReferenceRun& ref, const StratifiedProfile& target) {
  ref.validate();
  target.validate();
  if (!(target.levels == ref.profile.levels)) throw DomainError("build_forcing: level grids differ");
  n_r_ = target.size();
  n_x_ = grid.size();
  if (ref.snapshots.front().h.points() != n_x_) throw DomainError("build_forcing: spatial grid mismatch");
  StratifiedSolver solver(grid, target, 0.0);
  for (const auto& s : ref.snapshots) {
    std::vector<double> f(n_r_ * n_x_);
    solver.pressure(s.h.span(), f);
    for (double& v : f) v = -v;
    times_.push_back(s.t);
    values_.push_back(std::move(f));
  }
}

void ForcingSeries::evaluate(double t, std::span<double> out) const {
  if (out.size() != n_r_ * n_x_) throw DomainError("ForcingSeries: output size mismatch");
  const double slack = 1e-12 * std::max(1.0, std::abs(horizon()));
  if (t < start() - slack || t > horizon() + slack) {
    std::ostringstream os;
    os << "ForcingSeries: t = " << t << " outside the reference interval [" << start() << ", " << horizon() << "]";
    throw DomainError(os.str());
  }
  const std::size_t N = times_.size();
  auto it = std::upper_bound(times_.begin(), times_.end(), t);
  std::size_t k = it == times_.begin() ? 0 : static_cast<std::size_t>(it - times_.begin()) - 1;
  k = std::min(k, N - 1);
  for (std::size_t q : {k, std::min(k + 1, N - 1)}) {
    if (std::abs(times_[q] - t) <= slack) {
      std::copy(values_[q].begin(), values_[q].end(), out.begin());
      return;
    }
  }
  const std::size_t width = std::min<std::size_t>(4, N);
  std::size_t first = k >= 1 ? k - 1 : 0;
  first = std::min(first, N - width);
  double weight[4] = {0.0, 0.0, 0.0, 0.0};
  for (std::size_t a = 0; a < width; ++a) {
    double l = 1.0;
    for (std::size_t b = 0; b < width; ++b) {
      if (a != b) l *= (t - times_[first + b]) / (times_[first + a] - times_[first + b]);
    }
    weight[a] = l;
  }
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t a = 0; a < width; ++a) {
    const auto& v = values_[first + a];
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += weight[a] * v[j];
  }
}

void ForcingSeries::zero_level(std::size_t level) {
  if (level >= n_r_) throw DomainError("ForcingSeries::zero_level: level out of range");
  for (auto& v : values_) std::fill(v.begin() + static_cast<std::ptrdiff_t>(level * n_x_),
                                    v.begin() + static_cast<std::ptrdiff_t>((level + 1) * n_x_), 0.0);
}

ForcingSeries build_forcing(const SpatialGrid& grid, const ReferenceRun& ref, const StratifiedProfile& target) {
  return ForcingSeries(grid, ref, target);
}

RefinedRun solve_refined(const SpatialGrid& grid, const StratifiedState& initial, const StratifiedProfile& profile,
                         const ForcingSeries& forcing, double kappa, double T, const IntegrateOptions& options) {
  const std::size_t n = grid.size();
  const std::size_t nr = profile.size();
  if (initial.h.levels() != nr || initial.h.points() != n) throw DomainError("solve_refined: grid mismatch");
  if (forcing.levels() != nr || forcing.points() != n) throw DomainError("solve_refined: forcing grid mismatch");
  const double t0 = initial.t;
  const double slack = 1e-12 * std::max(1.0, std::abs(forcing.horizon()));
  if (t0 < forcing.start() - slack || t0 + T > forcing.horizon() + slack) {
    throw DomainError("solve_refined: forcing does not cover the integration interval");
  }

  StratifiedSolver solver(grid, profile, kappa);
  auto y = flatten(initial);
  require_finite(y, "refined initial state");
  const double limit = solver.stable_dt(y, options.cfl);
  if (options.dt > 0.0 && options.dt > limit * (1.0 + 1e-12)) {
    throw DomainError("solve_refined: dt exceeds the stability limit");
  }
  const std::size_t steps = steps_for(T, options.dt > 0.0 ? options.dt : limit);

  RefinedRun run;
  run.profile = profile;
  run.kappa = kappa;
  run.dt = steps == 0 ? 0.0 : T / static_cast<double>(steps);
  const std::size_t every =
      options.samples == 0 || options.samples >= steps ? 1 : std::max<std::size_t>(1, steps / options.samples);

  std::vector<double> F(nr * n);
  Rk4Stepper rk(y.size());
  const Rk4Stepper::Rhs f = [&](double t, std::span<const double> v, std::span<double> d) {
    forcing.evaluate(t, F);
    solver.rhs_forced(v, F, d);
  };

  run.trajectory.push_back(unflatten_stratified(y, nr, n, t0));
  double t = t0;
  for (std::size_t k = 1; k <= steps; ++k) {
    const double tk = t0 + static_cast<double>(k - 1) * run.dt;
    try {
      rk.step(f, tk, y, run.dt);
    } catch (const DomainError&) {
      run.status = RunStatus::DepthFloor;
      run.halt_time = t;
      break;
    }
    t = t0 + static_cast<double>(k) * run.dt;
    run.steps = k;
    if (!std::all_of(y.begin(), y.end(), [](double v) { return std::isfinite(v); })) {
      run.status = RunStatus::NonFinite;
      run.halt_time = t;
      break;
    }
    if (std::any_of(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(nr * n),
                    [&](double v) { return 1.0 + v <= options.depth_floor; })) {
      run.status = RunStatus::DepthFloor;
      run.halt_time = t;
      break;
    }
    if (k % every == 0 || k == steps) run.trajectory.push_back(unflatten_stratified(y, nr, n, t));
  }
  if (run.status == RunStatus::Completed) run.halt_time = t;
  return run;
}

ConsistencyReport consistency_residual(const SpatialGrid& grid, const RefinedRun& run, const ReferenceRun& ref,
                                       const ForcingSeries& forcing, double s) {
  const StratifiedProfile& profile = run.profile;
  const std::size_t n = grid.size();
  const std::size_t nr = profile.size();
  if (!(profile.levels == ref.profile.levels)) throw DomainError("consistency_residual: level grids differ");
  StratifiedSolver solver(grid, profile, run.kappa);
  SpectralOps& ops = solver.spectral();

  double rmax = 0.0, inv_rmax = 0.0;
  for (double r : profile.rho) {
    rmax = std::max(rmax, r);
    inv_rmax = std::max(inv_rmax, 1.0 / r);
  }

  ConsistencyReport report;
  std::vector<double> F(nr * n), d_true(2 * nr * n), d_ref(2 * nr * n), diff(nr * n), closed(nr * n);
  for (const StratifiedState& st : run.trajectory) {
    const auto match = std::find_if(ref.snapshots.begin(), ref.snapshots.end(), [&](const StratifiedState& r) {
      return std::abs(r.t - st.t) <= 1e-12 * std::max(1.0, std::abs(st.t));
    });
    if (match == ref.snapshots.end()) {
      throw DomainError("consistency_residual: refined sample time has no matching reference snapshot");
    }
    const auto y = flatten(st);
    forcing.evaluate(st.t, F);
    solver.rhs_forced(y, F, d_ref);
    solver.rhs(y, d_true);
    for (std::size_t k = 0; k < nr * n; ++k) diff[k] = st.h.data()[k] - match->h.data()[k];
    solver.pressure(diff, closed);

    ResidualSample sample;
    sample.t = st.t;
    double gap = 0.0, scale = 0.0, bound_sum = 0.0;
    for (std::size_t i = 0; i < nr; ++i) {
      std::span<double> ci(closed.data() + i * n, n);
      ops.dealias(ci);
      std::vector<double> sub(n);
      for (std::size_t j = 0; j < n; ++j) {
        sub[j] = d_ref[(nr + i) * n + j] - d_true[(nr + i) * n + j];
        gap = std::max(gap, std::abs(sub[j] - ci[j]));
        scale = std::max(scale, std::abs(ci[j]));
      }
      sample.residual_hs.push_back(ops.sobolev_norm(ci, s));
      sample.substituted_hs.push_back(ops.sobolev_norm(sub, s));
      bound_sum += profile.levels.weight(i) * ops.sobolev_norm(std::span<const double>(diff.data() + i * n, n), s + 1.0);
    }
    sample.bound = rmax * inv_rmax * bound_sum;
    for (double r : sample.residual_hs) {
      double ratio = 0.0;
      if (sample.bound > 0.0) {
        ratio = r / sample.bound;
      } else if (r > 0.0) {
        ratio = std::numeric_limits<double>::infinity();
      }
      sample.max_ratio = std::max(sample.max_ratio, ratio);
    }
    sample.relative_gap = scale > 0.0 ? gap / scale : (gap > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    report.max_ratio = std::max(report.max_ratio, sample.max_ratio);
    report.max_relative_gap = std::max(report.max_relative_gap, sample.relative_gap);
    report.samples.push_back(std::move(sample));
  }
  return report;
}

void write_residual_csv(const std::string& path, const LevelGrid& levels, const ConsistencyReport& report) {
  std::vector<std::vector<double>> rows;
  for (const auto& s : report.samples) {
    for (std::size_t i = 0; i < s.residual_hs.size(); ++i) {
      const double ratio = s.bound > 0.0 ? s.residual_hs[i] / s.bound : 0.0;
      rows.push_back({s.t, levels.midpoint(i), s.residual_hs[i], s.bound, ratio});
    }
  }
  write_csv(path, {"t", "r", "residual_hs", "bound", "ratio"}, rows);
}

}  // namespace stratlab
