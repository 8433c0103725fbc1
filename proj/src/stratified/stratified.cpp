#include "stratlab/stratified.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "stratlab/core/error.hpp"
#include "stratlab/core/rk4.hpp"
#include "stratlab/kernels/kernels.hpp"

namespace stratlab {

void StratifiedProfile::validate() const {
  if (rho.size() != levels.size() || ubar.size() != levels.size()) {
    throw DomainError("StratifiedProfile: rho/ubar sizes must match the level grid");
  }
  for (double r : rho) {
    if (!(r > 0.0) || !std::isfinite(r)) throw DomainError("StratifiedProfile: densities must be positive");
  }
  require_finite(ubar, "StratifiedProfile ubar");
}

double StratifiedProfile::bound() const {
  double m = 0.0;
  for (double r : rho) m = std::max({m, std::abs(r), 1.0 / std::abs(r)});
  return m;
}

StratifiedState StratifiedState::zero(std::size_t n_r, std::size_t n_x) {
  StratifiedState s;
  s.h = Field2D(n_r, n_x);
  s.u = Field2D(n_r, n_x);
  return s;
}

Field2D montgomery(const StratifiedProfile& profile, const Field2D& h) {
  profile.validate();
  if (h.levels() != profile.size()) throw DomainError("montgomery: level count mismatch");
  Field2D out(h.levels(), h.points());
  kernels::active().montgomery(out.data(), h.data(), profile.rho.data(), profile.levels.weights().data(),
                               h.levels(), h.points(), h.points(), false);
  return out;
}

struct StratifiedSolver::Work {
  Work(std::size_t n_r, std::size_t n, std::size_t m)
      : dh(n), du(n), flux(n), adv(n), c(m), hat_h(n_r * m), hat_u(n_r * m), g(n_r * m), p(n_r * m),
        rk(2 * n_r * n) {}
  std::vector<double> dh, du, flux, adv;
  std::vector<Complex> c;
  std::vector<Complex> hat_h, hat_u, g, p;
  Rk4Stepper rk;
};

StratifiedSolver::StratifiedSolver(const SpatialGrid& grid, const StratifiedProfile& profile, double kappa)
    : grid_(grid), profile_(profile), kappa_(kappa), ops_(grid) {
  profile_.validate();
  if (!(kappa >= 0.0 && kappa <= 1.0)) throw DomainError("StratifiedSolver: kappa must lie in [0,1]");
  work_ = std::make_unique<Work>(profile_.size(), grid.size(), grid.size() / 2 + 1);
}

StratifiedSolver::~StratifiedSolver() = default;
StratifiedSolver::StratifiedSolver(StratifiedSolver&&) noexcept = default;
StratifiedSolver& StratifiedSolver::operator=(StratifiedSolver&&) noexcept = default;

namespace {

void require_layer_depths(std::span<const double> h) {
  for (std::size_t k = 0; k < h.size(); ++k) {
    if (!(1.0 + h[k] > 0.0)) {
      std::ostringstream os;
      os << "stratified: non-positive depth 1 + h = " << 1.0 + h[k] << " at flat index " << k;
      throw DomainError(os.str());
    }
  }
}

}  // namespace

void StratifiedSolver::pressure(std::span<const double> h, std::span<double> out) {
  const std::size_t n = grid_.size();
  const std::size_t m = ops_.modes();
  const std::size_t nr = profile_.size();
  if (h.size() != nr * n || out.size() != nr * n) throw DomainError("pressure: size mismatch");
  Work& w = *work_;
  for (std::size_t i = 0; i < nr; ++i) {
    std::span<Complex> gi(w.g.data() + i * m, m);
    ops_.forward(h.subspan(i * n, n), gi);
    ops_.apply_derivative(gi, 1);
  }
  kernels::active().montgomery(reinterpret_cast<double*>(w.p.data()), reinterpret_cast<const double*>(w.g.data()),
                               profile_.rho.data(), profile_.levels.weights().data(), nr, 2 * m, 2 * m, true);
  for (std::size_t i = 0; i < nr; ++i) {
    ops_.inverse(std::span<const Complex>(w.p.data() + i * m, m), out.subspan(i * n, n));
  }
}

void StratifiedSolver::rhs(std::span<const double> y, std::span<double> dydt) { evaluate(y, {}, dydt); }

void StratifiedSolver::rhs_forced(std::span<const double> y, std::span<const double> forcing,
                                  std::span<double> dydt) {
  if (forcing.size() != profile_.size() * grid_.size()) throw DomainError("rhs_forced: forcing size mismatch");
  evaluate(y, forcing, dydt);
}

void StratifiedSolver::evaluate(std::span<const double> y, std::span<const double> forcing,
                                std::span<double> dydt) {
  const bool forced = !forcing.empty();
  const std::size_t n = grid_.size();
  const std::size_t m = ops_.modes();
  const std::size_t nr = profile_.size();
  if (y.size() != 2 * nr * n || dydt.size() != 2 * nr * n) throw DomainError("stratified rhs: size mismatch");
  require_finite(y, "stratified state");
  require_layer_depths(y.subspan(0, nr * n));
  Work& w = *work_;
  const auto& kt = kernels::active();

  for (std::size_t i = 0; i < nr; ++i) {
    std::span<Complex> hh(w.hat_h.data() + i * m, m);
    std::span<Complex> gi(w.g.data() + i * m, m);
    ops_.forward(y.subspan(i * n, n), hh);
    std::copy(hh.begin(), hh.end(), gi.begin());
    ops_.apply_derivative(gi, 1);
  }
  if (forced) {
    // The prescribed forcing replaces -(1/rho) M[rho] d_x h; levels decouple.
    for (std::size_t i = 0; i < nr; ++i) {
      std::span<Complex> pi(w.p.data() + i * m, m);
      ops_.forward(forcing.subspan(i * n, n), pi);
      for (auto& v : pi) v = -v;
    }
  } else {
    kt.montgomery(reinterpret_cast<double*>(w.p.data()), reinterpret_cast<const double*>(w.g.data()),
                  profile_.rho.data(), profile_.levels.weights().data(), nr, 2 * m, 2 * m, true);
  }
  const double sign = fault_ && !forced ? -1.0 : 1.0;

  for (std::size_t i = 0; i < nr; ++i) {
    const double* h = y.data() + i * n;
    const double* u = y.data() + (nr + i) * n;
    const std::span<const Complex> hh(w.hat_h.data() + i * m, m);
    const std::span<const Complex> gi(w.g.data() + i * m, m);
    ops_.inverse(gi, w.dh);
    ops_.forward(std::span<const double>(u, n), w.c);
    ops_.apply_derivative(w.c, 1);
    ops_.inverse(w.c, w.du);
    const double ubar = profile_.ubar[i];

    kt.mass_flux(w.flux.data(), h, u, 1.0, ubar, n);
    ops_.forward(w.flux, w.c);
    for (std::size_t k = 0; k < m; ++k) {
      const double xi = ops_.wavenumber(k);
      Complex rate = -Complex(0.0, xi) * w.c[k];
      if (kappa_ != 0.0) rate -= (kappa_ * xi * xi) * hh[k];
      w.c[k] = rate;
    }
    w.c[m - 1] = 0.0;
    ops_.dealias(std::span<Complex>(w.c));
    ops_.inverse(w.c, dydt.subspan(i * n, n));

    kt.advection(w.adv.data(), u, w.du.data(), h, w.dh.data(), 1.0, ubar, kappa_, n);
    ops_.forward(w.adv, w.c);
    const Complex* pi = w.p.data() + i * m;
    for (std::size_t k = 0; k < m; ++k) w.c[k] = -w.c[k] - sign * pi[k];
    w.c[m - 1] = 0.0;
    ops_.dealias(std::span<Complex>(w.c));
    ops_.inverse(w.c, dydt.subspan((nr + i) * n, n));
  }
}

StratifiedState StratifiedSolver::rhs(const StratifiedState& s) {
  if (s.h.levels() != profile_.size() || s.h.points() != grid_.size()) {
    throw DomainError("stratified rhs: state does not match grids");
  }
  const auto y = flatten(s);
  std::vector<double> d(y.size());
  rhs(y, d);
  return unflatten_stratified(d, profile_.size(), grid_.size(), s.t);
}

void StratifiedSolver::step(std::span<double> y, double dt) {
  work_->rk.step([this](double, std::span<const double> v, std::span<double> d) { rhs(v, d); }, 0.0, y, dt);
}

double StratifiedSolver::max_speed(std::span<const double> y) {
  const std::size_t n = grid_.size();
  const std::size_t nr = profile_.size();
  if (y.size() != 2 * nr * n) throw DomainError("max_speed: size mismatch");
  double rmin = std::numeric_limits<double>::infinity();
  double rmax = 0.0;
  for (double r : profile_.rho) {
    rmin = std::min(rmin, r);
    rmax = std::max(rmax, r);
  }
  double column = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double depth = 0.0;
    for (std::size_t i = 0; i < nr; ++i) depth += profile_.levels.weight(i) * (1.0 + y[i * n + j]);
    column = std::max(column, depth);
  }
  double adv = 0.0;
  double bolus = 0.0;
  std::vector<double> dh(n);
  for (std::size_t i = 0; i < nr; ++i) {
    for (std::size_t j = 0; j < n; ++j) adv = std::max(adv, std::abs(profile_.ubar[i] + y[(nr + i) * n + j]));
    if (kappa_ > 0.0) {
      ops_.derivative(y.subspan(i * n, n), 1, dh);
      for (std::size_t j = 0; j < n; ++j) {
        bolus = std::max(bolus, std::abs(kappa_ * dh[j] / (1.0 + y[i * n + j])));
      }
    }
  }
  return std::sqrt(column * rmax / rmin) + adv + bolus;
}

double StratifiedSolver::stable_dt(std::span<const double> y, double cfl) {
  if (!(cfl > 0.0)) throw DomainError("stable_dt: cfl must be positive");
  const double dx = grid_.dx();
  double dt = cfl * dx / max_speed(y);
  if (kappa_ > 0.0) dt = std::min(dt, cfl * dx * dx / (2.0 * kappa_));
  return dt;
}

std::vector<double> flatten(const StratifiedState& s) {
  if (s.h.levels() != s.u.levels() || s.h.points() != s.u.points()) {
    throw DomainError("StratifiedState: h and u shapes differ");
  }
  std::vector<double> y(s.h.size() + s.u.size());
  std::copy(s.h.span().begin(), s.h.span().end(), y.begin());
  std::copy(s.u.span().begin(), s.u.span().end(), y.begin() + static_cast<std::ptrdiff_t>(s.h.size()));
  return y;
}

StratifiedState unflatten_stratified(std::span<const double> y, std::size_t n_r, std::size_t n_x, double t) {
  if (y.size() != 2 * n_r * n_x) throw DomainError("unflatten_stratified: size mismatch");
  StratifiedState s = StratifiedState::zero(n_r, n_x);
  s.t = t;
  std::copy(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(n_r * n_x), s.h.data());
  std::copy(y.begin() + static_cast<std::ptrdiff_t>(n_r * n_x), y.end(), s.u.data());
  return s;
}

StratifiedState stratified_rhs(const SpatialGrid& grid, const StratifiedState& s,
                               const StratifiedProfile& profile, double kappa) {
  StratifiedSolver solver(grid, profile, kappa);
  return solver.rhs(s);
}

StratifiedRun integrate(const SpatialGrid& grid, const StratifiedState& initial, const StratifiedProfile& profile,
                        double kappa, double T, const IntegrateOptions& options) {
  const std::size_t n = grid.size();
  const std::size_t nr = profile.size();
  if (initial.h.levels() != nr || initial.h.points() != n) {
    throw DomainError("integrate: initial state does not match the grids");
  }
  auto y = flatten(initial);
  require_finite(y, "initial stratified state");

  const auto min_depth = [&](std::span<const double> v) {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < nr * n; ++k) m = std::min(m, 1.0 + v[k]);
    return m;
  };
  if (min_depth(y) <= options.depth_floor) throw DomainError("integrate: initial depth below the floor");

  StratifiedSolver solver(grid, profile, kappa);
  const double limit = solver.stable_dt(y, options.cfl);
  if (options.dt > 0.0 && options.dt > limit * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "integrate: dt = " << options.dt << " exceeds the stability limit " << limit;
    throw DomainError(os.str());
  }
  const std::size_t steps = steps_for(T, options.dt > 0.0 ? options.dt : limit);
  StratifiedRun run;
  run.dt = steps == 0 ? 0.0 : T / static_cast<double>(steps);

  const auto hs_norm = [&](std::span<const double> v) {
    double sum = 0.0;
    for (std::size_t i = 0; i < nr; ++i) {
      const double a = solver.spectral().sobolev_norm(v.subspan(i * n, n), options.sobolev_s);
      const double b = solver.spectral().sobolev_norm(v.subspan((nr + i) * n, n), options.sobolev_s);
      sum += profile.levels.weight(i) * (a * a + b * b);
    }
    return std::sqrt(sum);
  };
  const double norm0 = hs_norm(y);
  const double ceiling = options.blowup_factor * (norm0 > 0.0 ? norm0 : 1.0);

  const auto record = [&](double t) {
    StratifiedDiagnostic d;
    d.t = t;
    d.min_depth = min_depth(y);
    d.hs_norm = hs_norm(y);
    d.mass.resize(nr);
    for (std::size_t i = 0; i < nr; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += y[i * n + j];
      d.mass[i] = s / static_cast<double>(n);
    }
    run.diagnostics.push_back(d);
    if (options.keep_trajectory) run.trajectory.push_back(unflatten_stratified(y, nr, n, t));
    return d.hs_norm;
  };

  std::vector<std::size_t> sampled;
  if (options.samples == 0 || options.samples >= steps) {
    for (std::size_t k = 0; k <= steps; ++k) sampled.push_back(k);
  } else {
    for (std::size_t i = 0; i <= options.samples; ++i) {
      const auto k = static_cast<std::size_t>(std::llround(static_cast<double>(i) * static_cast<double>(steps) /
                                                           static_cast<double>(options.samples)));
      if (sampled.empty() || sampled.back() != k) sampled.push_back(k);
    }
  }

  record(0.0);
  std::size_t next = 1;
  double t = 0.0;
  for (std::size_t k = 1; k <= steps; ++k) {
    try {
      solver.step(y, run.dt);
    } catch (const DomainError&) {
      const bool finite = std::all_of(y.begin(), y.end(), [](double v) { return std::isfinite(v); });
      run.status = finite ? RunStatus::DepthFloor : RunStatus::NonFinite;
      run.halt_time = t;
      break;
    }
    t = static_cast<double>(k) * run.dt;
    run.steps = k;
    if (!std::all_of(y.begin(), y.end(), [](double v) { return std::isfinite(v); })) {
      run.status = RunStatus::NonFinite;
      run.halt_time = t;
      break;
    }
    if (min_depth(y) <= options.depth_floor) {
      run.status = RunStatus::DepthFloor;
      run.halt_time = t;
      break;
    }
    if (next < sampled.size() && sampled[next] == k) {
      ++next;
      if (record(t) > ceiling) {
        run.status = RunStatus::BlowUp;
        run.halt_time = t;
        break;
      }
    }
  }
  if (run.status == RunStatus::Completed) run.halt_time = t;
  run.final_state = unflatten_stratified(y, nr, n, t);
  return run;
}

}  // namespace stratlab
