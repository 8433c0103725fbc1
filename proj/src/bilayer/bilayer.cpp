#include "stratlab/bilayer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "stratlab/core/error.hpp"
#include "stratlab/core/rk4.hpp"
#include "stratlab/kernels/kernels.hpp"

namespace stratlab {

void BilayerParams::check_physical() const {
  if (!(rho_s > 0.0) || !(rho_b > 0.0) || !std::isfinite(rho_s) || !std::isfinite(rho_b)) {
    throw DomainError("BilayerParams: densities must be positive and finite");
  }
  if (!(Hbar_s > 0.0) || !(Hbar_b > 0.0) || !std::isfinite(Hbar_s) || !std::isfinite(Hbar_b)) {
    throw DomainError("BilayerParams: reference depths must be positive and finite");
  }
  if (!std::isfinite(Ubar_s) || !std::isfinite(Ubar_b)) {
    throw DomainError("BilayerParams: reference velocities must be finite");
  }
  if (!(kappa >= 0.0 && kappa <= 1.0)) throw DomainError("BilayerParams: kappa must lie in [0,1]");
}

void BilayerParams::validate() const {
  check_physical();
  if (std::abs(Hbar_s + Hbar_b - 1.0) > 1e-14) {
    throw DomainError("BilayerParams: Hbar_s + Hbar_b must equal 1");
  }
  if (std::abs(Ubar_s + Ubar_b) > 1e-14) throw DomainError("BilayerParams: Ubar_s + Ubar_b must vanish");
}

BilayerState BilayerState::zero(std::size_t n) {
  BilayerState s;
  s.H_s = Field1D(n);
  s.H_b = Field1D(n);
  s.U_s = Field1D(n);
  s.U_b = Field1D(n);
  return s;
}

StatePoint state_point(const BilayerParams& p, const BilayerState& s, std::size_t j) {
  return {p.rho_s, p.rho_b, p.Hbar_s + s.H_s[j], p.Hbar_b + s.H_b[j],
          p.Ubar_s + s.U_s[j], p.Ubar_b + s.U_b[j]};
}

std::vector<double> flatten(const BilayerState& s) {
  const std::size_t n = s.size();
  std::vector<double> y(4 * n);
  std::size_t f = 0;
  for (const Field1D* field : s.fields()) {
    if (field->size() != n) throw DomainError("BilayerState: field sizes differ");
    std::copy(field->values().begin(), field->values().end(), y.begin() + static_cast<std::ptrdiff_t>(f * n));
    ++f;
  }
  return y;
}

BilayerState unflatten(std::span<const double> y, double t) {
  if (y.size() % 4 != 0) throw DomainError("unflatten: size is not a multiple of 4");
  const std::size_t n = y.size() / 4;
  BilayerState s;
  s.t = t;
  std::size_t f = 0;
  for (Field1D* field : s.fields()) {
    *field = Field1D(std::vector<double>(y.begin() + static_cast<std::ptrdiff_t>(f * n),
                                         y.begin() + static_cast<std::ptrdiff_t>((f + 1) * n)));
    ++f;
  }
  return s;
}

struct BilayerSolver::Work {
  explicit Work(std::size_t n, std::size_t m)
      : deriv(4 * n), flux(n), adv(n), tmp(n), hat(4, std::vector<Complex>(m)), c(m), c2(m), rk(4 * n) {}
  std::vector<double> deriv;
  std::vector<double> flux, adv, tmp;
  std::vector<std::vector<Complex>> hat;
  std::vector<Complex> c, c2;
  Rk4Stepper rk;
  // integrating-factor stages
  std::vector<double> k1, k2, k3, k4, a, ey;
};

BilayerSolver::BilayerSolver(const SpatialGrid& grid, const BilayerParams& params)
    : grid_(grid), params_(params), ops_(grid), work_(std::make_unique<Work>(grid.size(), grid.size() / 2 + 1)) {
  params_.check_physical();
}

BilayerSolver::~BilayerSolver() = default;
BilayerSolver::BilayerSolver(BilayerSolver&&) noexcept = default;
BilayerSolver& BilayerSolver::operator=(BilayerSolver&&) noexcept = default;

namespace {

void require_depths(std::span<const double> y, std::size_t n, const BilayerParams& p) {
  for (std::size_t l = 0; l < 2; ++l) {
    const double hbar = l == 0 ? p.Hbar_s : p.Hbar_b;
    for (std::size_t j = 0; j < n; ++j) {
      const double depth = hbar + y[l * n + j];
      if (!(depth > 0.0)) {
        std::ostringstream os;
        os << "bilayer: non-positive " << (l == 0 ? "upper" : "lower") << " layer depth " << depth
           << " at grid index " << j;
        throw DomainError(os.str());
      }
    }
  }
}

}  // namespace

void BilayerSolver::evaluate(std::span<const double> y, std::span<double> dydt, bool with_diffusion) {
  const std::size_t n = grid_.size();
  const std::size_t m = ops_.modes();
  if (y.size() != 4 * n || dydt.size() != 4 * n) throw DomainError("bilayer rhs: size mismatch");
  require_finite(y, "bilayer state");
  require_depths(y, n, params_);
  Work& w = *work_;
  const auto& kt = kernels::active();

  for (std::size_t f = 0; f < 4; ++f) {
    ops_.forward(y.subspan(f * n, n), w.hat[f]);
    std::copy(w.hat[f].begin(), w.hat[f].end(), w.c.begin());
    ops_.apply_derivative(w.c, 1);
    ops_.inverse(w.c, std::span<double>(w.deriv).subspan(f * n, n));
  }

  const double hbar[2] = {params_.Hbar_s, params_.Hbar_b};
  const double ubar[2] = {params_.Ubar_s, params_.Ubar_b};
  // Pressure weights on (d_x H_s, d_x H_b) for each layer's velocity.
  const double press[2][2] = {{1.0, 1.0}, {params_.rho_ratio(), 1.0}};
  const double kappa = params_.kappa;

  for (std::size_t l = 0; l < 2; ++l) {
    const double* h = y.data() + l * n;
    const double* u = y.data() + (2 + l) * n;
    const double* dh = w.deriv.data() + l * n;
    const double* du = w.deriv.data() + (2 + l) * n;

    kt.mass_flux(w.flux.data(), h, u, hbar[l], ubar[l], n);
    ops_.forward(w.flux, w.c);
    for (std::size_t k = 0; k < m; ++k) {
      const double xi = ops_.wavenumber(k);
      Complex rate = -Complex(0.0, xi) * w.c[k];
      if (with_diffusion && kappa != 0.0) rate -= (kappa * xi * xi) * w.hat[l][k];
      w.c[k] = rate;
    }
    w.c[m - 1] = 0.0;
    ops_.dealias(std::span<Complex>(w.c));
    ops_.inverse(w.c, dydt.subspan(l * n, n));

    kt.advection(w.adv.data(), u, du, h, dh, hbar[l], ubar[l], kappa, n);
    ops_.forward(w.adv, w.c);
    for (std::size_t k = 0; k < m; ++k) {
      const Complex ik(0.0, ops_.wavenumber(k));
      const Complex p = press[l][0] * w.hat[0][k] + press[l][1] * w.hat[1][k];
      w.c[k] = -w.c[k] - ik * p;
    }
    w.c[m - 1] = 0.0;
    ops_.dealias(std::span<Complex>(w.c));
    ops_.inverse(w.c, dydt.subspan((2 + l) * n, n));
  }
}

void BilayerSolver::rhs(std::span<const double> y, std::span<double> dydt) { evaluate(y, dydt, true); }

void BilayerSolver::rhs_transport(std::span<const double> y, std::span<double> dydt) {
  evaluate(y, dydt, false);
}

BilayerState BilayerSolver::rhs(const BilayerState& s) {
  if (s.size() != grid_.size()) throw DomainError("bilayer rhs: grid mismatch");
  const auto y = flatten(s);
  std::vector<double> d(y.size());
  rhs(y, d);
  return unflatten(d, s.t);
}

void BilayerSolver::step(std::span<double> y, double dt, bool integrating_factor) {
  const std::size_t n = grid_.size();
  if (!integrating_factor || params_.kappa == 0.0) {
    work_->rk.step([this](double, std::span<const double> v, std::span<double> d) { rhs(v, d); }, 0.0, y, dt);
    return;
  }
  // Lawson RK4 with the heat semigroup acting on the two thickness fields.
  Work& w = *work_;
  for (auto* v : {&w.k1, &w.k2, &w.k3, &w.k4, &w.a, &w.ey}) v->assign(4 * n, 0.0);
  const auto heat = [&](std::span<double> v, double tau) {
    for (std::size_t l = 0; l < 2; ++l) {
      auto part = v.subspan(l * n, n);
      ops_.forward(part, w.c2);
      ops_.apply_heat(w.c2, params_.kappa * tau);
      ops_.inverse(w.c2, part);
    }
  };
  const auto& kt = kernels::active();
  const std::size_t N = 4 * n;

  rhs_transport(y, w.k1);
  kt.lincomb(w.a.data(), y.data(), 0.5 * dt, w.k1.data(), N);
  heat(w.a, 0.5 * dt);
  rhs_transport(w.a, w.k2);

  std::copy(y.begin(), y.end(), w.ey.begin());
  heat(w.ey, 0.5 * dt);  // E_half y
  kt.lincomb(w.a.data(), w.ey.data(), 0.5 * dt, w.k2.data(), N);
  rhs_transport(w.a, w.k3);

  heat(w.ey, 0.5 * dt);  // E_full y
  std::vector<double> ek3(w.k3);
  heat(ek3, 0.5 * dt);
  kt.lincomb(w.a.data(), w.ey.data(), dt, ek3.data(), N);
  rhs_transport(w.a, w.k4);

  heat(w.k1, dt);
  for (std::size_t i = 0; i < N; ++i) w.k2[i] = w.k2[i] + w.k3[i];
  heat(w.k2, 0.5 * dt);
  const double c = dt / 6.0;
  for (std::size_t i = 0; i < N; ++i) {
    double s = w.k1[i] + 2.0 * w.k2[i];
    s = s + w.k4[i];
    y[i] = w.ey[i] + c * s;
  }
}

double BilayerSolver::max_speed(std::span<const double> y) {
  const std::size_t n = grid_.size();
  if (y.size() != 4 * n) throw DomainError("max_speed: size mismatch");
  double bolus = 0.0;
  if (params_.kappa > 0.0) {
    const double hbar[2] = {params_.Hbar_s, params_.Hbar_b};
    for (std::size_t l = 0; l < 2; ++l) {
      ops_.derivative(y.subspan(l * n, n), 1, work_->tmp);
      for (std::size_t j = 0; j < n; ++j) {
        bolus = std::max(bolus, std::abs(params_.kappa * work_->tmp[j] / (hbar[l] + y[l * n + j])));
      }
    }
  }
  double speed = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const StatePoint p{params_.rho_s, params_.rho_b, params_.Hbar_s + y[j], params_.Hbar_b + y[n + j],
                       params_.Ubar_s + y[2 * n + j], params_.Ubar_b + y[3 * n + j]};
    for (const auto& z : quartic_roots(characteristic_polynomial(p))) {
      speed = std::max(speed, std::abs(z.real()) + std::abs(z.imag()));
    }
  }
  return speed + bolus;
}

double BilayerSolver::stable_dt(std::span<const double> y, double cfl) {
  if (!(cfl > 0.0)) throw DomainError("stable_dt: cfl must be positive");
  const double dx = grid_.dx();
  double dt = cfl * dx / max_speed(y);
  if (params_.kappa > 0.0) dt = std::min(dt, cfl * dx * dx / (2.0 * params_.kappa));
  return dt;
}

BilayerState rhs_nondiffusive(const SpatialGrid& grid, const BilayerState& s, const BilayerParams& params) {
  if (params.kappa != 0.0) throw DomainError("rhs_nondiffusive: kappa must be 0");
  BilayerSolver solver(grid, params);
  return solver.rhs(s);
}

BilayerState rhs_diffusive(const SpatialGrid& grid, const BilayerState& s, const BilayerParams& params) {
  if (!(params.kappa > 0.0)) throw DomainError("rhs_diffusive: kappa must be positive");
  BilayerSolver solver(grid, params);
  return solver.rhs(s);
}

std::pair<Field1D, Field1D> total_velocity(const SpatialGrid& grid, const BilayerState& s,
                                           const BilayerParams& params) {
  const std::size_t n = grid.size();
  if (s.size() != n) throw DomainError("total_velocity: grid mismatch");
  require_depths(flatten(s), n, params);
  if (params.kappa == 0.0) return {s.U_s, s.U_b};
  SpectralOps ops(grid);
  Field1D v[2] = {s.U_s, s.U_b};
  const Field1D* h[2] = {&s.H_s, &s.H_b};
  const double hbar[2] = {params.Hbar_s, params.Hbar_b};
  Field1D dh(n);
  for (std::size_t l = 0; l < 2; ++l) {
    ops.derivative(h[l]->span(), 1, dh.span());
    for (std::size_t j = 0; j < n; ++j) v[l][j] -= params.kappa * dh[j] / (hbar[l] + (*h[l])[j]);
  }
  return {std::move(v[0]), std::move(v[1])};
}

BilayerState step(const SpatialGrid& grid, const BilayerState& s, const BilayerParams& params, double dt) {
  BilayerSolver solver(grid, params);
  auto y = flatten(s);
  if (y.size() != 4 * grid.size()) throw DomainError("step: grid mismatch");
  const double limit = solver.stable_dt(y, 0.4);
  if (!(dt > 0.0) || dt > limit * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "step: dt = " << dt << " violates the stability limit " << limit;
    throw DomainError(os.str());
  }
  solver.step(y, dt);
  require_finite(y, "bilayer state after step");
  return unflatten(y, s.t + dt);
}

std::string to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Completed: return "completed";
    case RunStatus::BlowUp: return "blow-up";
    case RunStatus::DepthFloor: return "depth-floor";
    case RunStatus::NonFinite: return "non-finite";
  }
  return "unknown";
}

double hyperbolic_margin(const BilayerParams& params, const BilayerState& s) {
  double margin = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < s.size(); ++j) {
    const StatePoint p = state_point(params, s, j);
    const CriticalFroude fr = critical_froude(p.depth_ratio(), p.rho_ratio());
    margin = std::min(margin, fr.minus - p.scaled_shear());
  }
  return margin;
}

bool state_in_hyperbolic_set(const BilayerParams& params, const BilayerState& s, double sigma) {
  for (std::size_t j = 0; j < s.size(); ++j) {
    if (!in_hyperbolic_set(state_point(params, s, j), sigma)) return false;
  }
  return true;
}

namespace {

std::vector<std::size_t> sample_steps(std::size_t steps, std::size_t samples) {
  std::vector<std::size_t> out;
  if (samples == 0 || samples >= steps) {
    for (std::size_t k = 0; k <= steps; ++k) out.push_back(k);
    return out;
  }
  for (std::size_t i = 0; i <= samples; ++i) {
    const auto k = static_cast<std::size_t>(
        std::llround(static_cast<double>(i) * static_cast<double>(steps) / static_cast<double>(samples)));
    if (out.empty() || out.back() != k) out.push_back(k);
  }
  return out;
}

double min_depth(std::span<const double> y, std::size_t n, const BilayerParams& p) {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < n; ++j) {
    m = std::min({m, p.Hbar_s + y[j], p.Hbar_b + y[n + j]});
  }
  return m;
}

bool all_finite(std::span<const double> y) {
  return std::all_of(y.begin(), y.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace

BilayerRun integrate(const SpatialGrid& grid, const BilayerState& initial, const BilayerParams& params,
                     double T, const IntegrateOptions& options) {
  params.check_physical();
  const std::size_t n = grid.size();
  if (initial.size() != n) throw DomainError("integrate: initial state does not match the grid");
  auto y = flatten(initial);
  require_finite(y, "initial bilayer state");
  if (min_depth(y, n, params) <= options.depth_floor) {
    throw DomainError("integrate: initial depth below the positivity floor");
  }
  if (options.sigma > 0.0 && !state_in_hyperbolic_set(params, initial, options.sigma)) {
    throw DomainError("integrate: initial state is not in the hyperbolic set p^sigma");
  }

  BilayerSolver solver(grid, params);
  const double limit = solver.stable_dt(y, options.cfl);
  if (options.dt > 0.0 && options.dt > limit * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "integrate: dt = " << options.dt << " exceeds the stability limit " << limit;
    throw DomainError(os.str());
  }
  const std::size_t steps = steps_for(T, options.dt > 0.0 ? options.dt : limit);

  BilayerRun run;
  run.dt = steps == 0 ? 0.0 : T / static_cast<double>(steps);
  const auto sampled = sample_steps(steps, options.samples);

  const double s_idx = options.sobolev_s;
  const auto hs_norm = [&](std::span<const double> v) {
    double sum = 0.0;
    for (std::size_t f = 0; f < 4; ++f) {
      const double nf = solver.spectral().sobolev_norm(v.subspan(f * n, n), s_idx);
      sum += nf * nf;
    }
    return std::sqrt(sum);
  };
  const double norm0 = hs_norm(y);
  const double ceiling = options.blowup_factor * (norm0 > 0.0 ? norm0 : 1.0);

  const auto record = [&](double t) {
    BilayerState s = unflatten(y, t);
    BilayerDiagnostic d;
    d.t = t;
    d.mass_s = s.H_s.mean();
    d.mass_b = s.H_b.mean();
    d.mom_s = s.U_s.mean();
    d.mom_b = s.U_b.mean();
    d.hs_norm = hs_norm(y);
    d.min_depth = min_depth(y, n, params);
    d.margin = std::numeric_limits<double>::quiet_NaN();
    if (options.sigma > 0.0) {
      d.margin = hyperbolic_margin(params, s);
      if (!state_in_hyperbolic_set(params, s, options.sigma / 2.0)) {
        std::ostringstream os;
        os << "t = " << t << ": state left the hyperbolic set p^(sigma/2)";
        run.warnings.push_back(os.str());
      }
    }
    run.diagnostics.push_back(d);
    if (options.keep_trajectory) run.trajectory.push_back(s);
    return d;
  };

  record(0.0);
  std::size_t next = 1;
  double t = 0.0;
  for (std::size_t k = 1; k <= steps; ++k) {
    try {
      solver.step(y, run.dt, options.integrating_factor);
    } catch (const DomainError&) {
      run.status = all_finite(y) ? RunStatus::DepthFloor : RunStatus::NonFinite;
      run.halt_time = t;
      break;
    }
    t = static_cast<double>(k) * run.dt;
    run.steps = k;
    if (!all_finite(y)) {
      run.status = RunStatus::NonFinite;
      run.halt_time = t;
      break;
    }
    if (min_depth(y, n, params) <= options.depth_floor) {
      run.status = RunStatus::DepthFloor;
      run.halt_time = t;
      break;
    }
    if (next < sampled.size() && sampled[next] == k) {
      ++next;
      if (record(t).hs_norm > ceiling) {
        run.status = RunStatus::BlowUp;
        run.halt_time = t;
        break;
      }
    }
  }
  if (run.status == RunStatus::Completed) run.halt_time = t;
  run.final_state = unflatten(y, t);
  return run;
}

}  // namespace stratlab
