#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "stratlab/bilayer.hpp"
#include "stratlab/core/error.hpp"
#include "stratlab/oracles.hpp"

using namespace stratlab;
using std::numbers::pi;

namespace {

BilayerParams params(double kappa, double ubar = 0.1) {
  BilayerParams p;
  p.Ubar_s = ubar;
  p.Ubar_b = -ubar;
  p.kappa = kappa;
  return p;
}

std::array<LayerData, 4> smooth_data(double scale = 1.0) {
  return {LayerData{Profile::Sine, 0.05 * scale, 1.0, 0.0}, LayerData{Profile::Sine, 0.03 * scale, 2.0, 0.3},
          LayerData{Profile::Sine, 0.02 * scale, 1.0, 1.0}, LayerData{Profile::Sine, 0.01 * scale, 3.0, 2.0}};
}

double max_abs(const Field1D& f) {
  double m = 0.0;
  for (std::size_t j = 0; j < f.size(); ++j) m = std::max(m, std::abs(f[j]));
  return m;
}

double max_state_diff(const BilayerState& a, const BilayerState& b) {
  double m = 0.0;
  const auto fa = a.fields(), fb = b.fields();
  for (int f = 0; f < 4; ++f) {
    for (std::size_t j = 0; j < a.size(); ++j) m = std::max(m, std::abs((*fa[f])[j] - (*fb[f])[j]));
  }
  return m;
}

}  // namespace

TEST_CASE("parameter validation") {
  BilayerParams p = params(0.0);
  CHECK_NOTHROW(p.validate());
  p.Hbar_s = 0.6;
  CHECK_THROWS_AS(p.validate(), DomainError);
  p = params(0.0);
  p.kappa = 1.5;
  CHECK_THROWS_AS(p.check_physical(), DomainError);
  p = params(0.0);
  p.Ubar_s = 0.2;
  CHECK_THROWS_AS(p.validate(), DomainError);
}

TEST_CASE("rest state is an equilibrium") {
  const SpatialGrid g(2.0 * pi, 32);
  for (double kappa : {0.0, 0.1}) {
    const BilayerState rates = BilayerSolver(g, params(kappa)).rhs(BilayerState::zero(g.size()));
    for (const Field1D* f : rates.fields()) CHECK(max_abs(*f) == 0.0);
    const BilayerRun run = integrate(g, BilayerState::zero(g.size()), params(kappa), 1.0);
    CHECK(max_state_diff(run.final_state, BilayerState::zero(g.size())) == 0.0);
  }
}

TEST_CASE("hand-evaluated rates for a surface depth mode") {
  const SpatialGrid g(2.0 * pi, 32);
  BilayerParams p = params(0.0, 0.0);
  const double eps = 1e-3;
  BilayerState s = BilayerState::zero(g.size());
  s.H_s = Field1D::sample(g, [eps](double x) { return eps * std::sin(x); });
  const BilayerState r = rhs_nondiffusive(g, s, p);
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double x = g.x(j);
    CHECK(r.H_s[j] == doctest::Approx(0.0).epsilon(1e-15).scale(1.0));
    CHECK(r.U_s[j] == doctest::Approx(-eps * std::cos(x)).epsilon(1e-13).scale(eps));
    CHECK(r.U_b[j] == doctest::Approx(-p.rho_ratio() * eps * std::cos(x)).epsilon(1e-13).scale(eps));
  }
  CHECK_THROWS_AS(rhs_diffusive(g, s, p), DomainError);
}

TEST_CASE("diffusion acts as -kappa k^2 on a single mode") {
  const SpatialGrid g(2.0 * pi, 32);
  const double kappa = 0.07, a = 1e-3;
  BilayerState s = BilayerState::zero(g.size());
  s.H_b = Field1D::sample(g, [a](double x) { return a * std::sin(3.0 * x); });
  BilayerParams p = params(kappa, 0.0);
  p.kappa = 0.0;
  const BilayerState r0 = rhs_nondiffusive(g, s, p);
  p.kappa = kappa;
  const BilayerState r1 = rhs_diffusive(g, s, p);
  for (std::size_t j = 0; j < g.size(); ++j) {
    CHECK(r1.H_b[j] - r0.H_b[j] == doctest::Approx(-kappa * 9.0 * s.H_b[j]).epsilon(1e-12).scale(1e-6));
  }
}

TEST_CASE("diffusive rates approach the non-diffusive ones linearly in kappa") {
  const SpatialGrid g(2.0 * pi, 64);
  const BilayerState s = make_bilayer_state(g, smooth_data());
  BilayerParams p = params(0.0);
  const BilayerState r0 = rhs_nondiffusive(g, s, p);
  double prev = 0.0;
  for (double kappa : {1e-2, 1e-3, 1e-4}) {
    p.kappa = kappa;
    const double d = max_state_diff(rhs_diffusive(g, s, p), r0);
    if (prev > 0.0) CHECK(prev / d == doctest::Approx(10.0).epsilon(1e-3));
    prev = d;
  }
}

TEST_CASE("total velocity formula") {
  const SpatialGrid g(2.0 * pi, 32);
  const double a = 0.1, kappa = 0.05;
  BilayerState s = BilayerState::zero(g.size());
  s.H_s = Field1D::sample(g, [a](double x) { return a * std::sin(x); });
  s.U_s = Field1D::sample(g, [](double x) { return 0.01 * std::cos(2.0 * x); });
  s.U_b = Field1D::sample(g, [](double x) { return 0.02 * std::sin(x); });
  const BilayerParams p = params(kappa);
  const auto [Vs, Vb] = total_velocity(g, s, p);
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double x = g.x(j);
    CHECK(Vs[j] == doctest::Approx(s.U_s[j] - kappa * a * std::cos(x) / (p.Hbar_s + a * std::sin(x))).epsilon(1e-13));
    CHECK(Vb[j] == doctest::Approx(s.U_b[j]).epsilon(1e-15));
  }
  const auto [Ws, Wb] = total_velocity(g, s, params(0.0));
  CHECK(Ws == s.U_s);
  CHECK(Wb == s.U_b);
}

TEST_CASE("step rejects steps above the stability limit") {
  const SpatialGrid g(2.0 * pi, 64);
  const BilayerState s = make_bilayer_state(g, smooth_data());
  CHECK_THROWS_AS(step(g, s, params(0.1), 1.0), DomainError);
  const BilayerState t = step(g, s, params(0.1), 1e-3);
  CHECK(t.t == doctest::Approx(1e-3));
}

TEST_CASE("layer means are conserved") {
  const SpatialGrid g(2.0 * pi, 128);
  for (double kappa : {0.0, 0.01, 0.1}) {
    IntegrateOptions o;
    o.samples = 10;
    const BilayerRun run = integrate(g, make_bilayer_state(g, smooth_data()), params(kappa), 1.0, o);
    REQUIRE(run.status == RunStatus::Completed);
    for (const auto& d : run.diagnostics) {
      CHECK(std::abs(d.mass_s - run.diagnostics.front().mass_s) <= 1e-12);
      CHECK(std::abs(d.mass_b - run.diagnostics.front().mass_b) <= 1e-12);
      if (kappa == 0.0) {
        CHECK(std::abs(d.mom_s - run.diagnostics.front().mom_s) <= 1e-12);
        CHECK(std::abs(d.mom_b - run.diagnostics.front().mom_b) <= 1e-12);
      }
    }
  }
}

TEST_CASE("small data follow the linearised characteristic solution") {
  const SpatialGrid g(2.0 * pi, 32);
  const BilayerParams p = params(0.0);
  double prev = 0.0;
  for (double amp : {1e-2, 5e-3}) {
    const BilayerState s0 = make_bilayer_state(g, smooth_data(amp / 0.05));
    IntegrateOptions o;
    o.dt = 0.01;
    o.samples = 1;
    const BilayerRun run = integrate(g, s0, p, 0.5, o);
    const BilayerState lin = oracles::linear_bilayer_solution(g, p, s0, 0.5);
    const double err = max_state_diff(run.final_state, lin);
    CHECK(err < 10.0 * amp * amp);
    if (prev > 0.0) CHECK(prev / err == doctest::Approx(4.0).epsilon(0.15));
    prev = err;
  }
}

TEST_CASE("single-mode oscillation frequencies are k times the characteristic speeds") {
  // For a mode exp(ikx) each eigencomponent rotates as exp(-i k lambda t).
  const SpatialGrid g(2.0 * pi, 16);
  const BilayerParams p = params(0.0);
  BilayerState s0 = BilayerState::zero(g.size());
  s0.H_s = Field1D::sample(g, [](double x) { return 1e-8 * std::cos(x); });
  const double T = 1e-2;
  const BilayerState lin = oracles::linear_bilayer_solution(g, p, s0, T);
  BilayerSolver solver(g, p);
  auto y = flatten(s0);
  for (int k = 0; k < 100; ++k) solver.step(y, T / 100.0);
  CHECK(max_state_diff(unflatten(y, T), lin) < 1e-14);
}

TEST_CASE("rk4 self-convergence is fourth order") {
  const SpatialGrid g(2.0 * pi, 64);
  const BilayerState s0 = make_bilayer_state(g, smooth_data());
  std::vector<BilayerState> fin;
  for (double dt : {0.02, 0.01, 0.005}) {
    IntegrateOptions o;
    o.dt = dt;
    o.samples = 1;
    fin.push_back(integrate(g, s0, params(0.01), 1.0, o).final_state);
  }
  const double ratio = max_state_diff(fin[0], fin[1]) / max_state_diff(fin[1], fin[2]);
  CHECK(ratio > 8.0);
  CHECK(ratio < 32.0);
}

TEST_CASE("total-velocity residual shrinks at fourth order") {
  const SpatialGrid g(2.0 * pi, 64);
  const BilayerState s0 = make_bilayer_state(g, smooth_data());
  std::vector<double> res;
  for (double dt : {0.02, 0.01, 0.005}) {
    IntegrateOptions o;
    o.dt = dt;
    o.samples = 0;
    const BilayerRun run = integrate(g, s0, params(0.05), 1.0, o);
    REQUIRE(run.status == RunStatus::Completed);
    const std::size_t m = run.steps / 2;
    res.push_back(bd_residual(g, params(0.05), std::span(run.trajectory).subspan(m - 2, 5), run.dt).l2);
  }
  CHECK(res.back() < 1e-6);
  CHECK(std::log2(res[0] / res[1]) == doctest::Approx(4.0).epsilon(0.075));
  CHECK(std::log2(res[1] / res[2]) == doctest::Approx(4.0).epsilon(0.075));
}

TEST_CASE("Galilean covariance") {
  const double T = 0.5;
  const SpatialGrid g(2.0 * pi, 64);
  const BilayerState s0 = make_bilayer_state(g, smooth_data());
  IntegrateOptions o;
  o.dt = 0.005;
  o.samples = 1;
  const BilayerRun a = integrate(g, s0, params(0.02), T, o);
  // A shift of the mean flow by c translates the solution by c T, here a whole number of cells.
  const std::size_t cells = 4;
  const double c = static_cast<double>(cells) * g.dx() / T;
  BilayerParams shifted = params(0.02);
  shifted.Ubar_s += c;
  shifted.Ubar_b += c;
  const BilayerRun b = integrate(g, s0, shifted, T, o);
  BilayerState back = b.final_state;
  for (Field1D* f : back.fields()) {
    Field1D rolled(f->size());
    for (std::size_t j = 0; j < f->size(); ++j) rolled[j] = (*f)[(j + cells) % f->size()];
    *f = rolled;
  }
  CHECK(max_state_diff(back, a.final_state) < 1e-8);
}

TEST_CASE("reflection symmetry") {
  const SpatialGrid g(2.0 * pi, 64);
  const BilayerState s0 = make_bilayer_state(g, smooth_data());
  const std::size_t n = g.size();
  const auto reflect = [n](const BilayerState& s, bool flip_u) {
    BilayerState r = s;
    auto fr = r.fields();
    const auto fs = s.fields();
    for (int f = 0; f < 4; ++f) {
      const double sign = (f >= 2 && flip_u) ? -1.0 : 1.0;
      for (std::size_t j = 0; j < n; ++j) (*fr[f])[j] = sign * (*fs[f])[(n - j) % n];
    }
    return r;
  };
  IntegrateOptions o;
  o.dt = 0.005;
  o.samples = 1;
  BilayerParams p = params(0.03);
  const BilayerRun a = integrate(g, s0, p, 0.5, o);
  BilayerParams q = p;
  q.Ubar_s = -p.Ubar_s;
  q.Ubar_b = -p.Ubar_b;
  const BilayerRun b = integrate(g, reflect(s0, true), q, 0.5, o);
  CHECK(max_state_diff(reflect(b.final_state, true), a.final_state) < 1e-10);
}

TEST_CASE("halting on depth loss and blow-up") {
  const SpatialGrid g(2.0 * pi, 32);
  BilayerState s = BilayerState::zero(g.size());
  s.H_s = Field1D::sample(g, [](double x) { return -0.5 * (1.0 + std::cos(x)) / 2.0 - 0.2; });
  CHECK_THROWS_AS(integrate(g, s, params(0.0), 1.0), DomainError);

  IntegrateOptions o;
  o.blowup_factor = 0.5;
  o.dt = 0.01;
  const BilayerRun run = integrate(g, make_bilayer_state(g, smooth_data()), params(0.0), 1.0, o);
  CHECK(run.status == RunStatus::BlowUp);
  CHECK(run.halt_time < 1.0);
}

TEST_CASE("hyperbolicity monitor") {
  const SpatialGrid g(2.0 * pi, 32);
  const BilayerState s0 = make_bilayer_state(g, smooth_data());
  CHECK(state_in_hyperbolic_set(params(0.0), s0, 0.1));
  IntegrateOptions o;
  o.sigma = 0.1;
  o.samples = 4;
  const BilayerRun run = integrate(g, s0, params(0.0), 0.2, o);
  CHECK(run.warnings.empty());
  for (const auto& d : run.diagnostics) CHECK(d.margin > 0.05);
  BilayerParams fast = params(0.0, 0.6);
  CHECK_THROWS_AS(integrate(g, s0, fast, 0.2, o), DomainError);
}

TEST_CASE("energy functional") {
  const SpatialGrid g(2.0 * pi, 32);
  const BilayerParams p = params(0.0);
  const BilayerState base = make_bilayer_state(g, smooth_data());
  const BilayerState zero = BilayerState::zero(g.size());
  CHECK(energy_functional(g, p, base, zero, zero).E == 0.0);

  BilayerState dU = zero;
  const std::size_t j = 5;
  dU.H_s[j] = 1.0;
  dU.U_b[j] = -0.5;
  const EnergySample e = energy_functional(g, p, base, dU, zero);
  const Symmetrizer s = symmetrizer(state_point(p, base, j));
  Eigen::Vector4d v(1.0, 0.0, 0.0, -0.5);
  CHECK(e.E == doctest::Approx(g.dx() * v.dot(s.S * v)).epsilon(1e-12));
  CHECK(e.c2 > 0.0);
  CHECK(e.c2 * e.l2 * e.l2 <= e.E * (1.0 + 1e-12));
}

TEST_CASE("trajectory csv round trip") {
  const SpatialGrid g(2.0 * pi, 16);
  const BilayerState s = make_bilayer_state(g, smooth_data());
  const auto dir = std::filesystem::temp_directory_path();
  const std::string path = (dir / "stratlab_bilayer_state.csv").string();
  write_bilayer_trajectory_csv(path, g, std::vector<BilayerState>{s});
  // The trajectory file carries a t column; the initial-data reader takes x,H_s,H_b,U_s,U_b.
  const BilayerState back = read_bilayer_csv(path, g);
  CHECK(max_state_diff(back, s) == 0.0);
  std::filesystem::remove(path);
}
