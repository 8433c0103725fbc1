#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include "stratlab/core/error.hpp"
#include "stratlab/oracles.hpp"
#include "stratlab/stratified.hpp"

using namespace stratlab;
using std::numbers::pi;

namespace {

BilayerParams params(double kappa) {
  BilayerParams p;
  p.Ubar_s = 0.1;
  p.Ubar_b = -0.1;
  p.kappa = kappa;
  return p;
}

BilayerState smooth_state(const SpatialGrid& g) {
  return make_bilayer_state(g, {LayerData{Profile::Sine, 0.05, 1.0, 0.0}, LayerData{Profile::Sine, 0.03, 1.0, 0.3},
                                LayerData{Profile::Sine, 0.02, 1.0, 1.0}, LayerData{Profile::Sine, 0.01, 2.0, 2.0}});
}

Field2D random_field(std::size_t nr, std::size_t nx, std::mt19937_64& rng, double amp) {
  std::uniform_real_distribution<double> u(-amp, amp);
  Field2D f(nr, nx);
  for (std::size_t i = 0; i < nr; ++i) {
    for (std::size_t j = 0; j < nx; ++j) f(i, j) = u(rng);
  }
  return f;
}

StratifiedProfile random_profile(const LevelGrid& levels, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> lr(std::log(0.2), std::log(5.0));
  StratifiedProfile p;
  p.levels = levels;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    p.rho.push_back(std::exp(lr(rng)));
    p.ubar.push_back(0.0);
  }
  return p;
}

double max_diff(const Field2D& a, const Field2D& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a.span()[k] - b.span()[k]));
  return m;
}

double max_diff(const BilayerState& a, const BilayerState& b) {
  double m = 0.0;
  const auto fa = a.fields(), fb = b.fields();
  for (int f = 0; f < 4; ++f) {
    for (std::size_t j = 0; j < a.size(); ++j) m = std::max(m, std::abs((*fa[f])[j] - (*fb[f])[j]));
  }
  return m;
}

}  // namespace

TEST_CASE("profile validation") {
  StratifiedProfile p;
  p.levels = LevelGrid::uniform(3);
  p.rho = {1.0, 0.5, 0.25};
  p.ubar = {0.0, 0.0, 0.0};
  CHECK_NOTHROW(p.validate());
  CHECK(p.bound() == 4.0);
  p.rho[1] = -1.0;
  CHECK_THROWS_AS(p.validate(), DomainError);
  p.rho = {1.0, 0.5};
  CHECK_THROWS_AS(p.validate(), DomainError);
}

TEST_CASE("montgomery matches the literal double sum") {
  std::mt19937_64 rng(7);
  for (std::size_t nr : {1u, 2u, 5u, 17u}) {
    const LevelGrid levels = LevelGrid::with_interface(-0.3, nr, nr + 1);
    const StratifiedProfile prof = random_profile(levels, rng);
    const Field2D h = random_field(levels.size(), 8, rng, 0.5);
    const Field2D fast = montgomery(prof, h);
    const Field2D slow = oracles::montgomery_naive(prof, h, false);
    CHECK(max_diff(fast, slow) <= 1e-13);
  }
}

TEST_CASE("homogeneous fluid feels the total depth") {
  const LevelGrid levels = LevelGrid::uniform(6);
  StratifiedProfile prof;
  prof.levels = levels;
  prof.rho.assign(6, 1.3);
  prof.ubar.assign(6, 0.0);
  std::mt19937_64 rng(3);
  const Field2D h = random_field(6, 4, rng, 0.5);
  const Field2D psi = montgomery(prof, h);
  for (std::size_t j = 0; j < 4; ++j) {
    double total = 0.0;
    for (std::size_t i = 0; i < 6; ++i) total += levels.weight(i) * h(i, j);
    for (std::size_t i = 0; i < 6; ++i) CHECK(psi(i, j) == doctest::Approx(1.3 * total).epsilon(1e-14));
  }
}

TEST_CASE("homogeneous levels reduce to one shallow-water layer") {
  const SpatialGrid g(2.0 * pi, 32);
  const LevelGrid levels = LevelGrid::uniform(4);
  StratifiedProfile prof;
  prof.levels = levels;
  prof.rho.assign(4, 1.0);
  prof.ubar.assign(4, 0.2);
  StratifiedState s = StratifiedState::zero(4, g.size());
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < g.size(); ++j) {
      s.h(i, j) = 0.1 * std::sin(g.x(j));
      s.u(i, j) = 0.05 * std::cos(g.x(j));
    }
  }
  const StratifiedState r = stratified_rhs(g, s, prof, 0.0);
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double x = g.x(j), h = 0.1 * std::sin(x), u = 0.2 + 0.05 * std::cos(x);
    const double hx = 0.1 * std::cos(x), ux = -0.05 * std::sin(x);
    for (std::size_t i = 0; i < 4; ++i) {
      CHECK(r.h(i, j) == doctest::Approx(-(u * hx + (1.0 + h) * ux)).epsilon(1e-12).scale(1e-3));
      CHECK(r.u(i, j) == doctest::Approx(-(u * ux + hx)).epsilon(1e-12).scale(1e-3));
    }
  }
}

TEST_CASE("embedding needs an edge at the interface") {
  const SpatialGrid g(2.0 * pi, 16);
  const BilayerState s = smooth_state(g);
  CHECK_NOTHROW(embed_bilayer(s, params(0.0), LevelGrid::with_interface(-0.5, 3, 4)));
  CHECK_THROWS_AS(embed_bilayer(s, params(0.0), LevelGrid::uniform(3)), DomainError);
}

TEST_CASE("layer averages invert the embedding") {
  const SpatialGrid g(2.0 * pi, 16);
  const BilayerState s = smooth_state(g);
  const LevelGrid levels = LevelGrid::with_interface(-0.5, 5, 3);
  const auto [prof, emb] = embed_bilayer(s, params(0.0), levels);
  CHECK(prof.size() == 8);
  CHECK(max_diff(layer_average(emb, params(0.0), levels), s) <= 1e-15);
}

TEST_CASE("embedded rates equal the two-layer rates") {
  const SpatialGrid g(2.0 * pi, 64);
  const BilayerState s = smooth_state(g);
  for (double kappa : {0.0, 0.05}) {
    for (auto levels : {LevelGrid::with_interface(-0.5, 1, 1), LevelGrid::with_interface(-0.5, 4, 7)}) {
      const auto [prof, emb] = embed_bilayer(s, params(kappa), levels);
      const StratifiedState r = stratified_rhs(g, emb, prof, kappa);
      BilayerSolver solver(g, params(kappa));
      const BilayerState rb = solver.rhs(s);
      CHECK(max_diff(layer_average(r, params(kappa), levels), rb) <= 1e-13);
      // Every level of one layer carries identical rates.
      const auto [unused, re] = embed_bilayer(layer_average(r, params(kappa), levels), params(kappa), levels);
      CHECK(max_diff(re.h, r.h) <= 1e-13);
      CHECK(max_diff(re.u, r.u) <= 1e-13);
    }
  }
}

TEST_CASE("embedded trajectories follow the two-layer trajectory") {
  const SpatialGrid g(2.0 * pi, 64);
  const BilayerState s = smooth_state(g);
  const LevelGrid levels = LevelGrid::with_interface(-0.5, 3, 5);
  const auto [prof, emb] = embed_bilayer(s, params(0.02), levels);
  IntegrateOptions o;
  o.dt = 0.005;
  o.samples = 1;
  const StratifiedRun sr = integrate(g, emb, prof, 0.02, 0.5, o);
  const BilayerRun br = integrate(g, s, params(0.02), 0.5, o);
  REQUIRE(sr.status == RunStatus::Completed);
  CHECK(max_diff(layer_average(sr.final_state, params(0.02), levels), br.final_state) <= 1e-12);
}

TEST_CASE("per-level mass is conserved") {
  const SpatialGrid g(2.0 * pi, 64);
  const auto [prof, emb] = embed_bilayer(smooth_state(g), params(0.05), LevelGrid::with_interface(-0.5, 3, 3));
  IntegrateOptions o;
  o.samples = 5;
  const StratifiedRun run = integrate(g, emb, prof, 0.05, 0.5, o);
  REQUIRE(run.status == RunStatus::Completed);
  for (const auto& d : run.diagnostics) {
    for (std::size_t i = 0; i < d.mass.size(); ++i) {
      CHECK(std::abs(d.mass[i] - run.diagnostics.front().mass[i]) <= 1e-13);
    }
  }
}

TEST_CASE("pressure sign fault changes the rates") {
  const SpatialGrid g(2.0 * pi, 32);
  const auto [prof, emb] = embed_bilayer(smooth_state(g), params(0.0), LevelGrid::with_interface(-0.5, 2, 2));
  StratifiedSolver a(g, prof, 0.0), b(g, prof, 0.0);
  b.inject_pressure_sign_fault(true);
  CHECK(max_diff(a.rhs(emb).u, b.rhs(emb).u) > 1e-3);
  CHECK(max_diff(a.rhs(emb).h, b.rhs(emb).h) == 0.0);
}

TEST_CASE("smoothed pycnocline distances") {
  PycnoclineSpec spec;
  spec.params = params(0.0);
  spec.epsilon = 0.01;
  const LevelGrid levels = LevelGrid::graded(-0.5, 0.06, 48, 0.3, 1.15, 12, 4);
  const SmoothedProfile sp = smooth_pycnocline(spec, levels);
  CHECK(sp.rho_l1 == doctest::Approx(0.01 * 0.5 * std::log(2.0)).epsilon(1e-6));
  CHECK(sp.ubar_l1 == doctest::Approx(0.01 * 0.2 * std::log(2.0)).epsilon(1e-6));
  CHECK(sp.rho_l1_sampled == doctest::Approx(sp.rho_l1).epsilon(0.05));
  CHECK(sp.delta0() == sp.rho_l1 + sp.ubar_l1);
  // Away from the band the profile is the two-layer one.
  CHECK(sp.profile.rho.front() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sp.profile.rho.back() == doctest::Approx(0.5).epsilon(1e-12));

  for (PycnoclineShape shape : {PycnoclineShape::Erf, PycnoclineShape::PiecewiseLinear}) {
    spec.shape = shape;
    const SmoothedProfile q = smooth_pycnocline(spec, levels);
    CHECK(q.rho_l1 > 0.0);
    CHECK(q.rho_l1_sampled == doctest::Approx(q.rho_l1).epsilon(0.05));
    CHECK(pycnocline_shape_from_string(to_string(shape)) == shape);
  }
  spec.epsilon = 0.3;
  CHECK_THROWS_AS(smooth_pycnocline(spec, levels), DomainError);
  CHECK_THROWS_AS(pycnocline_shape_from_string("cubic"), ConfigError);
}

TEST_CASE("pycnocline distance scales linearly in epsilon") {
  PycnoclineSpec spec;
  spec.params = params(0.0);
  const LevelGrid levels = LevelGrid::uniform(10);
  spec.epsilon = 0.001;
  const double a = smooth_pycnocline(spec, levels).rho_l1;
  spec.epsilon = 0.01;
  const double b = smooth_pycnocline(spec, levels).rho_l1;
  CHECK(b / a == doctest::Approx(10.0).epsilon(1e-6));
}

TEST_CASE("montgomery Lipschitz bound") {
  std::mt19937_64 rng(11);
  const LevelGrid levels = LevelGrid::uniform(9);
  const StratifiedProfile p1 = random_profile(levels, rng);
  const Field2D h = random_field(9, 8, rng, 1.0);
  const LipschitzCheck same = montgomery_lipschitz_check(p1, p1, h);
  CHECK(same.max_ratio == 0.0);
  CHECK(same.M == doctest::Approx(p1.bound()));
  for (int trial = 0; trial < 50; ++trial) {
    const StratifiedProfile p2 = random_profile(levels, rng);
    const LipschitzCheck c = montgomery_lipschitz_check(p1, p2, random_field(9, 8, rng, 1.0));
    CHECK(c.max_ratio <= 1.0);
    CHECK(c.level_ratio.size() == 9);
  }
  CHECK_THROWS_AS(montgomery_lipschitz_check(p1, random_profile(LevelGrid::uniform(3), rng), h), DomainError);
}

TEST_CASE("profile and state csv round trips") {
  const SpatialGrid g(2.0 * pi, 8);
  const LevelGrid levels = LevelGrid::with_interface(-0.5, 2, 3);
  const auto [prof, emb] = embed_bilayer(smooth_state(g), params(0.0), levels);
  const auto dir = std::filesystem::temp_directory_path();
  const std::string pp = (dir / "stratlab_profile.csv").string(), sp = (dir / "stratlab_state.csv").string();
  write_profile_csv(pp, prof);
  write_stratified_csv(sp, g, levels, emb);
  const StratifiedProfile p2 = read_profile_csv(pp, levels);
  CHECK(p2.rho == prof.rho);
  CHECK(p2.ubar == prof.ubar);
  const StratifiedState s2 = read_stratified_csv(sp, g, levels);
  CHECK(s2.h == emb.h);
  CHECK(s2.u == emb.u);
  CHECK_THROWS_AS(read_profile_csv(pp, LevelGrid::uniform(4)), ConfigError);
  std::filesystem::remove(pp);
  std::filesystem::remove(sp);
}
