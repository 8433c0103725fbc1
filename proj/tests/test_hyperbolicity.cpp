#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "stratlab/core/error.hpp"
#include "stratlab/hyperbolicity.hpp"
#include "stratlab/oracles.hpp"

using namespace stratlab;

namespace {

std::vector<double> sorted_real(const std::array<std::complex<double>, 4>& z) {
  std::vector<double> r;
  for (const auto& c : z) r.push_back(c.real());
  std::sort(r.begin(), r.end());
  return r;
}

StatePoint figure_point(double rho, double shear) {
  // H_s = 1/3, H_b = 2/3, shear = (U_b - U_s) / sqrt(H_b)
  return StatePoint{rho, 1.0, 1.0 / 3.0, 2.0 / 3.0, 0.0, shear * std::sqrt(2.0 / 3.0)};
}

}  // namespace

TEST_CASE("characteristic polynomial of decoupled layers") {
  const Quartic q = characteristic_polynomial(StatePoint{0.0, 1.0, 1.0, 1.0, 0.0, 0.0});
  const std::array<double, 5> expected{1.0, 0.0, -2.0, 0.0, 1.0};
  for (int k = 0; k < 5; ++k) CHECK(q.c[k] == doctest::Approx(expected[k]));
  const auto roots = sorted_real(quartic_roots(q));
  CHECK(roots[0] == doctest::Approx(-1.0).epsilon(1e-7));
  CHECK(roots[1] == doctest::Approx(-1.0).epsilon(1e-7));
  CHECK(roots[2] == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(roots[3] == doctest::Approx(1.0).epsilon(1e-7));
  CHECK_THROWS_AS(characteristic_polynomial(StatePoint{0.5, 1.0, 0.0, 1.0, 0.0, 0.0}), DomainError);
}

TEST_CASE("biquadratic roots at rest") {
  const auto roots = sorted_real(quartic_roots(characteristic_polynomial(figure_point(0.5, 0.0))));
  const double a = std::sqrt((1.0 + std::sqrt(5.0) / 3.0) / 2.0);
  const double b = std::sqrt((1.0 - std::sqrt(5.0) / 3.0) / 2.0);
  CHECK(roots[0] == doctest::Approx(-a).epsilon(1e-12));
  CHECK(roots[1] == doctest::Approx(-b).epsilon(1e-12));
  CHECK(roots[2] == doctest::Approx(b).epsilon(1e-12));
  CHECK(roots[3] == doctest::Approx(a).epsilon(1e-12));
  CHECK(a == doctest::Approx(0.93417).epsilon(1e-5));
  CHECK(b == doctest::Approx(0.35682).epsilon(1e-5));
}

TEST_CASE("coefficients match the determinant of lambda I - A") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (double rho : {0.1, 0.5, 0.9}) {
    for (double shear : {0.5, 1.5, 2.5}) {
      const StatePoint p = figure_point(rho, shear);
      const Quartic a = characteristic_polynomial(p), b = oracles::determinant_polynomial(p);
      for (int k = 0; k < 5; ++k) CHECK(a.c[k] == doctest::Approx(b.c[k]).epsilon(1e-13).scale(1.0));
    }
  }
  for (int t = 0; t < 50; ++t) {
    const StatePoint p{0.5 + 0.4 * u(rng), 1.0, 1.0 + 0.5 * u(rng), 1.0 + 0.5 * u(rng), u(rng), u(rng)};
    const Quartic a = characteristic_polynomial(p), b = oracles::determinant_polynomial(p);
    for (int k = 0; k < 5; ++k) CHECK(a.c[k] == doctest::Approx(b.c[k]).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("companion roots agree with Ferrari's formula and reproduce P") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    const StatePoint p{0.5 + 0.45 * u(rng), 1.0, 1.0 + 0.9 * u(rng), 1.0 + 0.9 * u(rng), 2.0 * u(rng), 2.0 * u(rng)};
    const Quartic q = characteristic_polynomial(p);
    const auto comp = quartic_roots(q);
    const auto ferr = oracles::ferrari_roots(q);
    double scale = 1.0;
    for (const auto& z : comp) scale = std::max(scale, std::abs(z));
    for (const auto& z : comp) {
      double nearest = 1e300;
      for (const auto& w : ferr) nearest = std::min(nearest, std::abs(z - w));
      CHECK(nearest <= 1e-6 * scale);
      CHECK(std::abs(q(z)) <= 1e-9 * std::pow(scale, 4));
    }
  }
}

TEST_CASE("critical Froude regression baselines") {
  const CriticalFroude f = critical_froude(0.5, 0.5);
  CHECK(f.minus == doctest::Approx(0.93134614935).epsilon(1e-9));
  CHECK(f.plus == doctest::Approx(2.22180663265).epsilon(1e-9));
  for (double rho : {0.1, 0.5, 0.9}) {
    const CriticalFroude b = critical_froude(0.5, rho);
    const CriticalFroude t = oracles::tangency_froude(0.5, rho);
    CHECK(b.minus == doctest::Approx(t.minus).epsilon(1e-9));
    CHECK(b.plus == doctest::Approx(t.plus).epsilon(1e-9));
    CHECK(b.minus < b.plus);
  }
  CHECK_THROWS_AS(critical_froude(0.5, 1.0), DomainError);
  CHECK_THROWS_AS(critical_froude(0.5, 0.0), DomainError);
}

TEST_CASE("Fr thresholds merge as the density ratio vanishes") {
  double prev_gap = 1e300;
  for (double rho : {1e-1, 1e-2, 1e-3}) {
    const CriticalFroude f = critical_froude(0.5, rho);
    CHECK(f.plus - f.minus < prev_gap);
    prev_gap = f.plus - f.minus;
  }
  CHECK(prev_gap < 0.06);
}

TEST_CASE("Fr thresholds are symmetric in the sign of the intercept") {
  for (double h : {0.2, 0.5, 3.0}) {
    for (double rho : {0.2, 0.7}) {
      CriticalFroudeOptions neg;
      neg.sign = -1;
      const CriticalFroude a = critical_froude(h, rho), b = critical_froude(h, rho, neg);
      CHECK(a.minus == doctest::Approx(b.minus).epsilon(1e-10));
      CHECK(a.plus == doctest::Approx(b.plus).epsilon(1e-10));
    }
  }
}

TEST_CASE("classification examples") {
  const HyperbolicityReport rest = classify(figure_point(0.5, 0.0));
  CHECK(rest.regime == Regime::Hyperbolic);
  CHECK(rest.margin == doctest::Approx(rest.fr_minus));

  const Regime expected[3] = {Regime::Hyperbolic, Regime::Elliptic, Regime::FastHyperbolic};
  const double shears[3] = {0.5, 1.5, 2.5};
  for (int k = 0; k < 3; ++k) {
    const StatePoint p = figure_point(0.5, shears[k]);
    const HyperbolicityReport r = classify(p);
    CHECK(r.real_roots == oracles::matrix_real_root_count(p));
    CHECK(r.regime == expected[k]);
  }
  CHECK_THROWS_AS(classify(StatePoint{1.0, 1.0, 0.5, 0.5, 0.0, 0.0}), DomainError);
  CHECK_THROWS_AS(classify(StatePoint{1.2, 1.0, 0.5, 0.5, 0.0, 0.0}), DomainError);
}

TEST_CASE("nearly equal densities are elliptic at moderate shear") {
  for (double rho : {0.99, 0.999}) {
    const StatePoint p{rho, 1.0, 0.5, 1.0, 0.0, 0.3};
    const HyperbolicityReport r = classify(p);
    CHECK(r.fr_minus < 0.3);
    CHECK(r.regime == Regime::Elliptic);
    CHECK(oracles::matrix_real_root_count(p) == 2);
  }
}

TEST_CASE("Sturm count agrees with the classifier away from thresholds") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 300; ++t) {
    const StatePoint p{0.05 + 0.9 * u(rng), 1.0, 0.2 + 2.0 * u(rng), 0.2 + 2.0 * u(rng), u(rng), 3.0 * u(rng)};
    const HyperbolicityReport r = classify(p);
    if (r.near_degenerate) continue;
    CHECK(oracles::sturm_real_root_count(r.polynomial) == r.real_roots);
  }
}

TEST_CASE("Galilean and scaling invariance") {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    const StatePoint p{0.05 + 0.9 * u(rng), 1.0, 0.2 + u(rng), 0.2 + u(rng), u(rng) - 0.5, 2.5 * u(rng)};
    const HyperbolicityReport a = classify(p);
    if (a.near_degenerate) continue;
    const double c = 3.0 * u(rng) - 1.5;
    StatePoint q = p;
    q.U_s += c;
    q.U_b += c;
    const HyperbolicityReport b = classify(q);
    CHECK(a.regime == b.regime);
    CHECK(a.margin == doctest::Approx(b.margin).epsilon(1e-10));
    CHECK(a.fr_minus == doctest::Approx(b.fr_minus).epsilon(1e-10));
    auto ra = sorted_real(a.roots), rb = sorted_real(b.roots);
    if (a.real_roots == 4) {
      for (int k = 0; k < 4; ++k) CHECK(rb[k] == doctest::Approx(ra[k] + c).epsilon(1e-10));
    }

    const double s = 0.3 + 2.0 * u(rng);
    const StatePoint w{p.rho_s, p.rho_b, s * s * p.H_s, s * s * p.H_b, s * p.U_s, s * p.U_b};
    const HyperbolicityReport d = classify(w);
    CHECK(a.regime == d.regime);
    if (a.real_roots == 4) {
      auto rd = sorted_real(d.roots);
      for (int k = 0; k < 4; ++k) CHECK(rd[k] == doctest::Approx(s * ra[k]).epsilon(1e-9));
    }
  }
}

TEST_CASE("symmetrizer at equal velocities is block diagonal") {
  const double rr = 0.4;
  const StatePoint p{rr, 1.0, 0.3, 0.7, 0.2, 0.2};
  const Mat4 S = symmetrizer_matrix(p, 0.2);
  CHECK(S(0, 0) == doctest::Approx(rr));
  CHECK(S(0, 1) == doctest::Approx(rr));
  CHECK(S(1, 1) == doctest::Approx(1.0));
  CHECK(S(2, 2) == doctest::Approx(rr * 0.3));
  CHECK(S(3, 3) == doctest::Approx(0.7));
  CHECK(S(0, 2) == 0.0);
  CHECK(S(1, 3) == 0.0);
  CHECK(S(2, 3) == 0.0);
  CHECK(min_eigenvalue(S) > 0.0);
  CHECK((S - S.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("symmetrizer certifies the hyperbolic figure point") {
  const StatePoint p = figure_point(0.5, 0.5);
  const Symmetrizer s = symmetrizer(p);
  CHECK(s.certified);
  CHECK(min_eigenvalue(s.S) > 0.0);
  CHECK((s.SA - s.SA.transpose()).cwiseAbs().maxCoeff() <= 1e-13);
  CHECK(s.lambda > s.sorted_roots[1]);
  CHECK(s.lambda < s.sorted_roots[2]);
  const double P = characteristic_polynomial(p)(s.lambda);
  CHECK(s.leading_minors[3] / (0.25) == doctest::Approx(P).epsilon(1e-9));
  CHECK_THROWS_AS(symmetrizer(figure_point(0.5, 1.5)), DomainError);
}

TEST_CASE("membership in the hyperbolic set") {
  const StatePoint rest{0.5, 1.0, 0.5, 0.5, 0.0, 0.0};
  CHECK(in_hyperbolic_set(rest, 0.1));
  CHECK_FALSE(in_hyperbolic_set(StatePoint{0.5, 1.0, 0.1, 0.9, 0.0, 0.0}, 0.2));
  const double sigma = 0.1;
  const double fr = critical_froude(1.0, 0.5).minus;
  const StatePoint edge{0.5, 1.0, 0.5, 0.5, 0.0, (fr - sigma / 2.0) * std::sqrt(0.5)};
  CHECK_FALSE(in_hyperbolic_set(edge, sigma));
  const StatePoint inside{0.5, 1.0, 0.5, 0.5, 0.0, (fr - 2.0 * sigma) * std::sqrt(0.5)};
  CHECK(in_hyperbolic_set(inside, sigma));
  CHECK(symmetrizer(inside).certified);
}

TEST_CASE("atlas samples lie on the quartic curve") {
  const Atlas a = atlas(0.5, 0.5, {0.5, 1.5, 2.5});
  CHECK(a.lines.size() == 3);
  bool has_oval = false;
  for (const Polyline& p : a.curve) {
    has_oval = has_oval || p.closed;
    for (std::size_t k = 0; k < p.p_s.size(); ++k) {
      const double s = p.p_s[k], b = p.p_b[k];
      if (!std::isfinite(s) || !std::isfinite(b)) continue;
      const double scale = std::max(1.0, (s * s + 1.0) * (b * b + 1.0));
      CHECK(std::abs((s * s - 1.0) * (b * b - 1.0) - 0.5) <= 1e-9 * scale);
    }
  }
  CHECK(has_oval);
  // At p_s = 0 the curve has p_b^2 = 1/2.
  const double pb = std::sqrt(0.5);
  CHECK((0.0 - 1.0) * (pb * pb - 1.0) == doctest::Approx(0.5));
}

TEST_CASE("atlas intersection counts match root counts for the figure parameters") {
  for (double rho : {0.1, 0.5, 0.9}) {
    const Atlas a = atlas(0.5, rho, {0.5, 1.5, 2.5});
    for (double c : {0.5, 1.5, 2.5}) {
      CAPTURE(rho);
      CAPTURE(c);
      CHECK(count_intersections(a, c) == classify(figure_point(rho, c)).real_roots);
    }
  }
}
