#include "stratlab/oracles.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <limits>
#include <numbers>

#include "stratlab/core/error.hpp"

namespace stratlab::oracles {

namespace {

using Poly = std::vector<double>;  // ascending powers

void trim(Poly& p, double tol) {
  while (p.size() > 1 && std::abs(p.back()) <= tol) p.pop_back();
}

/// Remainder of a / b.
Poly remainder(Poly a, const Poly& b) {
  const std::size_t db = b.size() - 1;
  while (a.size() - 1 >= db && a.size() > 1) {
    const double f = a.back() / b.back();
    const std::size_t shift = a.size() - 1 - db;
    for (std::size_t k = 0; k <= db; ++k) a[shift + k] -= f * b[k];
    a.pop_back();
    if (a.size() - 1 < db) break;
  }
  return a;
}

int sign_changes(const std::vector<double>& v) {
  int changes = 0;
  double prev = 0.0;
  for (double x : v) {
    if (x == 0.0) continue;
    if (prev != 0.0 && (x > 0.0) != (prev > 0.0)) ++changes;
    prev = x;
  }
  return changes;
}

Poly multiply(const Poly& a, const Poly& b) {
  Poly c(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) c[i + j] += a[i] * b[j];
  }
  return c;
}

void accumulate(Poly& acc, const Poly& p, double sign) {
  if (acc.size() < p.size()) acc.resize(p.size(), 0.0);
  for (std::size_t k = 0; k < p.size(); ++k) acc[k] += sign * p[k];
}

using PolyMatrix = std::vector<std::vector<Poly>>;

Poly determinant(const PolyMatrix& m) {
  const std::size_t n = m.size();
  if (n == 1) return m[0][0];
  Poly det{0.0};
  for (std::size_t c = 0; c < n; ++c) {
    PolyMatrix minor(n - 1);
    for (std::size_t r = 1; r < n; ++r) {
      for (std::size_t k = 0; k < n; ++k) {
        if (k != c) minor[r - 1].push_back(m[r][k]);
      }
    }
    accumulate(det, multiply(m[0][c], determinant(minor)), c % 2 == 0 ? 1.0 : -1.0);
  }
  return det;
}

std::array<std::complex<double>, 3> cubic_roots(double b, double c, double d) {
  using C = std::complex<double>;
  // m = z - b/3 gives z^3 + P z + Q = 0.
  const double P = c - b * b / 3.0;
  const double Q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
  const C disc = std::sqrt(C(Q * Q / 4.0 + P * P * P / 27.0));
  C u3 = -Q / 2.0 + disc;
  if (std::abs(u3) < std::abs(-Q / 2.0 - disc)) u3 = -Q / 2.0 - disc;
  const C u = std::pow(u3, 1.0 / 3.0);
  const C omega(-0.5, std::sqrt(3.0) / 2.0);
  std::array<C, 3> out;
  C uk = u;
  for (int k = 0; k < 3; ++k) {
    const C z = std::abs(uk) == 0.0 ? C(0.0) : uk - P / (3.0 * uk);
    out[static_cast<std::size_t>(k)] = z - b / 3.0;
    uk *= omega;
  }
  return out;
}

}  // namespace

int sturm_real_root_count(const Quartic& q) {
  Poly p0(q.c.begin(), q.c.end());
  double scale = 0.0;
  for (double v : p0) scale = std::max(scale, std::abs(v));
  const double tol = 1e-13 * std::max(1.0, scale);
  trim(p0, tol);
  Poly p1(p0.size() - 1);
  for (std::size_t k = 1; k < p0.size(); ++k) p1[k - 1] = static_cast<double>(k) * p0[k];
  std::vector<Poly> seq{p0, p1};
  while (seq.back().size() > 1) {
    Poly r = remainder(seq[seq.size() - 2], seq.back());
    for (double& v : r) v = -v;
    trim(r, tol);
    if (r.size() == 1 && std::abs(r[0]) <= tol) break;
    seq.push_back(std::move(r));
  }
  std::vector<double> at_minus, at_plus;
  for (const Poly& p : seq) {
    const double lead = p.back();
    const bool odd = (p.size() - 1) % 2 == 1;
    at_plus.push_back(lead);
    at_minus.push_back(odd ? -lead : lead);
  }
  return sign_changes(at_minus) - sign_changes(at_plus);
}

int matrix_real_root_count(const StatePoint& p) {
  Eigen::EigenSolver<Mat4> es(system_matrix(p), false);
  const auto ev = es.eigenvalues();
  double m = 0.0;
  for (int i = 0; i < 4; ++i) m = std::max(m, std::abs(ev(i)));
  const double tol = 1e-9 * (1.0 + m);
  int count = 0;
  for (int i = 0; i < 4; ++i) count += std::abs(ev(i).imag()) <= tol ? 1 : 0;
  return count;
}

std::array<std::complex<double>, 4> ferrari_roots(const Quartic& q) {
  using C = std::complex<double>;
  if (q.c[4] == 0.0) throw DomainError("ferrari_roots: leading coefficient is zero");
  const double a = q.c[3] / q.c[4], b = q.c[2] / q.c[4], c = q.c[1] / q.c[4], d = q.c[0] / q.c[4];
  // x = y - a/4: y^4 + p y^2 + s y + t = 0.
  const double p = b - 3.0 * a * a / 8.0;
  const double s = c - a * b / 2.0 + a * a * a / 8.0;
  const double t = d - a * c / 4.0 + a * a * b / 16.0 - 3.0 * a * a * a * a / 256.0;
  std::array<C, 4> y;
  if (std::abs(s) <= 1e-14 * (1.0 + std::abs(p) + std::abs(t))) {
    const C disc = std::sqrt(C(p * p - 4.0 * t));
    const C z1 = (-p + disc) / 2.0, z2 = (-p - disc) / 2.0;
    y = {std::sqrt(z1), -std::sqrt(z1), std::sqrt(z2), -std::sqrt(z2)};
  } else {
    // Resolvent m^3 + p m^2 + (p^2/4 - t) m - s^2/8 = 0; take the root of
    // largest modulus so that sqrt(2m) stays away from zero.
    const auto ms = cubic_roots(p, p * p / 4.0 - t, -s * s / 8.0);
    C m = ms[0];
    for (const C& v : ms) {
      if (std::abs(v) > std::abs(m)) m = v;
    }
    const C r2m = std::sqrt(2.0 * m);
    std::size_t k = 0;
    for (double s1 : {1.0, -1.0}) {
      const C inner = std::sqrt(-(2.0 * p + 2.0 * m + s1 * std::numbers::sqrt2 * s / std::sqrt(m)));
      for (double s2 : {1.0, -1.0}) y[k++] = 0.5 * (s1 * r2m + s2 * inner);
    }
  }
  std::array<C, 4> x;
  for (std::size_t k = 0; k < 4; ++k) x[k] = y[k] - a / 4.0;
  return x;
}

Quartic determinant_polynomial(const StatePoint& p) {
  const Mat4 A = system_matrix(p);
  PolyMatrix m(4, std::vector<Poly>(4));
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
          i == j ? Poly{-A(i, j), 1.0} : Poly{-A(i, j)};
    }
  }
  Poly det = determinant(m);
  det.resize(5, 0.0);
  Quartic q;
  std::copy(det.begin(), det.begin() + 5, q.c.begin());
  return q;
}

CriticalFroude tangency_froude(double h_ratio, double rho_ratio) {
  if (!(h_ratio > 0.0)) throw DomainError("tangency_froude: depth ratio must be positive");
  if (!(rho_ratio > 0.0 && rho_ratio < 1.0)) throw DomainError("tangency_froude: density ratio must lie in (0,1)");
  const double m = std::sqrt(h_ratio), r = rho_ratio;
  constexpr int bits = std::numeric_limits<double>::digits;

  // Upper half of the oval: p_b = sqrt(1 - r / (1 - p_s^2)) on |p_s| <= sqrt(1 - r).
  const double a = std::sqrt(1.0 - r);
  const auto oval = [&](double ps) {
    const double v = 1.0 - r / (1.0 - ps * ps);
    return -(std::sqrt(std::max(v, 0.0)) - m * ps);
  };
  // Outer branch with p_s = -x < -1, p_b > 1.
  const auto branch = [&](double x) { return std::sqrt(1.0 + r / (x * x - 1.0)) + m * x; };

  const auto refine = [&](const auto& f, double lo, double hi, std::size_t n, bool geometric) {
    std::vector<double> xs(n + 1);
    for (std::size_t k = 0; k <= n; ++k) {
      const double s = static_cast<double>(k) / static_cast<double>(n);
      xs[k] = geometric ? lo * std::pow(hi / lo, s) : lo + (hi - lo) * s;
    }
    std::size_t best = 0;
    for (std::size_t k = 1; k <= n; ++k) {
      if (f(xs[k]) < f(xs[best])) best = k;
    }
    const double l = xs[best == 0 ? 0 : best - 1], u = xs[std::min(best + 1, n)];
    return boost::math::tools::brent_find_minima(f, l, u, bits).second;
  };

  CriticalFroude out;
  out.minus = -refine(oval, -a, a, 4000, false);
  const double lo = 1.0 + 1e-12;
  const double hi = 10.0 * (1.0 + (1.0 + std::sqrt(1.0 + r)) / m);
  out.plus = refine([&](double y) { return branch(1.0 + y); }, lo - 1.0, hi, 20000, true);
  return out;
}

BilayerState linear_bilayer_solution(const SpatialGrid& grid, const BilayerParams& params,
                                     const BilayerState& initial, double t) {
  using C = std::complex<double>;
  const std::size_t n = grid.size();
  StatePoint rest{params.rho_s, params.rho_b, params.Hbar_s, params.Hbar_b, params.Ubar_s, params.Ubar_b};
  Eigen::EigenSolver<Mat4> es(system_matrix(rest));
  const Eigen::Matrix4cd V = es.eigenvectors();
  const Eigen::Vector4cd lambda = es.eigenvalues();
  const Eigen::Matrix4cd Vinv = V.inverse();

  const auto in = initial.fields();
  std::vector<Eigen::Vector4cd> coeff(n, Eigen::Vector4cd::Zero());
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t j = 0; j < n; ++j) {
      const double ang = -2.0 * std::numbers::pi * static_cast<double>(k * j % n) / static_cast<double>(n);
      const C e(std::cos(ang), std::sin(ang));
      for (int f = 0; f < 4; ++f) coeff[k](f) += (*in[static_cast<std::size_t>(f)])[j] * e;
    }
  }
  const double base = 2.0 * std::numbers::pi / grid.length();
  for (std::size_t k = 0; k < n; ++k) {
    if (2 * k == n) {
      coeff[k].setZero();
      continue;
    }
    const double xi = base * (k <= n / 2 ? static_cast<double>(k) : static_cast<double>(k) - static_cast<double>(n));
    Eigen::Vector4cd w = Vinv * coeff[k];
    for (int f = 0; f < 4; ++f) w(f) *= std::exp(C(0.0, -xi * t) * lambda(f));
    coeff[k] = V * w;
  }
  BilayerState out = BilayerState::zero(n);
  out.t = initial.t + t;
  auto dst = out.fields();
  for (std::size_t j = 0; j < n; ++j) {
    Eigen::Vector4cd sum = Eigen::Vector4cd::Zero();
    for (std::size_t k = 0; k < n; ++k) {
      const double ang = 2.0 * std::numbers::pi * static_cast<double>(k * j % n) / static_cast<double>(n);
      sum += coeff[k] * C(std::cos(ang), std::sin(ang));
    }
    for (int f = 0; f < 4; ++f) (*dst[static_cast<std::size_t>(f)])[j] = sum(f).real() / static_cast<double>(n);
  }
  return out;
}

double heat_decay(double kappa, double wavenumber, double t) {
  return std::exp(-kappa * wavenumber * wavenumber * t);
}

Field2D montgomery_naive(const StratifiedProfile& profile, const Field2D& h, bool divide_by_rho) {
  const std::size_t nr = profile.size(), n = h.points();
  if (h.levels() != nr) throw DomainError("montgomery_naive: level mismatch");
  Field2D out(nr, n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < nr; ++i) {
      double below = 0.0, above = 0.0;
      for (std::size_t l = 0; l < nr; ++l) {
        const double w = profile.levels.weight(l);
        if (l < i) below += w * h(l, j);
        if (l > i) above += w * profile.rho[l] * h(l, j);
      }
      const double self = 0.5 * profile.levels.weight(i) * h(i, j);
      double v = profile.rho[i] * (below + self) + above + profile.rho[i] * self;
      if (divide_by_rho) v /= profile.rho[i];
      out(i, j) = v;
    }
  }
  return out;
}

}  // namespace stratlab::oracles
