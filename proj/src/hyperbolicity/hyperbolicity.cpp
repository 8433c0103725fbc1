#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <functional>

#include "stratlab/core/error.hpp"
#include "stratlab/hyperbolicity.hpp"

namespace stratlab {

std::string to_string(Regime r) {
  switch (r) {
    case Regime::Hyperbolic: return "Hyperbolic";
    case Regime::Elliptic: return "Elliptic";
    case Regime::FastHyperbolic: return "FastHyperbolic";
  }
  return "unknown";
}

namespace {

int normalized_count(double h_ratio, double rho_ratio, double intercept) {
  StatePoint p{rho_ratio, 1.0, h_ratio, 1.0, 0.0, intercept};
  return real_root_count(p);
}

double bisect(double h_ratio, double rho_ratio, int sign, double lo, double hi, int count_lo,
              double tol) {
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (normalized_count(h_ratio, rho_ratio, sign * mid) == count_lo) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

void require_stable(const StatePoint& p, const char* who) {
  if (!(p.H_s > 0.0) || !(p.H_b > 0.0)) throw DomainError(std::string(who) + ": depths must be positive");
  if (!(p.rho_s > 0.0) || !(p.rho_s < p.rho_b)) {
    throw DomainError(std::string(who) + ": requires stable stratification 0 < rho_s < rho_b");
  }
}

}  // namespace

CriticalFroude critical_froude(double h_ratio, double rho_ratio,
                               const CriticalFroudeOptions& options) {
  if (!(rho_ratio > 0.0 && rho_ratio < 1.0)) {
    throw DomainError("critical_froude: rho_ratio must lie in (0,1)");
  }
  if (!(h_ratio > 0.0) || !std::isfinite(h_ratio)) {
    throw DomainError("critical_froude: h_ratio must be positive");
  }
  const int sign = options.sign >= 0 ? 1 : -1;
  const double slope = std::sqrt(h_ratio);
  // Fr_+ <= sqrt(1 + rho) + sqrt(2) slope (tangent-line bound at p_s = sqrt 2).
  const double c_max = 3.0 + 2.0 * slope;

  for (std::size_t n = std::max<std::size_t>(options.scan_points, 4); n <= (1u << 20); n *= 2) {
    const double step = c_max / static_cast<double>(n);
    std::size_t first_two = 0;
    std::size_t back_to_four = 0;
    for (std::size_t i = 1; i <= n; ++i) {
      const int count = normalized_count(h_ratio, rho_ratio, sign * step * static_cast<double>(i));
      if (first_two == 0) {
        if (count < 4) first_two = i;
      } else if (count == 4) {
        back_to_four = i;
        break;
      }
    }
    if (first_two == 0 || back_to_four == 0) continue;
    CriticalFroude fr;
    fr.minus = bisect(h_ratio, rho_ratio, sign, step * static_cast<double>(first_two - 1),
                      step * static_cast<double>(first_two), 4, options.tolerance);
    const int inside = normalized_count(h_ratio, rho_ratio,
                                        sign * step * static_cast<double>(back_to_four - 1));
    fr.plus = bisect(h_ratio, rho_ratio, sign, step * static_cast<double>(back_to_four - 1),
                     step * static_cast<double>(back_to_four), inside, options.tolerance);
    return fr;
  }
  throw DomainError("critical_froude: could not bracket the elliptic window");
}

HyperbolicityReport classify(const StatePoint& p) {
  require_stable(p, "classify");
  HyperbolicityReport rep;
  rep.polynomial = characteristic_polynomial(p);
  rep.roots = quartic_roots(rep.polynomial);
  rep.root_tolerance = real_root_tolerance(rep.roots);
  rep.real_roots = count_real_roots(rep.roots);
  const CriticalFroude fr = critical_froude(p.depth_ratio(), p.rho_ratio());
  rep.fr_minus = fr.minus;
  rep.fr_plus = fr.plus;
  rep.shear = p.scaled_shear();
  rep.margin = fr.minus - rep.shear;

  if (rep.real_roots == 4) {
    rep.regime = rep.shear < 0.5 * (fr.minus + fr.plus) ? Regime::Hyperbolic : Regime::FastHyperbolic;
  } else {
    rep.regime = Regime::Elliptic;
  }

  const Regime expected = rep.shear < fr.minus   ? Regime::Hyperbolic
                          : rep.shear <= fr.plus ? Regime::Elliptic
                                                 : Regime::FastHyperbolic;
  double scale = 0.0;
  for (const auto& z : rep.roots) scale = std::max(scale, std::abs(z));
  double closest = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = i + 1; j < 4; ++j) closest = std::min(closest, std::abs(rep.roots[i] - rep.roots[j]));
  }
  rep.near_degenerate = expected != rep.regime || closest < 1e-6 * (1.0 + scale) ||
                        std::abs(rep.shear - fr.minus) < 1e-8 || std::abs(rep.shear - fr.plus) < 1e-8;
  return rep;
}

Mat4 system_matrix(const StatePoint& p) {
  const double r = p.rho_ratio();
  Mat4 a;
  a << p.U_s, 0.0, p.H_s, 0.0,
       0.0, p.U_b, 0.0, p.H_b,
       1.0, 1.0, p.U_s, 0.0,
       r, 1.0, 0.0, p.U_b;
  return a;
}

Mat4 symmetrizer_matrix(const StatePoint& p, double lambda) {
  const double r = p.rho_ratio();
  const double us = p.U_s - lambda;
  const double ub = p.U_b - lambda;
  Mat4 s;
  s << r, r, r * us, 0.0,
       r, 1.0, 0.0, ub,
       r * us, 0.0, r * p.H_s, 0.0,
       0.0, ub, 0.0, p.H_b;
  return s;
}

double min_eigenvalue(const Mat4& S) {
  Eigen::SelfAdjointEigenSolver<Mat4> es(S, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

namespace {

std::array<double, 4> leading_minors(const Mat4& S) {
  return {S(0, 0), S.topLeftCorner<2, 2>().determinant(), S.topLeftCorner<3, 3>().determinant(),
          S.determinant()};
}

double golden_section_max(const std::function<double(double)>& f, double a, double b) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int it = 0; it < 200 && (b - a) > 1e-13 * (1.0 + std::abs(a) + std::abs(b)); ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

Symmetrizer symmetrizer(const StatePoint& p) {
  require_stable(p, "symmetrizer");
  const auto roots = quartic_roots(characteristic_polynomial(p));
  if (count_real_roots(roots) != 4) throw DomainError("symmetrizer: state is not hyperbolic");
  const CriticalFroude fr = critical_froude(p.depth_ratio(), p.rho_ratio());
  if (!(p.scaled_shear() < fr.minus)) {
    throw DomainError("symmetrizer: shear is not below Fr_- (outside the subcritical regime)");
  }

  Symmetrizer out;
  for (std::size_t i = 0; i < 4; ++i) out.sorted_roots[i] = roots[i].real();
  std::sort(out.sorted_roots.begin(), out.sorted_roots.end());
  const double l2 = out.sorted_roots[1];
  const double l3 = out.sorted_roots[2];

  const double lo = std::min(p.U_s, p.U_b);
  const double hi = std::max(p.U_s, p.U_b);
  const double mid = 0.5 * (l2 + l3);
  double lambda = std::clamp(mid, lo, hi);
  out.clipped = lambda != mid;
  if (!(lambda > l2 && lambda < l3)) {
    out.fallback = true;
    lambda = golden_section_max(
        [&](double l) { return min_eigenvalue(symmetrizer_matrix(p, l)); }, l2, l3);
  }

  out.lambda = lambda;
  out.S = symmetrizer_matrix(p, lambda);
  out.SA = out.S * system_matrix(p);
  out.leading_minors = leading_minors(out.S);
  out.certified = std::all_of(out.leading_minors.begin(), out.leading_minors.end(),
                              [](double m) { return m > 0.0; });
  return out;
}

bool in_hyperbolic_set(const StatePoint& p, double sigma) {
  if (!(sigma > 0.0 && sigma < 1.0)) throw DomainError("in_hyperbolic_set: sigma must lie in (0,1)");
  if (!(p.H_s > 0.0) || !(p.H_b > 0.0) || !(p.rho_s > 0.0) || !(p.rho_b > 0.0)) return false;
  const double r = p.rho_ratio();
  if (r < sigma / 2.0 || r > 1.0 - sigma / 2.0) return false;
  const double h = p.depth_ratio();
  if (h < sigma || h > 1.0 / sigma) return false;
  if (p.H_s + p.H_b < sigma) return false;
  const CriticalFroude fr = critical_froude(h, r);
  return fr.minus - p.scaled_shear() >= sigma;
}

}  // namespace stratlab
