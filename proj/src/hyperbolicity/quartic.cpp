#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "stratlab/core/error.hpp"
#include "stratlab/hyperbolicity.hpp"

namespace stratlab {

double Quartic::operator()(double x) const {
  return (((c[4] * x + c[3]) * x + c[2]) * x + c[1]) * x + c[0];
}

std::complex<double> Quartic::operator()(std::complex<double> x) const {
  return (((c[4] * x + c[3]) * x + c[2]) * x + c[1]) * x + c[0];
}

std::complex<double> Quartic::derivative(std::complex<double> x) const {
  return ((4.0 * c[4] * x + 3.0 * c[3]) * x + 2.0 * c[2]) * x + c[1];
}

double StatePoint::scaled_shear() const { return std::abs(U_b - U_s) / std::sqrt(H_b); }

Quartic characteristic_polynomial(const StatePoint& p) {
  if (!(p.H_s > 0.0) || !(p.H_b > 0.0)) {
    throw DomainError("characteristic_polynomial: depths must be positive");
  }
  if (!(p.rho_b > 0.0)) throw DomainError("characteristic_polynomial: rho_b must be positive");
  // ((U_b - l)^2 - H_b) = l^2 - 2 U_b l + A0,  ((U_s - l)^2 - H_s) = l^2 - 2 U_s l + B0
  const double a0 = p.U_b * p.U_b - p.H_b;
  const double b0 = p.U_s * p.U_s - p.H_s;
  const double a1 = -2.0 * p.U_b;
  const double b1 = -2.0 * p.U_s;
  Quartic q;
  q.c[4] = 1.0;
  q.c[3] = a1 + b1;
  q.c[2] = a0 + b0 + a1 * b1;
  q.c[1] = a1 * b0 + a0 * b1;
  q.c[0] = a0 * b0 - p.rho_ratio() * p.H_s * p.H_b;
  return q;
}

std::array<std::complex<double>, 4> quartic_roots(const Quartic& q) {
  if (q.c[4] == 0.0) throw DomainError("quartic_roots: leading coefficient is zero");
  Eigen::Matrix4d companion = Eigen::Matrix4d::Zero();
  for (int i = 1; i < 4; ++i) companion(i, i - 1) = 1.0;
  for (int i = 0; i < 4; ++i) companion(i, 3) = -q.c[static_cast<std::size_t>(i)] / q.c[4];
  Eigen::EigenSolver<Eigen::Matrix4d> solver(companion, false);
  if (solver.info() != Eigen::Success) throw DomainError("quartic_roots: eigen solver failed");

  std::array<std::complex<double>, 4> roots;
  double scale = 1.0;
  for (int i = 0; i < 4; ++i) {
    roots[static_cast<std::size_t>(i)] = solver.eigenvalues()(i);
    scale = std::max(scale, std::abs(roots[static_cast<std::size_t>(i)]));
  }
  for (auto& z : roots) {
    const std::complex<double> dp = q.derivative(z);
    if (std::abs(dp) == 0.0) continue;
    const std::complex<double> polished = z - q(z) / dp;
    // A Newton step near a coalescing pair can jump to the partner root.
    if (std::abs(q(polished)) < std::abs(q(z)) && std::abs(polished - z) < 1e-6 * scale) {
      z = polished;
    }
  }
  std::sort(roots.begin(), roots.end(), [](auto a, auto b) {
    return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag());
  });
  return roots;
}

double real_root_tolerance(const std::array<std::complex<double>, 4>& roots) {
  double m = 0.0;
  for (const auto& z : roots) m = std::max(m, std::abs(z));
  return 1e-9 * (1.0 + m);
}

int count_real_roots(const std::array<std::complex<double>, 4>& roots) {
  const double tol = real_root_tolerance(roots);
  return static_cast<int>(
      std::count_if(roots.begin(), roots.end(), [tol](auto z) { return std::abs(z.imag()) <= tol; }));
}

int real_root_count(const StatePoint& p) {
  return count_real_roots(quartic_roots(characteristic_polynomial(p)));
}

}  // namespace stratlab
