#include "stratlab/core/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

#include "stratlab/core/error.hpp"

namespace stratlab {

namespace {

// The FFTW planner is not re-entrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

struct SpectralOps::Plans {
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;

  Plans(std::size_t n) {
    std::vector<double> r(n);
    std::vector<Complex> c(n / 2 + 1);
    std::lock_guard lock(planner_mutex());
    const int ni = static_cast<int>(n);
    // ESTIMATE keeps the chosen algorithm, and so the rounding, reproducible.
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    r2c = fftw_plan_dft_r2c_1d(ni, r.data(), reinterpret_cast<fftw_complex*>(c.data()), flags);
    c2r = fftw_plan_dft_c2r_1d(ni, reinterpret_cast<fftw_complex*>(c.data()), r.data(), flags);
  }
  ~Plans() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(r2c);
    fftw_destroy_plan(c2r);
  }
};

SpectralOps::SpectralOps(const SpatialGrid& grid)
    : grid_(grid),
      xi_(grid.size() / 2 + 1),
      plans_(std::make_unique<Plans>(grid.size())),
      scratch_c_(grid.size() / 2 + 1),
      scratch_r_(grid.size()) {
  const double base = 2.0 * std::numbers::pi / grid.length();
  for (std::size_t k = 0; k < xi_.size(); ++k) xi_[k] = base * static_cast<double>(k);
}

SpectralOps::~SpectralOps() = default;
SpectralOps::SpectralOps(SpectralOps&&) noexcept = default;
SpectralOps& SpectralOps::operator=(SpectralOps&&) noexcept = default;

void SpectralOps::forward(std::span<const double> in, std::span<Complex> out) {
  if (in.size() != n() || out.size() != modes()) throw DomainError("forward: size mismatch");
  // r2c leaves its input untouched.
  fftw_execute_dft_r2c(plans_->r2c, const_cast<double*>(in.data()),
                       reinterpret_cast<fftw_complex*>(out.data()));
}

void SpectralOps::inverse(std::span<const Complex> in, std::span<double> out) {
  if (in.size() != modes() || out.size() != n()) throw DomainError("inverse: size mismatch");
  // c2r overwrites its input.
  std::copy(in.begin(), in.end(), scratch_c_.begin());
  fftw_execute_dft_c2r(plans_->c2r, reinterpret_cast<fftw_complex*>(scratch_c_.data()),
                       out.data());
  const double scale = 1.0 / static_cast<double>(n());
  for (double& v : out) v *= scale;
}

void SpectralOps::apply_derivative(std::span<Complex> c, int order) const {
  if (order < 0) throw DomainError("derivative order must be non-negative");
  if (order == 0) return;
  for (std::size_t k = 0; k < c.size(); ++k) {
    const double xi = xi_[k];
    Complex factor;
    switch (order % 4) {
      case 0: factor = Complex(std::pow(xi, order), 0.0); break;
      case 1: factor = Complex(0.0, std::pow(xi, order)); break;
      case 2: factor = Complex(-std::pow(xi, order), 0.0); break;
      default: factor = Complex(0.0, -std::pow(xi, order)); break;
    }
    c[k] *= factor;
  }
  c[c.size() - 1] = 0.0;
}

void SpectralOps::derivative(std::span<const double> in, int order, std::span<double> out) {
  require_finite(in, "spectral derivative input");
  std::vector<Complex> c(modes());
  forward(in, c);
  apply_derivative(c, order);
  inverse(c, out);
}

void SpectralOps::dealias(std::span<Complex> c) const {
  for (std::size_t k = n() / 3 + 1; k < c.size(); ++k) c[k] = 0.0;
}

void SpectralOps::dealias(std::span<double> values) {
  std::vector<Complex> c(modes());
  forward(values, c);
  dealias(std::span<Complex>(c));
  inverse(c, values);
}

void SpectralOps::apply_heat(std::span<Complex> c, double coef) const {
  for (std::size_t k = 0; k < c.size(); ++k) c[k] *= std::exp(-coef * xi_[k] * xi_[k]);
}

double SpectralOps::sobolev_norm_coeffs(std::span<const Complex> c, double s) const {
  double sum = 0.0;
  const std::size_t nyq = n() / 2;
  for (std::size_t k = 0; k < c.size(); ++k) {
    const double mult = (k == 0 || k == nyq) ? 1.0 : 2.0;
    const double w = s == 0.0 ? 1.0 : std::pow(1.0 + xi_[k] * xi_[k], s);
    sum += mult * w * std::norm(c[k]);
  }
  const double nn = static_cast<double>(n());
  return std::sqrt(sum * grid_.length() / (nn * nn));
}

double SpectralOps::sobolev_norm(std::span<const double> f, double s) {
  require_finite(f, "sobolev_norm input");
  std::vector<Complex> c(modes());
  forward(f, c);
  return sobolev_norm_coeffs(c, s);
}

Field1D spectral_derivative(const SpatialGrid& grid, const Field1D& f, int order) {
  if (order < 1) throw DomainError("spectral_derivative: order must be positive");
  if (f.size() != grid.size()) throw DomainError("spectral_derivative: grid mismatch");
  SpectralOps ops(grid);
  Field1D out(grid.size());
  ops.derivative(f.span(), order, out.span());
  return out;
}

double sobolev_norm(const SpatialGrid& grid, const Field1D& f, SobolevIndex s) {
  if (f.size() != grid.size()) throw DomainError("sobolev_norm: grid mismatch");
  SpectralOps ops(grid);
  return ops.sobolev_norm(f.span(), s.value());
}

}  // namespace stratlab
