#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "stratlab/core/grid.hpp"

namespace stratlab {

using Complex = std::complex<double>;

/// Real-to-complex Fourier transforms on one SpatialGrid.
///
/// Coefficients follow the unnormalised DFT convention
/// f_hat[k] = sum_j f[j] exp(-i k x_j 2 pi / L) for k = 0..n/2; inverse()
/// divides by n. Derivatives zero the Nyquist mode. The 2/3 dealiasing mask
/// keeps 0 <= k <= n/3.
///
/// An instance owns scratch buffers and is not safe to share between threads;
/// construct one per thread. Plan creation is serialised internally.
class SpectralOps {
 public:
  explicit SpectralOps(const SpatialGrid& grid);
  ~SpectralOps();
  SpectralOps(const SpectralOps&) = delete;
  SpectralOps& operator=(const SpectralOps&) = delete;
  SpectralOps(SpectralOps&&) noexcept;
  SpectralOps& operator=(SpectralOps&&) noexcept;

  const SpatialGrid& grid() const noexcept { return grid_; }
  std::size_t n() const noexcept { return grid_.size(); }
  std::size_t modes() const noexcept { return grid_.size() / 2 + 1; }
  /// Angular wavenumber 2 pi k / L of mode k.
  double wavenumber(std::size_t k) const noexcept { return xi_[k]; }
  bool retained(std::size_t k) const noexcept { return k <= n() / 3; }

  void forward(std::span<const double> in, std::span<Complex> out);
  void inverse(std::span<const Complex> in, std::span<double> out);

  /// out = d^order/dx^order in; in and out may alias.
  void derivative(std::span<const double> in, int order, std::span<double> out);
  /// Multiplies spectral coefficients by (i xi)^order in place.
  void apply_derivative(std::span<Complex> coeffs, int order) const;
  void dealias(std::span<Complex> coeffs) const;
  /// Applies the 2/3 mask to grid values in place.
  void dealias(std::span<double> values);
  /// Multiplies mode k by exp(-c xi_k^2).
  void apply_heat(std::span<Complex> coeffs, double c) const;

  /// Discrete ||(1 - d_xx)^{s/2} f||_{L^2}.
  double sobolev_norm(std::span<const double> f, double s);
  /// Same norm from precomputed coefficients.
  double sobolev_norm_coeffs(std::span<const Complex> coeffs, double s) const;

 private:
  SpatialGrid grid_;
  std::vector<double> xi_;
  struct Plans;
  std::unique_ptr<Plans> plans_;
  std::vector<Complex> scratch_c_;
  std::vector<double> scratch_r_;
};

Field1D spectral_derivative(const SpatialGrid& grid, const Field1D& f, int order);
double sobolev_norm(const SpatialGrid& grid, const Field1D& f, SobolevIndex s);

enum class LevelNorm { sup, integral };

/// sup: max_i ||g(., r_i)||_{H^s};  integral: sum_i w_i ||g(., r_i)||_{H^s}.
double mixed_norm(const SpatialGrid& grid, const LevelGrid& levels, const Field2D& g,
                  SobolevIndex s, LevelNorm mode);

/// Per-level H^s norms.
std::vector<double> level_norms(const SpatialGrid& grid, const Field2D& g, SobolevIndex s);

}  // namespace stratlab
