#pragma once

#include <cstddef>
#include <string_view>

namespace stratlab::kernels {

/// Pointwise inner loops of the solvers.
///
/// Every variant performs the same IEEE operations in the same order per
/// element (no fused multiply-add, no reassociation), so variants agree
/// bit for bit. The scalar table is the reference.
struct KernelTable {
  const char* name;

  /// out[i] = base[i] + a * k[i]
  void (*lincomb)(double* out, const double* base, double a, const double* k, std::size_t n);

  /// y[i] += (dt/6) * (k1[i] + 2 k2[i] + 2 k3[i] + k4[i])
  void (*rk4_combine)(double* y, const double* k1, const double* k2, const double* k3,
                      const double* k4, double dt, std::size_t n);

  /// out[i] = (hbar + h[i]) * (ubar + u[i])
  void (*mass_flux)(double* out, const double* h, const double* u, double hbar, double ubar,
                    std::size_t n);

  /// out[i] = (ubar + u[i] - kappa * dh[i] / (hbar + h[i])) * du[i]
  void (*advection)(double* out, const double* u, const double* du, const double* h,
                    const double* dh, double hbar, double ubar, double kappa, std::size_t n);

  /// Midpoint-rule Montgomery operator across levels, vectorised along a row.
  ///
  /// g holds n_r rows of length n separated by `stride`. For each column,
  ///   out_i = rho_i (sum_{j<i} w_j g_j + w_i g_i / 2) + sum_{j>i} w_j rho_j g_j + w_i rho_i g_i / 2
  /// and, if divide_by_rho, out_i /= rho_i. out must not alias g.
  void (*montgomery)(double* out, const double* g, const double* rho, const double* w,
                     std::size_t n_r, std::size_t stride, std::size_t n, bool divide_by_rho);
};

const KernelTable& scalar_kernels();

/// AVX2 table when compiled in and supported by the running CPU, else nullptr.
const KernelTable* avx2_kernels();

/// Table used by the solvers: the best supported variant, unless
/// STRATLAB_KERNELS=scalar is set in the environment or select() was called.
const KernelTable& active();

/// Forces a variant by name ("scalar", "avx2"); returns false if unavailable.
bool select(std::string_view name);

}  // namespace stratlab::kernels
