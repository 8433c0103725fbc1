#include "kernels_impl.hpp"

namespace stratlab::kernels {

namespace {

void lincomb(double* out, const double* base, double a, const double* k, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = base[i] + a * k[i];
}

void rk4_combine(double* y, const double* k1, const double* k2, const double* k3,
                 const double* k4, double dt, std::size_t n) {
  const double c = dt / 6.0;
  for (std::size_t i = 0; i < n; ++i) {
    double s = k1[i] + 2.0 * k2[i];
    s = s + 2.0 * k3[i];
    s = s + k4[i];
    y[i] = y[i] + c * s;
  }
}

void mass_flux(double* out, const double* h, const double* u, double hbar, double ubar,
               std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = (hbar + h[i]) * (ubar + u[i]);
}

void advection(double* out, const double* u, const double* du, const double* h,
               const double* dh, double hbar, double ubar, double kappa, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double bolus = kappa * dh[i] / (hbar + h[i]);
    out[i] = (ubar + u[i] - bolus) * du[i];
  }
}

}  // namespace

void montgomery_scalar_columns(double* out, const double* g, const double* rho, const double* w,
                               std::size_t n_r, std::size_t stride, std::size_t begin,
                               std::size_t end, bool divide_by_rho) {
  for (std::size_t j = begin; j < end; ++j) {
    double above = 0.0;
    for (std::size_t i = n_r; i-- > 0;) {
      out[i * stride + j] = above;
      above = above + (w[i] * rho[i]) * g[i * stride + j];
    }
    double below = 0.0;
    for (std::size_t i = 0; i < n_r; ++i) {
      const double half = (0.5 * w[i]) * g[i * stride + j];
      double psi = rho[i] * (below + half);
      psi = psi + out[i * stride + j];
      psi = psi + rho[i] * half;
      out[i * stride + j] = divide_by_rho ? psi / rho[i] : psi;
      below = below + w[i] * g[i * stride + j];
    }
  }
}

namespace {

void montgomery(double* out, const double* g, const double* rho, const double* w,
                std::size_t n_r, std::size_t stride, std::size_t n, bool divide_by_rho) {
  montgomery_scalar_columns(out, g, rho, w, n_r, stride, 0, n, divide_by_rho);
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{"scalar", lincomb, rk4_combine, mass_flux, advection,
                                 montgomery};
  return table;
}

}  // namespace stratlab::kernels
