// Compiled with -mavx2 only; dispatch.cpp checks CPU support before use.
#include <immintrin.h>

#include "kernels_impl.hpp"

namespace stratlab::kernels {

namespace {

constexpr std::size_t kLanes = 4;

void lincomb(double* out, const double* base, double a, const double* k, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d prod = _mm256_mul_pd(va, _mm256_loadu_pd(k + i));
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(base + i), prod));
  }
  for (; i < n; ++i) out[i] = base[i] + a * k[i];
}

void rk4_combine(double* y, const double* k1, const double* k2, const double* k3,
                 const double* k4, double dt, std::size_t n) {
  const double c = dt / 6.0;
  const __m256d vc = _mm256_set1_pd(c);
  const __m256d two = _mm256_set1_pd(2.0);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    __m256d s = _mm256_add_pd(_mm256_loadu_pd(k1 + i), _mm256_mul_pd(two, _mm256_loadu_pd(k2 + i)));
    s = _mm256_add_pd(s, _mm256_mul_pd(two, _mm256_loadu_pd(k3 + i)));
    s = _mm256_add_pd(s, _mm256_loadu_pd(k4 + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), _mm256_mul_pd(vc, s)));
  }
  for (; i < n; ++i) {
    double s = k1[i] + 2.0 * k2[i];
    s = s + 2.0 * k3[i];
    s = s + k4[i];
    y[i] = y[i] + c * s;
  }
}

void mass_flux(double* out, const double* h, const double* u, double hbar, double ubar,
               std::size_t n) {
  const __m256d vh = _mm256_set1_pd(hbar);
  const __m256d vu = _mm256_set1_pd(ubar);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d depth = _mm256_add_pd(vh, _mm256_loadu_pd(h + i));
    const __m256d vel = _mm256_add_pd(vu, _mm256_loadu_pd(u + i));
    _mm256_storeu_pd(out + i, _mm256_mul_pd(depth, vel));
  }
  for (; i < n; ++i) out[i] = (hbar + h[i]) * (ubar + u[i]);
}

void advection(double* out, const double* u, const double* du, const double* h,
               const double* dh, double hbar, double ubar, double kappa, std::size_t n) {
  const __m256d vh = _mm256_set1_pd(hbar);
  const __m256d vu = _mm256_set1_pd(ubar);
  const __m256d vk = _mm256_set1_pd(kappa);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d depth = _mm256_add_pd(vh, _mm256_loadu_pd(h + i));
    const __m256d bolus = _mm256_div_pd(_mm256_mul_pd(vk, _mm256_loadu_pd(dh + i)), depth);
    const __m256d vel = _mm256_sub_pd(_mm256_add_pd(vu, _mm256_loadu_pd(u + i)), bolus);
    _mm256_storeu_pd(out + i, _mm256_mul_pd(vel, _mm256_loadu_pd(du + i)));
  }
  for (; i < n; ++i) {
    const double bolus = kappa * dh[i] / (hbar + h[i]);
    out[i] = (ubar + u[i] - bolus) * du[i];
  }
}

void montgomery(double* out, const double* g, const double* rho, const double* w,
                std::size_t n_r, std::size_t stride, std::size_t n, bool divide_by_rho) {
  const __m256d half_factor = _mm256_set1_pd(0.5);
  std::size_t j = 0;
  for (; j + kLanes <= n; j += kLanes) {
    __m256d above = _mm256_setzero_pd();
    for (std::size_t i = n_r; i-- > 0;) {
      _mm256_storeu_pd(out + i * stride + j, above);
      const __m256d wr = _mm256_set1_pd(w[i] * rho[i]);
      above = _mm256_add_pd(above, _mm256_mul_pd(wr, _mm256_loadu_pd(g + i * stride + j)));
    }
    __m256d below = _mm256_setzero_pd();
    for (std::size_t i = 0; i < n_r; ++i) {
      const __m256d gi = _mm256_loadu_pd(g + i * stride + j);
      const __m256d vr = _mm256_set1_pd(rho[i]);
      const __m256d vw = _mm256_set1_pd(w[i]);
      const __m256d half = _mm256_mul_pd(_mm256_mul_pd(half_factor, vw), gi);
      __m256d psi = _mm256_mul_pd(vr, _mm256_add_pd(below, half));
      psi = _mm256_add_pd(psi, _mm256_loadu_pd(out + i * stride + j));
      psi = _mm256_add_pd(psi, _mm256_mul_pd(vr, half));
      if (divide_by_rho) psi = _mm256_div_pd(psi, vr);
      _mm256_storeu_pd(out + i * stride + j, psi);
      below = _mm256_add_pd(below, _mm256_mul_pd(vw, gi));
    }
  }
  montgomery_scalar_columns(out, g, rho, w, n_r, stride, j, n, divide_by_rho);
}

}  // namespace

const KernelTable& avx2_table() {
  static const KernelTable table{"avx2", lincomb, rk4_combine, mass_flux, advection, montgomery};
  return table;
}

}  // namespace stratlab::kernels
