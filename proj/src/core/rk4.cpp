#include "stratlab/core/rk4.hpp"

#include <cmath>

#include "stratlab/core/error.hpp"
#include "stratlab/kernels/kernels.hpp"

namespace stratlab {

Rk4Stepper::Rk4Stepper(std::size_t n) : k1_(n), k2_(n), k3_(n), k4_(n), tmp_(n) {}

void Rk4Stepper::step(const Rhs& f, double t, std::span<double> y, double dt) {
  const std::size_t n = size();
  if (y.size() != n) throw DomainError("Rk4Stepper: state size mismatch");
  const auto& kt = kernels::active();
  f(t, y, k1_);
  kt.lincomb(tmp_.data(), y.data(), 0.5 * dt, k1_.data(), n);
  f(t + 0.5 * dt, tmp_, k2_);
  kt.lincomb(tmp_.data(), y.data(), 0.5 * dt, k2_.data(), n);
  f(t + 0.5 * dt, tmp_, k3_);
  kt.lincomb(tmp_.data(), y.data(), dt, k3_.data(), n);
  f(t + dt, tmp_, k4_);
  kt.rk4_combine(y.data(), k1_.data(), k2_.data(), k3_.data(), k4_.data(), dt, n);
}

std::size_t steps_for(double T, double dt_max) {
  if (!(T >= 0.0) || !std::isfinite(T)) throw DomainError("final time must be finite and non-negative");
  if (!(dt_max > 0.0)) throw DomainError("time step must be positive");
  if (T == 0.0) return 0;
  const double raw = T / dt_max;
  auto n = static_cast<std::size_t>(std::ceil(raw - 1e-9 * raw));
  return n == 0 ? 1 : n;
}

}  // namespace stratlab
