#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace stratlab {

/// Classical fourth-order Runge-Kutta on a flat state vector, using the
/// active kernel table for the stage combinations.
class Rk4Stepper {
 public:
  using Rhs = std::function<void(double t, std::span<const double> y, std::span<double> dydt)>;

  explicit Rk4Stepper(std::size_t n);

  std::size_t size() const noexcept { return k1_.size(); }
  void step(const Rhs& f, double t, std::span<double> y, double dt);

 private:
  std::vector<double> k1_, k2_, k3_, k4_, tmp_;
};

/// Number of equal steps covering [0, T] with step at most dt_max.
std::size_t steps_for(double T, double dt_max);

}  // namespace stratlab
