#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace stratlab::harness {

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double standard_error = 0.0;
  /// Two-sided confidence interval for the slope (Student t, n - 2 dof).
  double lo = 0.0;
  double hi = 0.0;
  std::size_t points = 0;

  bool within(double expected, double tolerance) const;
};

/// Least squares of log y on log x. Needs at least `min_points` points, all
/// positive; throws DomainError otherwise.
SlopeFit fit_slope(std::span<const double> xs, std::span<const double> ys,
                   double confidence = 0.95, std::size_t min_points = 4);

/// Orders log(e_k / e_{k+1}) / log(ratio) between successive refinements.
std::vector<double> observed_orders(std::span<const double> errors, double ratio = 2.0);

}  // namespace stratlab::harness
