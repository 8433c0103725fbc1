#include "stratlab/harness/fit.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <cmath>

#include "stratlab/core/error.hpp"

namespace stratlab::harness {

bool SlopeFit::within(double expected, double tolerance) const {
  return std::isfinite(slope) && std::abs(slope - expected) <= tolerance;
}

SlopeFit fit_slope(std::span<const double> xs, std::span<const double> ys, double confidence,
                   std::size_t min_points) {
  if (xs.size() != ys.size()) throw DomainError("fit_slope: xs and ys differ in length");
  if (xs.size() < std::max<std::size_t>(min_points, 2)) throw DomainError("fit_slope: too few points");
  if (!(confidence > 0.0 && confidence < 1.0)) throw DomainError("fit_slope: confidence must lie in (0,1)");
  const std::size_t n = xs.size();
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(xs[i] > 0.0) || !(ys[i] > 0.0) || !std::isfinite(xs[i]) || !std::isfinite(ys[i])) {
      throw DomainError("fit_slope: values must be positive and finite");
    }
    lx[i] = std::log(xs[i]);
    ly[i] = std::log(ys[i]);
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) throw DomainError("fit_slope: abscissae are all equal");

  SlopeFit f;
  f.points = n;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ly[i] - (f.intercept + f.slope * lx[i]);
    sse += r * r;
  }
  const double dof = static_cast<double>(n) - 2.0;
  if (dof > 0.0) {
    f.standard_error = std::sqrt(sse / dof / sxx);
    const boost::math::students_t dist(dof);
    const double t = boost::math::quantile(boost::math::complement(dist, (1.0 - confidence) / 2.0));
    f.lo = f.slope - t * f.standard_error;
    f.hi = f.slope + t * f.standard_error;
  } else {
    f.lo = f.hi = f.slope;
  }
  return f;
}

std::vector<double> observed_orders(std::span<const double> errors, double ratio) {
  if (!(ratio > 1.0)) throw DomainError("observed_orders: ratio must exceed 1");
  std::vector<double> out;
  for (std::size_t k = 0; k + 1 < errors.size(); ++k) {
    if (!(errors[k] > 0.0) || !(errors[k + 1] > 0.0)) throw DomainError("observed_orders: errors must be positive");
    out.push_back(std::log(errors[k] / errors[k + 1]) / std::log(ratio));
  }
  return out;
}

}  // namespace stratlab::harness
