#include <cmath>
#include <numbers>

#include "stratlab/core/error.hpp"
#include "stratlab/hyperbolicity.hpp"

namespace stratlab {

namespace {

Polyline oval(double rho, std::size_t samples) {
  Polyline pl;
  pl.id = 0;
  pl.closed = true;
  const double a = std::sqrt(1.0 - rho);
  // Upper arc left to right, lower arc right to left.
  for (int side = 0; side < 2; ++side) {
    const double sign = side == 0 ? 1.0 : -1.0;
    for (std::size_t k = 0; k < samples; ++k) {
      const double theta =
          -std::numbers::pi / 2 + std::numbers::pi * static_cast<double>(k) / static_cast<double>(samples - 1);
      const double ps = sign * a * std::sin(theta);
      const double pb = std::sqrt(std::max(0.0, 1.0 - rho / (1.0 - ps * ps)));
      pl.p_s.push_back(ps);
      pl.p_b.push_back(sign * pb);
    }
  }
  return pl;
}

Polyline branch(int id, double sign_s, double sign_b, double rho, double window, std::size_t samples) {
  Polyline pl;
  pl.id = id;
  // p_s = sign_s (1 + delta), geometric in delta to resolve the vertical asymptote.
  const double d_min = 1e-10;
  const double d_max = window - 1.0;
  const double ratio = std::log(d_max / d_min);
  for (std::size_t k = 0; k < samples; ++k) {
    const double delta = d_min * std::exp(ratio * static_cast<double>(k) / static_cast<double>(samples - 1));
    pl.p_s.push_back(sign_s * (1.0 + delta));
    pl.p_b.push_back(sign_b * std::sqrt(1.0 + rho / (delta * (2.0 + delta))));
  }
  return pl;
}

}  // namespace

Atlas atlas(double h_ratio, double rho_ratio, const std::vector<double>& intercepts,
            const AtlasOptions& options) {
  if (!(rho_ratio > 0.0 && rho_ratio < 1.0)) throw DomainError("atlas: rho_ratio must lie in (0,1)");
  if (!(h_ratio > 0.0)) throw DomainError("atlas: h_ratio must be positive");
  if (options.samples_per_branch < 16) throw DomainError("atlas: too few samples");
  if (!(options.window > 2.0)) throw DomainError("atlas: window must exceed 2");

  Atlas a;
  a.h_ratio = h_ratio;
  a.rho_ratio = rho_ratio;
  a.slope = std::sqrt(h_ratio);
  a.intercepts = intercepts;
  a.curve.push_back(oval(rho_ratio, options.samples_per_branch));
  a.curve.push_back(branch(1, 1.0, 1.0, rho_ratio, options.window, options.samples_per_branch));
  a.curve.push_back(branch(2, 1.0, -1.0, rho_ratio, options.window, options.samples_per_branch));
  a.curve.push_back(branch(3, -1.0, 1.0, rho_ratio, options.window, options.samples_per_branch));
  a.curve.push_back(branch(4, -1.0, -1.0, rho_ratio, options.window, options.samples_per_branch));
  for (std::size_t k = 0; k < intercepts.size(); ++k) {
    Polyline line;
    line.id = 100 + static_cast<int>(k);
    for (double ps : {-options.line_extent, options.line_extent}) {
      line.p_s.push_back(ps);
      line.p_b.push_back(a.slope * ps + intercepts[k]);
    }
    a.lines.push_back(std::move(line));
  }
  return a;
}

int count_intersections(const Atlas& a, double intercept) {
  int crossings = 0;
  for (const Polyline& pl : a.curve) {
    const std::size_t n = pl.p_s.size();
    auto side = [&](std::size_t k) { return pl.p_b[k] - a.slope * pl.p_s[k] - intercept >= 0.0; };
    for (std::size_t k = 1; k < n; ++k) crossings += side(k) != side(k - 1);
    if (pl.closed && n > 1) crossings += side(0) != side(n - 1);
  }
  return crossings;
}

}  // namespace stratlab
