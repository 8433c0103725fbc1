#include "stratlab/core/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "stratlab/core/error.hpp"

namespace stratlab {

SpatialGrid::SpatialGrid(double length, std::size_t n_x) : length_(length), n_(n_x) {
  if (!(length > 0.0) || !std::isfinite(length)) {
    throw DomainError("SpatialGrid: length must be positive and finite");
  }
  if (n_x < 8 || n_x % 2 != 0) {
    throw DomainError("SpatialGrid: n_x must be even and >= 8, got " + std::to_string(n_x));
  }
}

std::vector<double> SpatialGrid::points() const {
  std::vector<double> xs(n_);
  for (std::size_t j = 0; j < n_; ++j) xs[j] = x(j);
  return xs;
}

LevelGrid::LevelGrid(std::vector<double> edges) : edges_(std::move(edges)) {
  if (edges_.size() < 2) throw DomainError("LevelGrid: need at least one cell");
  if (edges_.front() != -1.0 || edges_.back() != 0.0) {
    throw DomainError("LevelGrid: edges must run from -1 to 0");
  }
  weights_.resize(edges_.size() - 1);
  mid_.resize(edges_.size() - 1);
  for (std::size_t i = 0; i + 1 < edges_.size(); ++i) {
    const double w = edges_[i + 1] - edges_[i];
    if (!(w > 0.0)) throw DomainError("LevelGrid: edges must increase strictly");
    weights_[i] = w;
    mid_[i] = 0.5 * (edges_[i] + edges_[i + 1]);
  }
  const double total = std::accumulate(weights_.begin(), weights_.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-14) throw DomainError("LevelGrid: weights do not sum to 1");
}

LevelGrid LevelGrid::uniform(std::size_t n_r) {
  if (n_r == 0) throw DomainError("LevelGrid::uniform: n_r must be positive");
  std::vector<double> e(n_r + 1);
  for (std::size_t i = 0; i <= n_r; ++i) {
    e[i] = -1.0 + static_cast<double>(i) / static_cast<double>(n_r);
  }
  e.back() = 0.0;
  return LevelGrid(std::move(e));
}

namespace {

void append_uniform(std::vector<double>& e, double a, double b, std::size_t n) {
  for (std::size_t i = 1; i <= n; ++i) {
    e.push_back(i == n ? b : a + (b - a) * static_cast<double>(i) / static_cast<double>(n));
  }
}

}  // namespace

LevelGrid LevelGrid::with_interface(double interface, std::size_t n_lower, std::size_t n_upper) {
  if (!(interface > -1.0 && interface < 0.0) || n_lower == 0 || n_upper == 0) {
    throw DomainError("LevelGrid::with_interface: interface must lie in (-1,0), counts positive");
  }
  std::vector<double> e{-1.0};
  append_uniform(e, -1.0, interface, n_lower);
  append_uniform(e, interface, 0.0, n_upper);
  return LevelGrid(std::move(e));
}

LevelGrid LevelGrid::clustered(double interface, double half_width, std::size_t n_band,
                               std::size_t n_outer) {
  const double lo = interface - half_width;
  const double hi = interface + half_width;
  if (!(lo > -1.0 && hi < 0.0) || half_width <= 0.0) {
    throw DomainError("LevelGrid::clustered: band must lie inside (-1,0)");
  }
  if (n_band < 2 || n_band % 2 != 0 || n_outer < 2) {
    throw DomainError("LevelGrid::clustered: n_band must be even >= 2, n_outer >= 2");
  }
  const double len_lower = lo + 1.0;
  const double len_upper = -hi;
  auto n_lower = static_cast<std::size_t>(
      std::lround(static_cast<double>(n_outer) * len_lower / (len_lower + len_upper)));
  n_lower = std::clamp<std::size_t>(n_lower, 1, n_outer - 1);
  const std::size_t n_upper = n_outer - n_lower;

  std::vector<double> e{-1.0};
  append_uniform(e, -1.0, lo, n_lower);
  append_uniform(e, lo, interface, n_band / 2);
  append_uniform(e, interface, hi, n_band / 2);
  append_uniform(e, hi, 0.0, n_upper);
  return LevelGrid(std::move(e));
}

LevelGrid LevelGrid::graded(double interface, double band_half_width_in, std::size_t n_band,
                            double zone_half_width, double growth, std::size_t n_below,
                            std::size_t n_above) {
  const double lo = interface - zone_half_width;
  const double hi = interface + zone_half_width;
  // A band that reaches the zone up to rounding is the zone.
  const double band_half_width =
      band_half_width_in > zone_half_width && band_half_width_in <= zone_half_width * (1.0 + 1e-12)
          ? zone_half_width
          : band_half_width_in;
  if (!(band_half_width > 0.0) || !(band_half_width <= zone_half_width) || !(lo > -1.0 && hi < 0.0)) {
    throw DomainError("LevelGrid::graded: need 0 < band <= zone and the zone inside (-1,0)");
  }
  if (n_band < 2 || n_band % 2 != 0 || n_below < 1 || n_above < 1 || !(growth >= 1.0)) {
    throw DomainError("LevelGrid::graded: n_band must be even >= 2, outer counts >= 1, growth >= 1");
  }
  // Offsets from the interface, shared by both sides.
  const double d = 2.0 * band_half_width / static_cast<double>(n_band);
  std::vector<double> off;
  for (std::size_t k = 0; k <= n_band / 2; ++k) off.push_back(static_cast<double>(k) * d);
  off.back() = band_half_width;
  double h = d;
  while (off.back() < zone_half_width) {
    h *= growth;
    if (off.back() + 1.5 * h >= zone_half_width) {
      off.push_back(zone_half_width);
      break;
    }
    off.push_back(off.back() + h);
  }

  std::vector<double> e{-1.0};
  append_uniform(e, -1.0, lo, n_below);
  for (std::size_t k = off.size() - 1; k-- > 0;) e.push_back(interface - off[k]);
  for (std::size_t k = 1; k < off.size(); ++k) e.push_back(interface + off[k]);
  append_uniform(e, hi, 0.0, n_above);
  return LevelGrid(std::move(e));
}

std::size_t LevelGrid::find_edge(double r, double tol) const {
  for (std::size_t k = 0; k < edges_.size(); ++k) {
    if (std::abs(edges_[k] - r) <= tol) return k;
  }
  return size() + 1;
}

SobolevIndex::SobolevIndex(double s) : s_(s) {
  if (!(s >= 0.0) || !std::isfinite(s)) throw DomainError("SobolevIndex: s must be >= 0");
}

Field1D Field1D::sample(const SpatialGrid& grid, const std::function<double(double)>& f) {
  Field1D out(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) out[j] = f(grid.x(j));
  return out;
}

double Field1D::mean() const {
  if (v_.empty()) return 0.0;
  return std::accumulate(v_.begin(), v_.end(), 0.0) / static_cast<double>(v_.size());
}

Field1D Field2D::level_field(std::size_t i) const {
  auto s = level(i);
  return Field1D(std::vector<double>(s.begin(), s.end()));
}

void Field2D::set_level(std::size_t i, std::span<const double> values) {
  if (values.size() != n_x_) throw DomainError("Field2D::set_level: size mismatch");
  std::copy(values.begin(), values.end(), v_.begin() + static_cast<std::ptrdiff_t>(i * n_x_));
}

void require_finite(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) throw DomainError(std::string(what) + ": non-finite value");
  }
}

}  // namespace stratlab
