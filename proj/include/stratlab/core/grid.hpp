#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace stratlab {

/// Uniform periodic grid on the torus [0, L).
class SpatialGrid {
 public:
  SpatialGrid(double length, std::size_t n_x);

  double length() const noexcept { return length_; }
  std::size_t size() const noexcept { return n_; }
  double dx() const noexcept { return length_ / static_cast<double>(n_); }
  double x(std::size_t j) const noexcept { return static_cast<double>(j) * dx(); }
  std::vector<double> points() const;

  bool operator==(const SpatialGrid&) const = default;

 private:
  double length_;
  std::size_t n_;
};

/// Cell-centred partition of the isopycnal coordinate r in (-1, 0).
class LevelGrid {
 public:
  /// Edges must start at -1, end at 0 and increase strictly.
  explicit LevelGrid(std::vector<double> edges);

  static LevelGrid uniform(std::size_t n_r);

  /// Uniform cells on each side of an interior edge at `interface`.
  static LevelGrid with_interface(double interface, std::size_t n_lower, std::size_t n_upper);

  /// Fine uniform cells on [interface - half_width, interface + half_width]
  /// (the interface is the middle edge of the band), coarse uniform cells on
  /// the remaining two intervals.
  static LevelGrid clustered(double interface, double half_width, std::size_t n_band,
                             std::size_t n_outer);

  /// Uniform cells of width 2 band_half_width / n_band (band_half_width <= zone_half_width) on
  /// [interface - band_half_width, interface + band_half_width], cells growing
  /// geometrically by `growth` out to interface -+ zone_half_width, then
  /// n_below and n_above uniform cells on the two remaining intervals. The
  /// outer cells depend only on (interface, zone_half_width, n_below, n_above).
  static LevelGrid graded(double interface, double band_half_width, std::size_t n_band,
                          double zone_half_width, double growth, std::size_t n_below,
                          std::size_t n_above);

  std::size_t size() const noexcept { return weights_.size(); }
  const std::vector<double>& edges() const noexcept { return edges_; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  const std::vector<double>& midpoints() const noexcept { return mid_; }
  double weight(std::size_t i) const { return weights_[i]; }
  double midpoint(std::size_t i) const { return mid_[i]; }

  /// Index k such that edges()[k] == r within `tol`, or size()+1 if none.
  std::size_t find_edge(double r, double tol = 1e-12) const;
  bool has_edge_at(double r, double tol = 1e-12) const { return find_edge(r, tol) <= size(); }

  bool operator==(const LevelGrid&) const = default;

 private:
  std::vector<double> edges_;
  std::vector<double> weights_;
  std::vector<double> mid_;
};

/// Sobolev regularity index s >= 0.
class SobolevIndex {
 public:
  constexpr SobolevIndex() = default;
  explicit SobolevIndex(double s);
  double value() const noexcept { return s_; }

 private:
  double s_ = 0.0;
};

/// Real samples on a SpatialGrid.
class Field1D {
 public:
  Field1D() = default;
  explicit Field1D(std::size_t n, double value = 0.0) : v_(n, value) {}
  explicit Field1D(std::vector<double> values) : v_(std::move(values)) {}

  static Field1D sample(const SpatialGrid& grid, const std::function<double(double)>& f);

  std::size_t size() const noexcept { return v_.size(); }
  double& operator[](std::size_t j) { return v_[j]; }
  double operator[](std::size_t j) const { return v_[j]; }
  double* data() noexcept { return v_.data(); }
  const double* data() const noexcept { return v_.data(); }
  std::span<double> span() noexcept { return v_; }
  std::span<const double> span() const noexcept { return v_; }
  const std::vector<double>& values() const noexcept { return v_; }

  double mean() const;

  bool operator==(const Field1D&) const = default;

 private:
  std::vector<double> v_;
};

/// Real samples on SpatialGrid x LevelGrid, stored level-major: level i
/// occupies [i*n_x, (i+1)*n_x).
class Field2D {
 public:
  Field2D() = default;
  Field2D(std::size_t n_r, std::size_t n_x, double value = 0.0)
      : n_r_(n_r), n_x_(n_x), v_(n_r * n_x, value) {}

  std::size_t levels() const noexcept { return n_r_; }
  std::size_t points() const noexcept { return n_x_; }
  std::size_t size() const noexcept { return v_.size(); }

  double& operator()(std::size_t i, std::size_t j) { return v_[i * n_x_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return v_[i * n_x_ + j]; }
  std::span<double> level(std::size_t i) { return {v_.data() + i * n_x_, n_x_}; }
  std::span<const double> level(std::size_t i) const { return {v_.data() + i * n_x_, n_x_}; }
  Field1D level_field(std::size_t i) const;
  void set_level(std::size_t i, std::span<const double> values);

  double* data() noexcept { return v_.data(); }
  const double* data() const noexcept { return v_.data(); }
  std::span<double> span() noexcept { return v_; }
  std::span<const double> span() const noexcept { return v_; }

  bool operator==(const Field2D&) const = default;

 private:
  std::size_t n_r_ = 0;
  std::size_t n_x_ = 0;
  std::vector<double> v_;
};

/// Throws DomainError naming `what` if any value is NaN or infinite.
void require_finite(std::span<const double> values, const char* what);

}  // namespace stratlab
