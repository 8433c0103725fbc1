#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <string>
#include <vector>

namespace stratlab {

/// Pointwise state of the two-layer system: densities, full layer depths and
/// full layer velocities (reference values included).
struct StatePoint {
  double rho_s = 1.0;
  double rho_b = 1.0;
  double H_s = 0.5;
  double H_b = 0.5;
  double U_s = 0.0;
  double U_b = 0.0;

  double rho_ratio() const noexcept { return rho_s / rho_b; }
  double depth_ratio() const noexcept { return H_s / H_b; }
  /// |U_b - U_s| / sqrt(H_b)
  double scaled_shear() const;
};

/// Monic quartic c[0] + c[1] x + c[2] x^2 + c[3] x^3 + c[4] x^4.
struct Quartic {
  std::array<double, 5> c{};

  double operator()(double x) const;
  std::complex<double> operator()(std::complex<double> x) const;
  std::complex<double> derivative(std::complex<double> x) const;
};

/// P(lambda) = ((U_b - lambda)^2 - H_b)((U_s - lambda)^2 - H_s) - (rho_s/rho_b) H_s H_b.
/// Requires positive depths and rho_b > 0; rho_s >= 0 is allowed here.
Quartic characteristic_polynomial(const StatePoint& p);

/// Roots as eigenvalues of the companion matrix, each polished by one Newton
/// step when that lowers |P|.
std::array<std::complex<double>, 4> quartic_roots(const Quartic& q);

/// Scale-aware tolerance 1e-9 (1 + max |root|) separating real roots from
/// complex pairs.
double real_root_tolerance(const std::array<std::complex<double>, 4>& roots);
int count_real_roots(const std::array<std::complex<double>, 4>& roots);

/// Number of real characteristic speeds at p (companion route).
int real_root_count(const StatePoint& p);

enum class Regime { Hyperbolic, Elliptic, FastHyperbolic };
std::string to_string(Regime r);

struct CriticalFroude {
  double minus = 0.0;
  double plus = 0.0;
};

struct CriticalFroudeOptions {
  /// Initial number of uniform scan points on [0, c_max] used to bracket the
  /// two transitions; doubled until both are found.
  std::size_t scan_points = 64;
  double tolerance = 1e-10;
  /// +1 scans positive intercepts, -1 negative ones (same thresholds by symmetry).
  int sign = 1;
};

/// Intercept thresholds Fr_- < Fr_+ of the real-root count of P, normalised to
/// H_b = 1, H_s = h_ratio, U_s = 0, U_b = sign * c.
CriticalFroude critical_froude(double h_ratio, double rho_ratio,
                               const CriticalFroudeOptions& options = {});

struct HyperbolicityReport {
  Quartic polynomial;
  std::array<std::complex<double>, 4> roots{};
  int real_roots = 0;
  Regime regime = Regime::Hyperbolic;
  double fr_minus = 0.0;
  double fr_plus = 0.0;
  double shear = 0.0;
  /// Fr_- - |U_b - U_s| / sqrt(H_b)
  double margin = 0.0;
  double root_tolerance = 0.0;
  /// Set when two roots are within 1e3 root tolerances of coalescing, or the
  /// shear lies within 1e-8 of a threshold.
  bool near_degenerate = false;
};

/// Requires 0 < rho_s < rho_b and positive depths.
HyperbolicityReport classify(const StatePoint& p);

using Mat4 = Eigen::Matrix4d;

/// Quasilinear system matrix A(U) of the non-diffusive two-layer equations.
Mat4 system_matrix(const StatePoint& p);

/// S^lambda(U) from the explicit symmetrizer construction.
Mat4 symmetrizer_matrix(const StatePoint& p, double lambda);

struct Symmetrizer {
  double lambda = 0.0;
  Mat4 S = Mat4::Zero();
  Mat4 SA = Mat4::Zero();
  std::array<double, 4> leading_minors{};
  /// All four leading principal minors positive.
  bool certified = false;
  /// The midpoint had to be clipped into [min U, max U].
  bool clipped = false;
  /// Clipping left (lambda_2, lambda_3); lambda came from the golden-section search.
  bool fallback = false;
  /// Sorted real roots lambda_1 < ... < lambda_4.
  std::array<double, 4> sorted_roots{};
};

/// Requires the Hyperbolic regime with positive margin.
Symmetrizer symmetrizer(const StatePoint& p);

/// Membership in the compact hyperbolic set with margin sigma in (0,1).
bool in_hyperbolic_set(const StatePoint& p, double sigma);

/// Smallest eigenvalue of a symmetric 4x4 matrix.
double min_eigenvalue(const Mat4& S);

// ---------------------------------------------------------------------------
// Geometric picture: the quartic curve (p_s^2 - 1)(p_b^2 - 1) = rho_ratio and
// straight lines p_b = slope * p_s + intercept with slope sqrt(H_s/H_b).

struct Polyline {
  /// 0: inner oval (closed); 1..4: hyperbolic branches; 100+k: k-th line.
  int id = 0;
  bool closed = false;
  std::vector<double> p_s;
  std::vector<double> p_b;
};

struct AtlasOptions {
  std::size_t samples_per_branch = 4000;
  /// Extent of the hyperbolic branches in |p_s|.
  double window = 50.0;
  /// Half-width of the straight-line segments in p_s.
  double line_extent = 4.0;
};

struct Atlas {
  double h_ratio = 0.0;
  double rho_ratio = 0.0;
  double slope = 0.0;
  std::vector<double> intercepts;
  std::vector<Polyline> curve;
  std::vector<Polyline> lines;
};

Atlas atlas(double h_ratio, double rho_ratio, const std::vector<double>& intercepts,
            const AtlasOptions& options = {});

/// Number of crossings of p_b = slope p_s + intercept with the sampled curve.
int count_intersections(const Atlas& a, double intercept);

}  // namespace stratlab
