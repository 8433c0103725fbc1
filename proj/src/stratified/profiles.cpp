#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "stratlab/core/csv.hpp"
#include "stratlab/core/error.hpp"
#include "stratlab/kernels/kernels.hpp"
#include "stratlab/stratified.hpp"

namespace stratlab {

namespace {

std::size_t interface_index(const BilayerParams& params, const LevelGrid& levels) {
  const std::size_t k = levels.find_edge(-params.Hbar_s);
  if (k > levels.size() || k == 0 || k == levels.size()) {
    throw DomainError("embed_bilayer: the level grid needs an interior edge at r = -Hbar_s");
  }
  return k;
}

}  // namespace

StratifiedProfile bilayer_profile(const BilayerParams& params, const LevelGrid& levels) {
  params.check_physical();
  const std::size_t k = interface_index(params, levels);
  StratifiedProfile p;
  p.levels = levels;
  p.rho.resize(levels.size());
  p.ubar.resize(levels.size());
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const bool upper = i >= k;
    p.rho[i] = upper ? params.rho_s : params.rho_b;
    p.ubar[i] = upper ? params.Ubar_s : params.Ubar_b;
  }
  return p;
}

std::pair<StratifiedProfile, StratifiedState> embed_bilayer(const BilayerState& s, const BilayerParams& params,
                                                            const LevelGrid& levels) {
  StratifiedProfile profile = bilayer_profile(params, levels);
  const std::size_t k = interface_index(params, levels);
  const std::size_t n = s.size();
  StratifiedState out = StratifiedState::zero(levels.size(), n);
  out.t = s.t;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const bool upper = i >= k;
    const Field1D& H = upper ? s.H_s : s.H_b;
    const Field1D& U = upper ? s.U_s : s.U_b;
    const double hbar = upper ? params.Hbar_s : params.Hbar_b;
    for (std::size_t j = 0; j < n; ++j) {
      out.h(i, j) = H[j] / hbar;
      out.u(i, j) = U[j];
    }
  }
  return {std::move(profile), std::move(out)};
}

BilayerState layer_average(const StratifiedState& s, const BilayerParams& params, const LevelGrid& levels) {
  const std::size_t k = interface_index(params, levels);
  const std::size_t n = s.h.points();
  if (s.h.levels() != levels.size()) throw DomainError("layer_average: level mismatch");
  BilayerState b = BilayerState::zero(n);
  b.t = s.t;
  double wl = 0.0, wu = 0.0;
  for (std::size_t i = 0; i < levels.size(); ++i) (i >= k ? wu : wl) += levels.weight(i);
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const bool upper = i >= k;
    const double w = levels.weight(i);
    for (std::size_t j = 0; j < n; ++j) {
      // Layer thickness is the integral of (h) over the layer's r-interval.
      (upper ? b.H_s : b.H_b)[j] += w * s.h(i, j);
      (upper ? b.U_s : b.U_b)[j] += w * s.u(i, j) / (upper ? wu : wl);
    }
  }
  return b;
}

std::string to_string(PycnoclineShape s) {
  switch (s) {
    case PycnoclineShape::Tanh: return "tanh";
    case PycnoclineShape::Erf: return "erf";
    case PycnoclineShape::PiecewiseLinear: return "piecewise-linear";
  }
  return "unknown";
}

PycnoclineShape pycnocline_shape_from_string(const std::string& s) {
  if (s == "tanh") return PycnoclineShape::Tanh;
  if (s == "erf") return PycnoclineShape::Erf;
  if (s == "piecewise-linear") return PycnoclineShape::PiecewiseLinear;
  throw ConfigError("unknown pycnocline shape '" + s + "'");
}

namespace {

/// Fraction of the upper-layer value at signed distance z = r + Hbar_s.
double upper_fraction(PycnoclineShape shape, double z, double eps) {
  switch (shape) {
    case PycnoclineShape::Tanh: return 0.5 * (1.0 + std::tanh(z / eps));
    case PycnoclineShape::Erf: return 0.5 * (1.0 + std::erf(z / eps));
    case PycnoclineShape::PiecewiseLinear: return 0.5 * (1.0 + std::clamp(z / eps, -1.0, 1.0));
  }
  return 0.0;
}

/// integral over [0, a] of |fraction - step| in z, one side of the interface.
double side_distance(PycnoclineShape shape, double a, double eps) {
  switch (shape) {
    case PycnoclineShape::Tanh:
      // (1/2)(a - eps ln cosh(a/eps)), rewritten to avoid overflow.
      return 0.5 * eps * (std::numbers::ln2 - std::log1p(std::exp(-2.0 * a / eps)));
    case PycnoclineShape::Erf: {
      const double y = a / eps;
      return 0.5 * eps * (y * std::erfc(y) + (1.0 - std::exp(-y * y)) / std::sqrt(std::numbers::pi));
    }
    case PycnoclineShape::PiecewiseLinear: return eps / 4.0;
  }
  return 0.0;
}

}  // namespace

SmoothedProfile smooth_pycnocline(const PycnoclineSpec& spec, const LevelGrid& levels) {
  const BilayerParams& p = spec.params;
  p.check_physical();
  const double eps = spec.epsilon;
  if (!(eps > 0.0) || !(eps < std::min(p.Hbar_s, p.Hbar_b) / 2.0)) {
    throw DomainError("smooth_pycnocline: epsilon must lie in (0, min(Hbar_s, Hbar_b)/2)");
  }
  if (std::abs(p.Hbar_s + p.Hbar_b - 1.0) > 1e-12) {
    throw DomainError("smooth_pycnocline: reference depths must sum to 1");
  }
  SmoothedProfile out;
  out.profile.levels = levels;
  out.profile.rho.resize(levels.size());
  out.profile.ubar.resize(levels.size());
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const double r = levels.midpoint(i);
    const double z = r + p.Hbar_s;
    const double f = upper_fraction(spec.shape, z, eps);
    out.profile.rho[i] = p.rho_b + (p.rho_s - p.rho_b) * f;
    out.profile.ubar[i] = p.Ubar_b + (p.Ubar_s - p.Ubar_b) * f;
    const bool upper = z > 0.0;
    const double rho_bl = upper ? p.rho_s : p.rho_b;
    const double u_bl = upper ? p.Ubar_s : p.Ubar_b;
    out.rho_l1_sampled += levels.weight(i) * std::abs(out.profile.rho[i] - rho_bl);
    out.ubar_l1_sampled += levels.weight(i) * std::abs(out.profile.ubar[i] - u_bl);
  }
  const double sides = side_distance(spec.shape, p.Hbar_s, eps) + side_distance(spec.shape, p.Hbar_b, eps);
  out.rho_l1 = std::abs(p.rho_s - p.rho_b) * sides;
  out.ubar_l1 = std::abs(p.Ubar_s - p.Ubar_b) * sides;
  return out;
}

LipschitzCheck montgomery_lipschitz_check(const StratifiedProfile& rho1, const StratifiedProfile& rho2,
                                          const Field2D& h) {
  rho1.validate();
  rho2.validate();
  if (!(rho1.levels == rho2.levels)) throw DomainError("lipschitz check: level grids differ");
  const std::size_t nr = rho1.size();
  if (h.levels() != nr) throw DomainError("lipschitz check: field does not match the level grid");
  const std::size_t n = h.points();
  const auto& w = rho1.levels.weights();

  Field2D p1(nr, n), p2(nr, n);
  const auto& kt = kernels::active();
  kt.montgomery(p1.data(), h.data(), rho1.rho.data(), w.data(), nr, n, n, true);
  kt.montgomery(p2.data(), h.data(), rho2.rho.data(), w.data(), nr, n, n, true);

  LipschitzCheck out;
  out.M = std::max(rho1.bound(), rho2.bound());
  const double M = out.M;
  double l1 = 0.0;
  for (std::size_t i = 0; i < nr; ++i) l1 += w[i] * std::abs(rho1.rho[i] - rho2.rho[i]);
  std::vector<double> hmax(n, 0.0);
  for (std::size_t i = 0; i < nr; ++i) {
    for (std::size_t j = 0; j < n; ++j) hmax[j] = std::max(hmax[j], std::abs(h(i, j)));
  }
  out.level_ratio.assign(nr, 0.0);
  for (std::size_t i = 0; i < nr; ++i) {
    const double coef = M * M * M * std::abs(rho1.rho[i] - rho2.rho[i]) + M * l1;
    for (std::size_t j = 0; j < n; ++j) {
      const double lhs = std::abs(p1(i, j) - p2(i, j));
      const double rhs = coef * hmax[j];
      out.max_lhs = std::max(out.max_lhs, lhs);
      double ratio = 0.0;
      if (rhs > 0.0) {
        ratio = lhs / rhs;
      } else if (lhs > 0.0) {
        ratio = std::numeric_limits<double>::infinity();
      }
      out.level_ratio[i] = std::max(out.level_ratio[i], ratio);
    }
    out.max_ratio = std::max(out.max_ratio, out.level_ratio[i]);
  }
  return out;
}

StratifiedProfile read_profile_csv(const std::string& path, const LevelGrid& levels) {
  const CsvTable t = read_csv(path);
  if (t.rows.size() != levels.size()) throw ConfigError(path + ": row count does not match the level grid");
  const std::size_t cr = t.column("r"), crho = t.column("rho"), cu = t.column("ubar");
  StratifiedProfile p;
  p.levels = levels;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (std::abs(t.rows[i][cr] - levels.midpoint(i)) > 1e-9) {
      throw ConfigError(path + ": r column does not match the level midpoints at row " + std::to_string(i + 1));
    }
    p.rho.push_back(t.rows[i][crho]);
    p.ubar.push_back(t.rows[i][cu]);
  }
  try {
    p.validate();
  } catch (const DomainError& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return p;
}

void write_profile_csv(const std::string& path, const StratifiedProfile& profile) {
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < profile.size(); ++i) {
    rows.push_back({profile.levels.midpoint(i), profile.rho[i], profile.ubar[i]});
  }
  write_csv(path, {"r", "rho", "ubar"}, rows);
}

StratifiedState read_stratified_csv(const std::string& path, const SpatialGrid& grid, const LevelGrid& levels) {
  const CsvTable t = read_csv(path);
  const std::size_t n = grid.size(), nr = levels.size();
  if (t.rows.size() != n * nr) throw ConfigError(path + ": expected n_x * n_r rows");
  const std::size_t cx = t.column("x"), cr = t.column("r"), ch = t.column("h"), cu = t.column("u");
  StratifiedState s = StratifiedState::zero(nr, n);
  // Rows ordered level-major: all x for level 0, then level 1, ...
  for (std::size_t i = 0; i < nr; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const auto& row = t.rows[i * n + j];
      if (std::abs(row[cx] - grid.x(j)) > 1e-9 * (1.0 + grid.length()) ||
          std::abs(row[cr] - levels.midpoint(i)) > 1e-9) {
        throw ConfigError(path + ": (x, r) columns do not match the grids");
      }
      s.h(i, j) = row[ch];
      s.u(i, j) = row[cu];
    }
  }
  return s;
}

void write_stratified_csv(const std::string& path, const SpatialGrid& grid, const LevelGrid& levels,
                          const StratifiedState& s) {
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    for (std::size_t j = 0; j < grid.size(); ++j) rows.push_back({grid.x(j), levels.midpoint(i), s.h(i, j), s.u(i, j)});
  }
  write_csv(path, {"x", "r", "h", "u"}, rows);
}

}  // namespace stratlab
