#include <cmath>
#include <limits>
#include <numbers>

#include "stratlab/bilayer.hpp"
#include "stratlab/core/csv.hpp"
#include "stratlab/core/error.hpp"

namespace stratlab {

BdResidual bd_residual(const SpatialGrid& grid, const BilayerParams& params,
                       std::span<const BilayerState> window, double dt) {
  if (window.size() != 5) throw DomainError("bd_residual: need five states");
  if (!(dt > 0.0)) throw DomainError("bd_residual: dt must be positive");
  const std::size_t n = grid.size();
  for (const auto& s : window) {
    if (s.size() != n) throw DomainError("bd_residual: grid mismatch");
  }

  std::array<Field1D, 5> vs, vb;
  for (std::size_t q = 0; q < 5; ++q) {
    auto [a, b] = total_velocity(grid, window[q], params);
    vs[q] = std::move(a);
    vb[q] = std::move(b);
  }
  const auto ddt = [&](auto get) {
    Field1D d(n);
    const double c = 1.0 / (12.0 * dt);
    for (std::size_t j = 0; j < n; ++j) {
      d[j] = (get(0)[j] - 8.0 * get(1)[j] + 8.0 * get(3)[j] - get(4)[j]) * c;
    }
    return d;
  };
  const Field1D dHs = ddt([&](std::size_t q) -> const Field1D& { return window[q].H_s; });
  const Field1D dHb = ddt([&](std::size_t q) -> const Field1D& { return window[q].H_b; });
  const Field1D dVs = ddt([&](std::size_t q) -> const Field1D& { return vs[q]; });
  const Field1D dVb = ddt([&](std::size_t q) -> const Field1D& { return vb[q]; });

  const BilayerState& mid = window[2];
  SpectralOps ops(grid);
  const auto d1 = [&](const Field1D& f) {
    Field1D out(n);
    ops.derivative(f.span(), 1, out.span());
    return out;
  };
  const auto d2 = [&](const Field1D& f) {
    Field1D out(n);
    ops.derivative(f.span(), 2, out.span());
    return out;
  };

  const Field1D* H[2] = {&mid.H_s, &mid.H_b};
  const Field1D* V[2] = {&vs[2], &vb[2]};
  const Field1D* dH[2] = {&dHs, &dHb};
  const Field1D* dV[2] = {&dVs, &dVb};
  const double hbar[2] = {params.Hbar_s, params.Hbar_b};
  const double ubar[2] = {params.Ubar_s, params.Ubar_b};
  const Field1D hx[2] = {d1(mid.H_s), d1(mid.H_b)};
  const double press[2][2] = {{1.0, 1.0}, {params.rho_ratio(), 1.0}};

  BdResidual out;
  out.t = mid.t;
  double total = 0.0;
  for (std::size_t l = 0; l < 2; ++l) {
    Field1D flux(n);
    for (std::size_t j = 0; j < n; ++j) flux[j] = (hbar[l] + (*H[l])[j]) * (ubar[l] + (*V[l])[j]);
    const Field1D fx = d1(flux);
    Field1D rh(n);
    for (std::size_t j = 0; j < n; ++j) rh[j] = (*dH[l])[j] + fx[j];

    const Field1D vx = d1(*V[l]);
    const Field1D vxx = d2(*V[l]);
    Field1D rv(n);
    for (std::size_t j = 0; j < n; ++j) {
      const double adv = ubar[l] + (*V[l])[j] - params.kappa * hx[l][j] / (hbar[l] + (*H[l])[j]);
      rv[j] = (*dV[l])[j] + adv * vx[j] + press[l][0] * hx[0][j] + press[l][1] * hx[1][j] -
              params.kappa * vxx[j];
    }
    ops.dealias(rh.span());
    ops.dealias(rv.span());
    out.per_field[l] = ops.sobolev_norm(rh.span(), 0.0);
    out.per_field[2 + l] = ops.sobolev_norm(rv.span(), 0.0);
  }
  for (double r : out.per_field) total += r * r;
  out.l2 = std::sqrt(total);
  return out;
}

EnergySample energy_functional(const SpatialGrid& grid, const BilayerParams& params,
                               const BilayerState& base, const BilayerState& dU,
                               const BilayerState& dV) {
  const std::size_t n = grid.size();
  if (base.size() != n || dU.size() != n || dV.size() != n) {
    throw DomainError("energy_functional: grid mismatch");
  }
  EnergySample e;
  e.t = base.t;
  e.c2 = std::numeric_limits<double>::infinity();
  double l2sq = 0.0;
  const double dx = grid.dx();
  for (std::size_t j = 0; j < n; ++j) {
    const Symmetrizer sym = symmetrizer(state_point(params, base, j));
    const Eigen::Vector4d u(dU.H_s[j], dU.H_b[j], dU.U_s[j], dU.U_b[j]);
    const Eigen::Vector4d v(dV.H_s[j], dV.H_b[j], dV.U_s[j], dV.U_b[j]);
    e.E += dx * (u.dot(sym.S * u) + v.dot(sym.S * v));
    l2sq += dx * (u.squaredNorm() + v.squaredNorm());
    e.c2 = std::min(e.c2, min_eigenvalue(sym.S));
  }
  e.l2 = std::sqrt(l2sq);
  return e;
}

BilayerState make_bilayer_state(const SpatialGrid& grid, const std::array<LayerData, 4>& data) {
  const std::size_t n = grid.size();
  BilayerState s = BilayerState::zero(n);
  const double L = grid.length();
  SpectralOps ops(grid);
  std::size_t f = 0;
  for (Field1D* field : s.fields()) {
    const LayerData& d = data[f++];
    for (std::size_t j = 0; j < n; ++j) {
      const double x = grid.x(j);
      switch (d.shape) {
        case Profile::Zero: (*field)[j] = 0.0; break;
        case Profile::Sine:
          (*field)[j] = d.amplitude * std::sin(2.0 * std::numbers::pi * d.wavenumber * x / L + d.phase);
          break;
        case Profile::Gaussian: {
          const double z = (x - 0.5 * L - d.phase) * d.wavenumber;
          (*field)[j] = d.amplitude * std::exp(-z * z);
          break;
        }
      }
    }
    ops.dealias(field->span());
  }
  return s;
}

BilayerState read_bilayer_csv(const std::string& path, const SpatialGrid& grid) {
  const CsvTable t = read_csv(path);
  const std::size_t n = grid.size();
  if (t.rows.size() != n) {
    throw ConfigError(path + ": expected " + std::to_string(n) + " rows, found " + std::to_string(t.rows.size()));
  }
  const std::size_t cx = t.column("x");
  const std::size_t cols[4] = {t.column("H_s"), t.column("H_b"), t.column("U_s"), t.column("U_b")};
  BilayerState s = BilayerState::zero(n);
  auto fields = s.fields();
  for (std::size_t j = 0; j < n; ++j) {
    if (std::abs(t.rows[j][cx] - grid.x(j)) > 1e-9 * (1.0 + grid.length())) {
      throw ConfigError(path + ": x column does not match the grid at row " + std::to_string(j + 1));
    }
    for (std::size_t f = 0; f < 4; ++f) (*fields[f])[j] = t.rows[j][cols[f]];
  }
  return s;
}

void write_bilayer_trajectory_csv(const std::string& path, const SpatialGrid& grid,
                                  std::span<const BilayerState> states) {
  std::vector<std::vector<double>> rows;
  for (const auto& s : states) {
    for (std::size_t j = 0; j < s.size(); ++j) {
      rows.push_back({s.t, grid.x(j), s.H_s[j], s.H_b[j], s.U_s[j], s.U_b[j]});
    }
  }
  write_csv(path, {"t", "x", "H_s", "H_b", "U_s", "U_b"}, rows);
}

void write_bilayer_diagnostics_csv(const std::string& path, std::span<const BilayerDiagnostic> diags) {
  std::vector<std::vector<double>> rows;
  for (const auto& d : diags) {
    rows.push_back({d.t, d.mass_s, d.mass_b, d.mom_s, d.mom_b, d.hs_norm, d.min_depth, d.margin});
  }
  write_csv(path, {"t", "mass_s", "mass_b", "mom_s", "mom_b", "hs_norm", "min_depth", "margin"}, rows);
}

}  // namespace stratlab
