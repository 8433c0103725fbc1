#include <algorithm>

#include "stratlab/core/error.hpp"
#include "stratlab/core/spectral.hpp"

namespace stratlab {

std::vector<double> level_norms(const SpatialGrid& grid, const Field2D& g, SobolevIndex s) {
  if (g.points() != grid.size()) throw DomainError("level_norms: grid mismatch");
  SpectralOps ops(grid);
  std::vector<double> out(g.levels());
  for (std::size_t i = 0; i < g.levels(); ++i) out[i] = ops.sobolev_norm(g.level(i), s.value());
  return out;
}

double mixed_norm(const SpatialGrid& grid, const LevelGrid& levels, const Field2D& g,
                  SobolevIndex s, LevelNorm mode) {
  if (g.levels() != levels.size()) throw DomainError("mixed_norm: level grid mismatch");
  const auto norms = level_norms(grid, g, s);
  if (mode == LevelNorm::sup) {
    return norms.empty() ? 0.0 : *std::max_element(norms.begin(), norms.end());
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < norms.size(); ++i) sum += levels.weight(i) * norms[i];
  return sum;
}

}  // namespace stratlab
