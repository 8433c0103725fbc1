#include <doctest.h>

#include <cstring>
#include <random>
#include <vector>

#include "stratlab/bilayer.hpp"
#include "stratlab/kernels/kernels.hpp"
#include "stratlab/stratified.hpp"

using namespace stratlab;

namespace {

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("avx2 kernels agree bit for bit with the scalar kernels") {
  const kernels::KernelTable* simd = kernels::avx2_kernels();
  if (simd == nullptr) {
    MESSAGE("AVX2 variant unavailable on this machine; nothing to compare");
    return;
  }
  const kernels::KernelTable& ref = kernels::scalar_kernels();
  std::mt19937_64 rng(42);
  for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 7u, 8u, 31u, 64u, 129u}) {
    CAPTURE(n);
    const auto a = random_vec(rng, n), b = random_vec(rng, n), c = random_vec(rng, n), d = random_vec(rng, n);
    const auto h = random_vec(rng, n, -0.4, 0.4), e = random_vec(rng, n);

    std::vector<double> o1(n), o2(n);
    ref.lincomb(o1.data(), a.data(), 0.37, b.data(), n);
    simd->lincomb(o2.data(), a.data(), 0.37, b.data(), n);
    CHECK(same_bits(o1, o2));

    std::vector<double> y1 = e, y2 = e;
    ref.rk4_combine(y1.data(), a.data(), b.data(), c.data(), d.data(), 0.013, n);
    simd->rk4_combine(y2.data(), a.data(), b.data(), c.data(), d.data(), 0.013, n);
    CHECK(same_bits(y1, y2));

    ref.mass_flux(o1.data(), h.data(), a.data(), 0.6, -0.1, n);
    simd->mass_flux(o2.data(), h.data(), a.data(), 0.6, -0.1, n);
    CHECK(same_bits(o1, o2));

    ref.advection(o1.data(), a.data(), b.data(), h.data(), c.data(), 0.6, 0.1, 0.05, n);
    simd->advection(o2.data(), a.data(), b.data(), h.data(), c.data(), 0.6, 0.1, 0.05, n);
    CHECK(same_bits(o1, o2));
  }
  for (std::size_t n_r : {1u, 2u, 5u, 17u}) {
    for (std::size_t n : {1u, 4u, 9u, 33u}) {
      CAPTURE(n_r);
      CAPTURE(n);
      const std::size_t stride = n + 3;
      const auto g = random_vec(rng, n_r * stride);
      const auto rho = random_vec(rng, n_r, 0.3, 3.0);
      auto w = random_vec(rng, n_r, 0.1, 1.0);
      for (bool divide : {false, true}) {
        std::vector<double> o1(n_r * stride, 0.0), o2(n_r * stride, 0.0);
        ref.montgomery(o1.data(), g.data(), rho.data(), w.data(), n_r, stride, n, divide);
        simd->montgomery(o2.data(), g.data(), rho.data(), w.data(), n_r, stride, n, divide);
        CHECK(same_bits(o1, o2));
      }
    }
  }
}

TEST_CASE("solver trajectories are identical under either kernel table") {
  if (kernels::avx2_kernels() == nullptr) return;
  const SpatialGrid grid(6.283185307179586, 64);
  BilayerParams p;
  p.Ubar_s = 0.1;
  p.Ubar_b = -0.1;
  p.kappa = 0.05;
  const BilayerState s0 = make_bilayer_state(
      grid, {LayerData{Profile::Sine, 0.05, 1.0, 0.0}, LayerData{Profile::Gaussian, 0.03, 2.0, 3.0},
             LayerData{Profile::Sine, 0.02, 3.0, 1.0}, LayerData{}});
  const LevelGrid levels = LevelGrid::with_interface(-0.5, 5, 7);
  const auto [profile, st0] = embed_bilayer(s0, p, levels);

  IntegrateOptions o;
  o.samples = 1;
  std::vector<double> bil[2], strat[2];
  const char* names[2] = {"scalar", "avx2"};
  for (int v = 0; v < 2; ++v) {
    REQUIRE(kernels::select(names[v]));
    CHECK(std::string(kernels::active().name) == names[v]);
    bil[v] = flatten(integrate(grid, s0, p, 0.3, o).final_state);
    strat[v] = flatten(integrate(grid, st0, profile, p.kappa, 0.3, o).final_state);
  }
  CHECK(same_bits(bil[0], bil[1]));
  CHECK(same_bits(strat[0], strat[1]));
  CHECK_FALSE(kernels::select("neon"));
}
