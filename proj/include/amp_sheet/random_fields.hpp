#pragma once

// Seeded random trigonometric polynomials with algebraically decaying
// Gaussian coefficients c_k = g_k / (1 + |k|)^rho.

#include <cmath>
#include <cstdint>
#include <random>

#include "amp_sheet/spectral_core.hpp"

namespace amp_sheet {

/// Engine for draw `index` of a campaign with master seed `seed`.
inline std::mt19937_64 draw_engine(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

struct RandomFieldSpec {
  int bandwidth = 8;
  double rho = 2.0;
  bool zero_mean = true;
  double scale = 1.0;
};

/// Real field. Coefficients are drawn in order of increasing k, so a larger
/// bandwidth extends a smaller one drawn from the same engine state.
inline SpectralField random_real_field(const TorusGrid& grid, const RandomFieldSpec& spec, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  SpectralField f(grid, true);
  const int B = std::min(spec.bandwidth, grid.max_mode());
  double c0 = nd(rng);
  if (!spec.zero_mean) f.at(0) = std::numbers::pi * spec.scale * c0;
  for (int k = 1; k <= B; ++k) {
    double a = nd(rng), b = nd(rng);
    cplx c = std::numbers::pi * spec.scale * cplx(a, b) / std::pow(1.0 + k, spec.rho);
    f.at(k) = c;
    f.at(-k) = std::conj(c);
  }
  return f;
}

/// Complex field with independent coefficients on -B..B (optionally one-sided).
inline SpectralField random_complex_field(const TorusGrid& grid, const RandomFieldSpec& spec, std::mt19937_64& rng,
                                          int side = 0) {
  std::normal_distribution<double> nd(0.0, 1.0);
  SpectralField f(grid, false);
  const int B = std::min(spec.bandwidth, grid.max_mode());
  for (int k = -B; k <= B; ++k) {
    double a = nd(rng), b = nd(rng);
    if (k == 0 && spec.zero_mean) continue;
    if ((side > 0 && k <= 0) || (side < 0 && k >= 0)) continue;
    f.at(k) = std::numbers::pi * spec.scale * cplx(a, b) / std::pow(1.0 + std::abs(k), spec.rho);
  }
  return f;
}

}  // namespace amp_sheet
