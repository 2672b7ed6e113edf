#pragma once

#include <cmath>
#include <random>

#include "ergc/spectral/field.hpp"

namespace ergc::test {

/// Random real mean-zero field with modes `0 < |k_i| <= band` (band < n/2).
inline SpectralField random_field(const Grid& grid, int band, std::uint64_t seed, int components = 1,
                                  double amplitude = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, amplitude);
  SpectralField f(grid, components);
  const int band2 = grid.dims() == 1 ? 0 : band;
  for (int c = 0; c < components; ++c) {
    for (int k1 = 0; k1 <= band; ++k1) {
      for (int k2 = -band2; k2 <= band2; ++k2) {
        if (k1 == 0 && k2 <= 0) continue;
        f.set_mode({k1, k2}, {normal(rng), normal(rng)}, c);
      }
    }
  }
  return f;
}

/// L² norm by direct quadrature of physical samples.
inline double physical_l2(const std::vector<double>& samples, const Grid& grid) {
  double s = 0.0;
  for (double v : samples) s += v * v;
  return std::sqrt(grid.volume() * s / static_cast<double>(grid.size()));
}

inline double max_abs_diff(const SpectralField& a, const SpectralField& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]));
  return worst;
}

inline double max_abs(const SpectralField& a) {
  double worst = 0.0;
  for (const auto& z : a.data()) worst = std::max(worst, std::abs(z));
  return worst;
}

}  // namespace ergc::test
