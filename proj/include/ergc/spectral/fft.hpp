#pragma once

#include <span>
#include <vector>

#include "ergc/spectral/field.hpp"

namespace ergc {

/// Samples component `c` of `f` on the uniform grid `x_j = 2π j / n`.
/// Physical arrays share the row-major layout of the coefficients.
std::vector<double> to_physical(const SpectralField& f, int c = 0);

/// Fourier coefficients of real samples. The result is exactly Hermitian, has
/// a real k = 0 coefficient and no Nyquist content.
void from_physical(std::span<const double> values, SpectralField& out, int c = 0);
SpectralField from_physical(const Grid& grid, std::span<const double> values);

/// Raw half-spectrum transforms in FFTW's r2c layout (`nx × (ny/2 + 1)`),
/// unnormalised. For kernels that avoid the full-spectrum copies.
std::size_t half_spectrum_size(const Grid& grid);
void half_to_physical(const Grid& grid, Complex* half, double* out);
void physical_to_half(const Grid& grid, const double* values, Complex* half);

}  // namespace ergc
