#pragma once

#include <complex>
#include <span>
#include <vector>

#include "ergc/spectral/grid.hpp"

namespace ergc {

using Complex = std::complex<double>;

/// Fourier-series coefficients of a real field on a periodic grid.
///
/// A field has one component (vorticity, a wave displacement) or two
/// (velocity, or the packed `(u, v)` pair of the wave model). Coefficients use
/// the convention `f(x) = Σ_k f̂(k) e^{i k·x}`, so `sin(x₁)` has `f̂(±1,0) = ∓i/2`.
class SpectralField {
 public:
  SpectralField() = default;
  explicit SpectralField(const Grid& grid, int components = 1);

  const Grid& grid() const { return grid_; }
  int components() const { return components_; }
  bool empty() const { return coeffs_.empty(); }

  std::span<Complex> component(int c) {
    return {coeffs_.data() + static_cast<std::size_t>(c) * grid_.size(), grid_.size()};
  }
  std::span<const Complex> component(int c) const {
    return {coeffs_.data() + static_cast<std::size_t>(c) * grid_.size(), grid_.size()};
  }
  Complex& operator()(int c, std::size_t index) { return coeffs_[static_cast<std::size_t>(c) * grid_.size() + index]; }
  const Complex& operator()(int c, std::size_t index) const {
    return coeffs_[static_cast<std::size_t>(c) * grid_.size() + index];
  }
  Complex& at(Wavenumber k, int c = 0) { return (*this)(c, grid_.index_of(k)); }
  const Complex& at(Wavenumber k, int c = 0) const { return (*this)(c, grid_.index_of(k)); }

  std::span<Complex> data() { return coeffs_; }
  std::span<const Complex> data() const { return coeffs_; }

  /// Sets `f̂(k) = value` and `f̂(-k) = conj(value)` on component `c`.
  void set_mode(Wavenumber k, Complex value, int c = 0);

  SpectralField& operator+=(const SpectralField& other);
  SpectralField& operator-=(const SpectralField& other);
  SpectralField& operator*=(double s);
  friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
  friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
  friend SpectralField operator*(SpectralField a, double s) { return a *= s; }
  friend SpectralField operator*(double s, SpectralField a) { return a *= s; }

  bool same_shape(const SpectralField& other) const {
    return grid_ == other.grid_ && components_ == other.components_;
  }
  /// Largest `|f̂(-k) - conj f̂(k)|` over all modes and components.
  double hermitian_defect() const;
  bool is_mean_zero() const;
  bool all_finite() const;
  /// Zeroes every coefficient (keeps shape).
  void clear();

  friend bool operator==(const SpectralField&, const SpectralField&) = default;

 private:
  Grid grid_;
  int components_ = 0;
  std::vector<Complex> coeffs_;
};

/// Throws GridMismatch unless the two fields share a grid.
void require_same_grid(const SpectralField& a, const SpectralField& b, const char* context);

}  // namespace ergc
