#include "ergc/spectral/field.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ergc/error.hpp"

namespace ergc {

namespace {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

Grid::Grid(int modes_x, int modes_y) : nx_(modes_x), ny_(modes_y) {
  if (!is_power_of_two(modes_x) || modes_x < 4) {
    throw InvalidArgument("grid: modes_x must be a power of two >= 4, got " + std::to_string(modes_x));
  }
  if (modes_y != 1 && (!is_power_of_two(modes_y) || modes_y < 4)) {
    throw InvalidArgument("grid: modes_y must be 1 or a power of two >= 4, got " + std::to_string(modes_y));
  }
}

SpectralField::SpectralField(const Grid& grid, int components)
    : grid_(grid), components_(components), coeffs_(grid.size() * static_cast<std::size_t>(components)) {
  if (components != 1 && components != 2) {
    throw InvalidArgument("spectral field: components must be 1 or 2");
  }
}

void SpectralField::set_mode(Wavenumber k, Complex value, int c) {
  const std::size_t i = grid_.index_of(k);
  const std::size_t j = grid_.index_of({-k.k1, -k.k2});
  if (i == j) {
    (*this)(c, i) = value.real();
  } else {
    (*this)(c, i) = value;
    (*this)(c, j) = std::conj(value);
  }
}

SpectralField& SpectralField::operator+=(const SpectralField& other) {
  if (!same_shape(other)) throw GridMismatch("field addition: shapes differ");
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += other.coeffs_[i];
  return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& other) {
  if (!same_shape(other)) throw GridMismatch("field subtraction: shapes differ");
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= other.coeffs_[i];
  return *this;
}

SpectralField& SpectralField::operator*=(double s) {
  for (auto& c : coeffs_) c *= s;
  return *this;
}

double SpectralField::hermitian_defect() const {
  double worst = 0.0;
  for (int c = 0; c < components_; ++c) {
    for (std::size_t i = 0; i < grid_.size(); ++i) {
      const std::size_t j = grid_.conjugate_index(i);
      worst = std::max(worst, std::abs((*this)(c, j) - std::conj((*this)(c, i))));
    }
  }
  return worst;
}

bool SpectralField::is_mean_zero() const {
  for (int c = 0; c < components_; ++c) {
    if ((*this)(c, 0) != Complex{}) return false;
  }
  return true;
}

bool SpectralField::all_finite() const {
  return std::all_of(coeffs_.begin(), coeffs_.end(),
                     [](const Complex& z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); });
}

void SpectralField::clear() { std::fill(coeffs_.begin(), coeffs_.end(), Complex{}); }

void require_same_grid(const SpectralField& a, const SpectralField& b, const char* context) {
  if (!(a.grid() == b.grid())) {
    throw GridMismatch(std::string(context) + ": arguments live on different grids");
  }
}

}  // namespace ergc
