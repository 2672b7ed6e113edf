#pragma once

#include <cstddef>
#include <numbers>

namespace ergc {

struct Wavenumber {
  int k1 = 0;
  int k2 = 0;

  int norm_sq() const { return k1 * k1 + k2 * k2; }
  friend bool operator==(const Wavenumber&, const Wavenumber&) = default;
};

/// Periodic box of side 2π discretised with `modes_x × modes_y` points.
///
/// `modes_y == 1` selects the one-dimensional box used by the wave model.
/// Coefficients are stored row-major with the x wavenumber as the slow index:
/// `index = i1 * modes_y + i2`, where `i` maps to `k` in FFT order
/// (0, 1, ..., n/2 - 1, -n/2, ..., -1). The Nyquist row/column (`|k_i| = n/2`)
/// is never populated, so every stored mode satisfies `|k_i| < n/2`.
class Grid {
 public:
  Grid() = default;
  Grid(int modes_x, int modes_y);

  int modes_x() const { return nx_; }
  int modes_y() const { return ny_; }
  int dims() const { return ny_ == 1 ? 1 : 2; }
  std::size_t size() const { return static_cast<std::size_t>(nx_) * ny_; }

  Wavenumber wavenumber(std::size_t index) const {
    const int i1 = static_cast<int>(index / ny_);
    const int i2 = static_cast<int>(index % ny_);
    return {i1 < (nx_ + 1) / 2 ? i1 : i1 - nx_, ny_ == 1 ? 0 : (i2 < (ny_ + 1) / 2 ? i2 : i2 - ny_)};
  }
  std::size_t index_of(Wavenumber k) const {
    const int i1 = ((k.k1 % nx_) + nx_) % nx_;
    const int i2 = ((k.k2 % ny_) + ny_) % ny_;
    return static_cast<std::size_t>(i1) * ny_ + i2;
  }
  std::size_t conjugate_index(std::size_t index) const {
    const Wavenumber k = wavenumber(index);
    return index_of({-k.k1, -k.k2});
  }
  int norm_sq(std::size_t index) const { return wavenumber(index).norm_sq(); }

  /// True for the unrepresented `|k_i| = n/2` modes.
  bool is_nyquist(std::size_t index) const {
    const Wavenumber k = wavenumber(index);
    return (2 * k.k1 == -nx_) || (ny_ > 1 && 2 * k.k2 == -ny_);
  }
  /// 2/3 rule: a mode survives dealiasing iff every `|k_i| <= n_i / 3`.
  bool survives_dealias(std::size_t index) const {
    const Wavenumber k = wavenumber(index);
    const int a1 = k.k1 < 0 ? -k.k1 : k.k1;
    const int a2 = k.k2 < 0 ? -k.k2 : k.k2;
    return 3 * a1 <= nx_ && (ny_ == 1 || 3 * a2 <= ny_);
  }

  /// (2π)^d, the volume of the box.
  double volume() const {
    const double side = 2.0 * std::numbers::pi;
    return dims() == 1 ? side : side * side;
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  int nx_ = 0;
  int ny_ = 0;
};

}  // namespace ergc
