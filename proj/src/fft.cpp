#include "ergc/spectral/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>

#include "ergc/error.hpp"

namespace ergc {

namespace {

// FFTW planning is not thread-safe; execution with the new-array interface is.
// Plans are built once per shape with FFTW_ESTIMATE so that the chosen
// algorithm, and hence every output bit, does not depend on timing.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan forward(const Grid& g) { return get(g, true); }
  fftw_plan backward(const Grid& g) { return get(g, false); }

  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

 private:
  fftw_plan get(const Grid& g, bool forward) {
    std::lock_guard lock(mutex_);
    const auto key = std::make_tuple(g.modes_x(), g.modes_y(), forward);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;

    const int nx = g.modes_x();
    const int ny = g.modes_y();
    const std::size_t half = half_size(g);
    double* real = fftw_alloc_real(g.size());
    fftw_complex* spec = fftw_alloc_complex(half);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fftw_plan plan = nullptr;
    if (g.dims() == 1) {
      plan = forward ? fftw_plan_dft_r2c_1d(nx, real, spec, flags) : fftw_plan_dft_c2r_1d(nx, spec, real, flags);
    } else {
      plan = forward ? fftw_plan_dft_r2c_2d(nx, ny, real, spec, flags) : fftw_plan_dft_c2r_2d(nx, ny, spec, real, flags);
    }
    fftw_free(real);
    fftw_free(spec);
    if (plan == nullptr) throw Error("fft: planning failed");
    plans_.emplace(key, plan);
    return plan;
  }

 public:
  static std::size_t half_size(const Grid& g) {
    return g.dims() == 1 ? static_cast<std::size_t>(g.modes_x() / 2 + 1)
                         : static_cast<std::size_t>(g.modes_x()) * (g.modes_y() / 2 + 1);
  }

 private:
  std::mutex mutex_;
  std::map<std::tuple<int, int, bool>, fftw_plan> plans_;
};

}  // namespace

std::vector<double> to_physical(const SpectralField& f, int c) {
  const Grid& g = f.grid();
  const int nx = g.modes_x();
  const int ny = g.modes_y();
  const auto coeffs = f.component(c);
  std::vector<Complex> half(PlanCache::half_size(g));
  if (g.dims() == 1) {
    for (int i = 0; i <= nx / 2; ++i) half[i] = coeffs[i];
  } else {
    const int hy = ny / 2 + 1;
    for (int i1 = 0; i1 < nx; ++i1) {
      for (int i2 = 0; i2 < hy; ++i2) half[static_cast<std::size_t>(i1) * hy + i2] = coeffs[static_cast<std::size_t>(i1) * ny + i2];
    }
  }
  std::vector<double> out(g.size());
  fftw_execute_dft_c2r(PlanCache::instance().backward(g), reinterpret_cast<fftw_complex*>(half.data()), out.data());
  return out;
}

void from_physical(std::span<const double> values, SpectralField& out, int c) {
  const Grid& g = out.grid();
  if (values.size() != g.size()) throw GridMismatch("from_physical: sample count does not match grid");
  const int nx = g.modes_x();
  const int ny = g.modes_y();
  std::vector<Complex> half(PlanCache::half_size(g));
  fftw_execute_dft_r2c(PlanCache::instance().forward(g), const_cast<double*>(values.data()),
                       reinterpret_cast<fftw_complex*>(half.data()));
  const double scale = 1.0 / static_cast<double>(g.size());
  auto coeffs = out.component(c);

  if (g.dims() == 1) {
    for (int i = 0; i < nx / 2; ++i) coeffs[i] = half[i] * scale;
    coeffs[nx / 2] = 0.0;
    for (int i = nx / 2 + 1; i < nx; ++i) coeffs[i] = std::conj(coeffs[nx - i]);
  } else {
    const int hy = ny / 2 + 1;
    for (int i1 = 0; i1 < nx; ++i1) {
      for (int i2 = 0; i2 < hy; ++i2) {
        coeffs[static_cast<std::size_t>(i1) * ny + i2] = half[static_cast<std::size_t>(i1) * hy + i2] * scale;
      }
    }
    // The k2 = 0 column is redundant in the r2c output; symmetrise it so the
    // result is Hermitian bit-for-bit.
    for (int i1 = 1; i1 < nx / 2; ++i1) {
      const std::size_t a = static_cast<std::size_t>(i1) * ny;
      const std::size_t b = static_cast<std::size_t>(nx - i1) * ny;
      const Complex avg = 0.5 * (coeffs[a] + std::conj(coeffs[b]));
      coeffs[a] = avg;
      coeffs[b] = std::conj(avg);
    }
    for (int i1 = 0; i1 < nx; ++i1) {
      for (int i2 = hy; i2 < ny; ++i2) {
        const int j1 = (nx - i1) % nx;
        coeffs[static_cast<std::size_t>(i1) * ny + i2] = std::conj(coeffs[static_cast<std::size_t>(j1) * ny + (ny - i2)]);
      }
    }
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (g.is_nyquist(i)) coeffs[i] = 0.0;
    }
  }
  coeffs[0] = coeffs[0].real();
}

std::size_t half_spectrum_size(const Grid& grid) { return PlanCache::half_size(grid); }

void half_to_physical(const Grid& grid, Complex* half, double* out) {
  fftw_execute_dft_c2r(PlanCache::instance().backward(grid), reinterpret_cast<fftw_complex*>(half), out);
}

void physical_to_half(const Grid& grid, const double* values, Complex* half) {
  fftw_execute_dft_r2c(PlanCache::instance().forward(grid), const_cast<double*>(values),
                       reinterpret_cast<fftw_complex*>(half));
}

SpectralField from_physical(const Grid& grid, std::span<const double> values) {
  SpectralField out(grid, 1);
  from_physical(values, out, 0);
  return out;
}

}  // namespace ergc
