#include "ergc/spectral/operators.hpp"

#include <algorithm>
#include <cmath>

#include "ergc/error.hpp"
#include "ergc/spectral/fft.hpp"

namespace ergc {

namespace {

constexpr Complex kI{0.0, 1.0};

bool is_sum_of_two_squares(int n) {
  for (int a = 0; a * a <= n; ++a) {
    const int rest = n - a * a;
    const int b = static_cast<int>(std::lround(std::sqrt(static_cast<double>(rest))));
    if (b * b == rest) return true;
  }
  return false;
}

void require_mean_zero(const SpectralField& f, const char* context) {
  if (!f.is_mean_zero()) {
    throw MeanZeroViolation(std::string(context) + ": field has a nonzero k = 0 coefficient");
  }
}

void require_components(const SpectralField& f, int n, const char* context) {
  if (f.components() != n) {
    throw InvalidArgument(std::string(context) + ": expected a " + std::to_string(n) + "-component field");
  }
}

}  // namespace

GalerkinCutoff::GalerkinCutoff(double cutoff_wavenumber, int dims)
    : cutoff_(cutoff_wavenumber), cutoff_sq_(cutoff_wavenumber * cutoff_wavenumber * (1.0 + 1e-12)) {
  if (!(cutoff_wavenumber > 0.0)) throw InvalidArgument("galerkin cutoff must be positive");
  int n = static_cast<int>(std::floor(cutoff_sq_)) + 1;
  if (dims == 1) {
    while (static_cast<int>(std::lround(std::sqrt(static_cast<double>(n)))) *
               static_cast<int>(std::lround(std::sqrt(static_cast<double>(n)))) != n) {
      ++n;
    }
  } else {
    while (!is_sum_of_two_squares(n)) ++n;
  }
  lambda_n_ = static_cast<double>(n);
}

double sobolev_multiplier(int norm_sq, double s) {
  if (s == 0.0) return 1.0;
  if (norm_sq == 0) return 0.0;
  return std::pow(static_cast<double>(norm_sq), 0.5 * s);
}

SpectralField fractional_laplacian(const SpectralField& f, double s) {
  if (s < 0.0) require_mean_zero(f, "fractional_laplacian");
  SpectralField out(f.grid(), f.components());
  const Grid& g = f.grid();
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double m = sobolev_multiplier(g.norm_sq(i), s);
    for (int c = 0; c < f.components(); ++c) out(c, i) = m * f(c, i);
  }
  return out;
}

SpectralField biot_savart(const SpectralField& xi) {
  require_components(xi, 1, "biot_savart");
  require_mean_zero(xi, "biot_savart");
  const Grid& g = xi.grid();
  SpectralField u(g, 2);
  for (std::size_t i = 1; i < g.size(); ++i) {
    const Wavenumber k = g.wavenumber(i);
    const double ksq = k.norm_sq();
    const Complex w = kI * xi(0, i) / ksq;
    u(0, i) = static_cast<double>(k.k2) * w;
    u(1, i) = -static_cast<double>(k.k1) * w;
  }
  return u;
}

SpectralField curl(const SpectralField& u) {
  require_components(u, 2, "curl");
  const Grid& g = u.grid();
  SpectralField out(g, 1);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Wavenumber k = g.wavenumber(i);
    out(0, i) = kI * (static_cast<double>(k.k1) * u(1, i) - static_cast<double>(k.k2) * u(0, i));
  }
  return out;
}

SpectralField divergence(const SpectralField& u) {
  require_components(u, 2, "divergence");
  const Grid& g = u.grid();
  SpectralField out(g, 1);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Wavenumber k = g.wavenumber(i);
    out(0, i) = kI * (static_cast<double>(k.k1) * u(0, i) + static_cast<double>(k.k2) * u(1, i));
  }
  return out;
}

SpectralField gradient(const SpectralField& scalar) {
  require_components(scalar, 1, "gradient");
  const Grid& g = scalar.grid();
  SpectralField out(g, 2);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Wavenumber k = g.wavenumber(i);
    out(0, i) = kI * static_cast<double>(k.k1) * scalar(0, i);
    out(1, i) = kI * static_cast<double>(k.k2) * scalar(0, i);
  }
  return out;
}

SpectralField leray_project(const SpectralField& f) {
  require_components(f, 2, "leray_project");
  const Grid& g = f.grid();
  SpectralField out = f;
  for (std::size_t i = 1; i < g.size(); ++i) {
    const Wavenumber k = g.wavenumber(i);
    const double k1 = k.k1;
    const double k2 = k.k2;
    const Complex kdotu = k1 * f(0, i) + k2 * f(1, i);
    const double ksq = k.norm_sq();
    out(0, i) -= k1 * kdotu / ksq;
    out(1, i) -= k2 * kdotu / ksq;
  }
  return out;
}

SpectralField dealias(const SpectralField& f) {
  SpectralField out = f;
  const Grid& g = f.grid();
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g.survives_dealias(i)) continue;
    for (int c = 0; c < f.components(); ++c) out(c, i) = 0.0;
  }
  return out;
}

SpectralField advect(const SpectralField& vel, const SpectralField& scalar, bool dealias_product) {
  require_same_grid(vel, scalar, "advect");
  require_components(vel, 2, "advect (velocity)");
  require_components(scalar, 1, "advect (scalar)");
  const Grid& g = vel.grid();
  if (g.dims() != 2) throw InvalidArgument("advect: two-dimensional grid required");

  const SpectralField v = dealias_product ? dealias(vel) : vel;
  const SpectralField grad = gradient(dealias_product ? dealias(scalar) : scalar);
  const auto u1 = to_physical(v, 0);
  const auto u2 = to_physical(v, 1);
  const auto d1 = to_physical(grad, 0);
  const auto d2 = to_physical(grad, 1);
  std::vector<double> prod(g.size());
  for (std::size_t j = 0; j < prod.size(); ++j) prod[j] = u1[j] * d1[j] + u2[j] * d2[j];
  SpectralField out = from_physical(g, prod);
  return dealias_product ? dealias(out) : out;
}

namespace {

// Per-thread scratch for advect_by_vorticity, rebuilt when the grid changes.
struct TransportWorkspace {
  Grid grid;
  std::vector<std::size_t> full_index;  // half-spectrum slot -> storage index
  std::vector<double> k1, k2, inv_k2;
  std::vector<char> keep;
  std::vector<Complex> h_u1, h_u2, h_d1, h_d2;
  std::vector<double> u1, u2, d1, d2;

  void prepare(const Grid& g) {
    if (g == grid) return;
    grid = g;
    const int ny = g.modes_y();
    const int hy = ny / 2 + 1;
    const std::size_t h = half_spectrum_size(g);
    full_index.resize(h);
    k1.resize(h);
    k2.resize(h);
    inv_k2.resize(h);
    keep.resize(h);
    for (std::size_t s = 0; s < h; ++s) {
      const std::size_t i1 = s / hy;
      const std::size_t i2 = s % hy;
      const std::size_t f = i1 * ny + i2;
      full_index[s] = f;
      const Wavenumber k = g.wavenumber(f);
      k1[s] = k.k1;
      k2[s] = k.k2;
      inv_k2[s] = k.norm_sq() == 0 ? 0.0 : 1.0 / k.norm_sq();
      keep[s] = g.survives_dealias(f) && !g.is_nyquist(f);
    }
    for (auto* v : {&h_u1, &h_u2, &h_d1, &h_d2}) v->assign(h, Complex(0.0));
    for (auto* v : {&u1, &u2, &d1, &d2}) v->assign(g.size(), 0.0);
  }
};

}  // namespace

SpectralField advect_by_vorticity(const SpectralField& omega, const SpectralField& theta) {
  require_same_grid(omega, theta, "advect_by_vorticity");
  require_components(omega, 1, "advect_by_vorticity");
  require_components(theta, 1, "advect_by_vorticity");
  require_mean_zero(omega, "advect_by_vorticity");
  const Grid& g = omega.grid();
  if (g.dims() != 2) throw InvalidArgument("advect_by_vorticity: two-dimensional grid required");

  thread_local TransportWorkspace ws;
  ws.prepare(g);
  const std::size_t h = ws.full_index.size();
  const auto w = omega.component(0);
  const auto t = theta.component(0);
  for (std::size_t s = 0; s < h; ++s) {
    if (!ws.keep[s]) {
      ws.h_u1[s] = ws.h_u2[s] = ws.h_d1[s] = ws.h_d2[s] = 0.0;
      continue;
    }
    const Complex iw = kI * w[ws.full_index[s]] * ws.inv_k2[s];
    const Complex it = kI * t[ws.full_index[s]];
    ws.h_u1[s] = ws.k2[s] * iw;
    ws.h_u2[s] = -ws.k1[s] * iw;
    ws.h_d1[s] = ws.k1[s] * it;
    ws.h_d2[s] = ws.k2[s] * it;
  }
  half_to_physical(g, ws.h_u1.data(), ws.u1.data());
  half_to_physical(g, ws.h_u2.data(), ws.u2.data());
  half_to_physical(g, ws.h_d1.data(), ws.d1.data());
  half_to_physical(g, ws.h_d2.data(), ws.d2.data());
  for (std::size_t j = 0; j < ws.u1.size(); ++j) ws.u1[j] = ws.u1[j] * ws.d1[j] + ws.u2[j] * ws.d2[j];
  physical_to_half(g, ws.u1.data(), ws.h_u1.data());

  SpectralField out(g);
  auto o = out.component(0);
  const double scale = 1.0 / static_cast<double>(g.size());
  for (std::size_t s = 0; s < h; ++s) {
    if (ws.keep[s]) o[ws.full_index[s]] = ws.h_u1[s] * scale;
  }
  // Complete the spectrum by symmetry; the k2 = 0 column is averaged so the
  // result is Hermitian bit-for-bit.
  const int nx = g.modes_x();
  const int ny = g.modes_y();
  for (int i1 = 1; i1 < nx / 2; ++i1) {
    const std::size_t a = static_cast<std::size_t>(i1) * ny;
    const std::size_t b = static_cast<std::size_t>(nx - i1) * ny;
    const Complex avg = 0.5 * (o[a] + std::conj(o[b]));
    o[a] = avg;
    o[b] = std::conj(avg);
  }
  for (int i1 = 0; i1 < nx; ++i1) {
    for (int i2 = ny / 2 + 1; i2 < ny; ++i2) {
      const int j1 = (nx - i1) % nx;
      o[static_cast<std::size_t>(i1) * ny + i2] = std::conj(o[static_cast<std::size_t>(j1) * ny + (ny - i2)]);
    }
  }
  o[0] = o[0].real();
  return out;
}

SpectralField galerkin_project(const SpectralField& f, const GalerkinCutoff& cutoff, GalerkinPart part) {
  SpectralField out = f;
  const Grid& g = f.grid();
  for (std::size_t i = 0; i < g.size(); ++i) {
    const bool low = cutoff.keeps(g.norm_sq(i));
    if (low == (part == GalerkinPart::Low)) continue;
    for (int c = 0; c < f.components(); ++c) out(c, i) = 0.0;
  }
  return out;
}

double sobolev_norm(const SpectralField& f, double s) {
  if (s < 0.0) require_mean_zero(f, "sobolev_norm");
  const Grid& g = f.grid();
  double sum = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double m = sobolev_multiplier(g.norm_sq(i), 2.0 * s);
    if (m == 0.0) continue;
    for (int c = 0; c < f.components(); ++c) sum += m * std::norm(f(c, i));
  }
  return std::sqrt(g.volume() * sum);
}

double inner_product(const SpectralField& f, const SpectralField& g) {
  if (!f.same_shape(g)) throw GridMismatch("inner_product: shapes differ");
  double sum = 0.0;
  const auto a = f.data();
  const auto b = g.data();
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
  return f.grid().volume() * sum;
}

double divergence_defect(const SpectralField& u) {
  if (u.components() != 2) return 0.0;
  const Grid& g = u.grid();
  double worst = 0.0;
  for (std::size_t i = 1; i < g.size(); ++i) {
    const Wavenumber k = g.wavenumber(i);
    const double mag = std::sqrt(std::norm(u(0, i)) + std::norm(u(1, i)));
    if (mag == 0.0) continue;
    const Complex kdotu = static_cast<double>(k.k1) * u(0, i) + static_cast<double>(k.k2) * u(1, i);
    worst = std::max(worst, std::abs(kdotu) / (std::sqrt(static_cast<double>(k.norm_sq())) * mag));
  }
  return worst;
}

}  // namespace ergc
