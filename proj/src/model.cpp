#include "ergc/models/model.hpp"

#include <algorithm>
#include <cmath>

#include "ergc/error.hpp"
#include "ergc/forcing/noise_path.hpp"
#include "ergc/spectral/fft.hpp"

namespace ergc {

namespace {

void require_state(const ModelSpec& spec, const SpectralField& s, const char* context) {
  if (s.components() != spec.state_components()) {
    throw InvalidArgument(std::string(context) + ": state has the wrong number of components for " +
                          to_string(spec.kind));
  }
  if (spec.is_fluid() && s.grid().dims() != 2) throw InvalidArgument(std::string(context) + ": fluid models are 2D");
  if (!spec.is_fluid() && s.grid().dims() != 1) throw InvalidArgument(std::string(context) + ": wave model is 1D");
}

// Drops the cosine part of component c: wave fields stay odd.
void keep_sine(SpectralField& f, int c) {
  for (Complex& z : f.component(c)) z = {0.0, z.imag()};
}

SpectralField sine_of(const SpectralField& state) {
  std::vector<double> u = to_physical(state, 0);
  for (double& x : u) x = std::sin(x);
  SpectralField out = from_physical(state.grid(), u);
  keep_sine(out, 0);
  return out;
}

double sq(double x) { return x * x; }

}  // namespace

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::NavierStokes: return "navier_stokes";
    case ModelKind::FractionalEuler: return "fractional_euler";
    case ModelKind::EulerVoigt: return "euler_voigt";
    case ModelKind::SineGordon: return "sine_gordon";
  }
  return "unknown";
}

ModelKind model_kind_from_string(const std::string& name) {
  for (ModelKind k : {ModelKind::NavierStokes, ModelKind::FractionalEuler, ModelKind::EulerVoigt, ModelKind::SineGordon}) {
    if (to_string(k) == name) return k;
  }
  throw InvalidArgument("unknown model variant '" + name + "'");
}

void ModelSpec::validate() const {
  switch (kind) {
    case ModelKind::NavierStokes:
      if (!(nu > 0.0)) throw InvalidArgument("nu must be positive");
      break;
    case ModelKind::FractionalEuler:
      if (!(gamma > 0.0 && gamma <= 2.0)) throw InvalidArgument("gamma must lie in (0, 2]");
      break;
    case ModelKind::EulerVoigt:
      if (!(alpha >= 2.0 / 3.0)) throw InvalidArgument("alpha must be at least 2/3");
      if (gamma_damp < 0.0 || eps_visc < 0.0) throw InvalidArgument("gamma_damp and eps_visc must be nonnegative");
      break;
    case ModelKind::SineGordon:
      if (!(alpha_damp > 0.0)) throw InvalidArgument("alpha_damp must be positive");
      break;
  }
}

double linear_symbol(const ModelSpec& spec, Wavenumber k) {
  const double k2 = k.norm_sq();
  switch (spec.kind) {
    case ModelKind::NavierStokes: return spec.nu * k2;
    case ModelKind::FractionalEuler: return std::pow(k2, 0.5 * spec.gamma);
    case ModelKind::EulerVoigt: return spec.gamma_damp + spec.eps_visc * k2;
    case ModelKind::SineGordon: break;
  }
  throw InvalidArgument("linear_symbol: the wave model has a block symbol");
}

Eigen::Matrix2d wave_symbol(const ModelSpec& spec, Wavenumber k) {
  Eigen::Matrix2d a;
  a << 0.0, 1.0, -static_cast<double>(k.norm_sq()), -spec.alpha_damp;
  return a;
}

double epsilon_shift(const ModelSpec& spec) {
  const double a = spec.alpha_damp;
  return std::min({kWaveLambda1 / a, a / 2.0, std::sqrt(kWaveLambda1 / 2.0)});
}

SpectralField nonlinear_drift(const ModelSpec& spec, const SpectralField& state) {
  require_state(spec, state, "nonlinear_drift");
  SpectralField out(state.grid(), state.components());
  if (!spec.advection) return out;
  switch (spec.kind) {
    case ModelKind::NavierStokes:
    case ModelKind::FractionalEuler:
      out = advect_by_vorticity(state, state);
      out *= -1.0;
      out(0, 0) = 0.0;  // mean of u·∇ξ vanishes exactly; drop the roundoff
      break;
    case ModelKind::EulerVoigt: {
      const SpectralField smooth = fractional_laplacian(state, -spec.alpha);
      out = advect_by_vorticity(smooth, smooth);
      out *= -1.0;
      out(0, 0) = 0.0;
      break;
    }
    case ModelKind::SineGordon: {
      if (spec.beta == 0.0) break;
      const SpectralField s = dealias(sine_of(state));
      auto v = out.component(1);
      for (std::size_t i = 0; i < v.size(); ++i) v[i] = -spec.beta * s(0, i);
      break;
    }
  }
  return out;
}

SpectralField explicit_drift(const ModelSpec& spec, const SpectralField& state) {
  SpectralField out = nonlinear_drift(spec, state);
  if (!spec.body_force.empty()) out += spec.body_force;
  return out;
}

SpectralField fluid_velocity(const ModelSpec& spec, const SpectralField& state) {
  require_state(spec, state, "fluid_velocity");
  if (!spec.is_fluid()) throw InvalidArgument("fluid_velocity: not a fluid model");
  return biot_savart(state);
}

std::vector<std::pair<std::string, double>> energy_functionals(const ModelSpec& spec, const SpectralField& state) {
  require_state(spec, state, "energy_functionals");
  std::vector<std::pair<std::string, double>> out;
  if (spec.is_fluid()) {
    out.emplace_back("energy", sq(sobolev_norm(state, -1.0)));
    out.emplace_back("enstrophy", sq(sobolev_norm(state, 0.0)));
  }
  switch (spec.kind) {
    case ModelKind::NavierStokes: break;
    case ModelKind::FractionalEuler: {
      const auto xi = to_physical(state);
      double s4 = 0.0;
      for (double x : xi) s4 += sq(sq(x));
      out.emplace_back("vorticity_l4", std::pow(state.grid().volume() * s4 / static_cast<double>(xi.size()), 0.25));
      out.emplace_back("velocity_hr", sobolev_norm(state, spec.sobolev_r - 1.0));
      break;
    }
    case ModelKind::EulerVoigt:
      out.emplace_back("voigt_velocity", sq(sobolev_norm(state, -1.0 - 0.5 * spec.alpha)));
      out.emplace_back("voigt_vorticity", sq(sobolev_norm(state, -0.5 * spec.alpha)));
      break;
    case ModelKind::SineGordon: {
      SpectralField u(state.grid()), v(state.grid());
      std::copy(state.component(0).begin(), state.component(0).end(), u.component(0).begin());
      std::copy(state.component(1).begin(), state.component(1).end(), v.component(0).begin());
      const double h1 = sq(sobolev_norm(u, 1.0));
      const double v2 = sq(sobolev_norm(v, 0.0));
      out.emplace_back("r_sq", sq(sobolev_norm(wave_shifted_velocity(spec, state), 0.0)));
      out.emplace_back("u_h1_sq", h1);
      out.emplace_back("v_sq", v2);
      out.emplace_back("energy", v2 + h1);
      break;
    }
  }
  return out;
}

double energy_functional(const ModelSpec& spec, const SpectralField& state, const std::string& name) {
  for (const auto& [key, value] : energy_functionals(spec, state)) {
    if (key == name) return value;
  }
  throw InvalidArgument("energy functional '" + name + "' is not defined for " + to_string(spec.kind));
}

SpectralField coupling_control(const ModelSpec& spec, const SpectralField& state, const SpectralField& shadow,
                               double lambda, const GalerkinCutoff& cutoff) {
  require_same_grid(state, shadow, "coupling_control");
  require_state(spec, state, "coupling_control");
  require_state(spec, shadow, "coupling_control");
  if (spec.is_fluid()) {
    SpectralField g = galerkin_project(state - shadow, cutoff, GalerkinPart::Low);
    g *= lambda;
    return g;
  }
  SpectralField out(state.grid(), 2);
  if (spec.beta == 0.0) return out;
  const SpectralField diff = galerkin_project(sine_of(state) - sine_of(shadow), cutoff, GalerkinPart::Low);
  auto v = out.component(1);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = spec.beta * diff(0, i);
  return out;
}

SpectralField wave_shifted_velocity(const ModelSpec& spec, const SpectralField& state) {
  const double eps = epsilon_shift(spec);
  SpectralField r(state.grid());
  auto out = r.component(0);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = state(1, i) + eps * state(0, i);
  return r;
}

double rho_tilde(const ModelSpec& spec, const SpectralField& state, const SpectralField& shadow) {
  require_same_grid(state, shadow, "rho_tilde");
  const SpectralField d = state - shadow;
  switch (spec.kind) {
    case ModelKind::NavierStokes:
    case ModelKind::FractionalEuler: return sobolev_norm(d, -1.0);
    case ModelKind::EulerVoigt: return sobolev_norm(d, -1.0 - 0.5 * spec.alpha);
    case ModelKind::SineGordon: {
      SpectralField w(d.grid());
      std::copy(d.component(0).begin(), d.component(0).end(), w.component(0).begin());
      const double y = sobolev_norm(wave_shifted_velocity(spec, d), 0.0);
      return std::sqrt(sq(y) + sq(sobolev_norm(w, 1.0)));
    }
  }
  return 0.0;
}

bool wave_norm_equivalence_holds(const ModelSpec& spec, const SpectralField& state) {
  const auto f = energy_functionals(spec, state);
  const double r2 = f[0].second, h1 = f[1].second, v2 = f[2].second;
  const double mid = r2 + h1;
  const double base = v2 + h1;
  const double slack = 1e-12 * base;
  return 0.5 * base <= mid + slack && mid <= 2.0 * base + slack;
}

SpectralField random_initial_state(const ModelSpec& spec, const Grid& grid, const InitialCondition& ic,
                                   std::uint64_t seed, std::uint32_t replica, std::uint32_t stream) {
  if (ic.band < 1) throw InvalidArgument("initial condition: band must be >= 1");
  const NoisePath rng(seed, replica, 1.0);
  const std::uint32_t channel = 2 + stream;
  SpectralField out(grid, spec.state_components());
  std::uint32_t index = 0;
  if (spec.is_fluid()) {
    if (3 * ic.band > std::min(grid.modes_x(), grid.modes_y())) {
      throw InvalidArgument("initial condition: band exceeds the dealiased range of the grid");
    }
    for (int k1 = 0; k1 <= ic.band; ++k1) {
      for (int k2 = -ic.band; k2 <= ic.band; ++k2) {
        if ((k1 == 0 && k2 <= 0) || k1 * k1 + k2 * k2 > ic.band * ic.band) continue;
        const double w = std::pow(static_cast<double>(k1 * k1 + k2 * k2), -0.25 * ic.slope);
        const double re = rng.standard_normal(channel, 0, index++);
        const double im = rng.standard_normal(channel, 0, index++);
        out.set_mode({k1, k2}, w * Complex(re, im));
      }
    }
    const double norm = sobolev_norm(out, -1.0);
    if (norm > 0.0) out *= ic.amplitude / norm;
  } else {
    if (3 * ic.band > grid.modes_x()) throw InvalidArgument("initial condition: band exceeds the dealiased range");
    for (int j = 1; j <= ic.band; ++j) {
      const double w = std::pow(static_cast<double>(j * j), -0.25 * ic.slope);
      out.set_mode({j, 0}, Complex(0.0, -0.5 * w * rng.standard_normal(channel, 0, index++)), 0);
    }
    SpectralField u(grid);
    std::copy(out.component(0).begin(), out.component(0).end(), u.component(0).begin());
    const double norm = sobolev_norm(u, 1.0);
    if (norm > 0.0) out *= ic.amplitude / norm;
  }
  return out;
}

}  // namespace ergc
