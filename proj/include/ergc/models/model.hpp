#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "ergc/spectral/field.hpp"
#include "ergc/spectral/operators.hpp"

namespace ergc {

enum class ModelKind { NavierStokes, FractionalEuler, EulerVoigt, SineGordon };

std::string to_string(ModelKind kind);
/// Accepts "navier_stokes", "fractional_euler", "euler_voigt", "sine_gordon".
ModelKind model_kind_from_string(const std::string& name);

/// One of the four stochastic PDEs and its physical parameters.
///
/// The fluid models are integrated in vorticity ξ on the 2D torus; the wave
/// model carries the pair (u, v = ∂ₜu) on a 1D grid as the odd extension of a
/// function on (0, π), so only sine modes are ever populated.
struct ModelSpec {
  ModelKind kind = ModelKind::NavierStokes;
  double nu = 0.1;          // Navier–Stokes viscosity
  double gamma = 1.0;       // fractional dissipation exponent, symbol |k|^γ
  double gamma_damp = 0.5;  // Voigt linear damping
  double alpha = 1.0;       // Voigt regularization order
  double eps_visc = 0.0;    // Voigt viscous regularization
  double alpha_damp = 0.5;  // Sine-Gordon damping
  double beta = 1.0;        // Sine-Gordon nonlinearity strength
  double sobolev_r = 2.5;   // H^r velocity monitor for fractional Euler
  /// false drops the nonlinearity: the linear (Ornstein–Uhlenbeck) model.
  bool advection = true;
  /// Optional time-independent forcing in the prognostic variable (empty = none).
  SpectralField body_force;

  bool is_fluid() const { return kind != ModelKind::SineGordon; }
  int state_components() const { return is_fluid() ? 1 : 2; }
  /// Throws InvalidArgument on parameter ranges the models do not support.
  void validate() const;
};

/// Scalar decay rate m(k) of a fluid mode (`∂ₜξ̂ = -m ξ̂ + …`).
double linear_symbol(const ModelSpec& spec, Wavenumber k);
/// Generator `[[0, 1], [-|k|², -α_damp]]` of the wave pair (û, v̂) at mode k.
Eigen::Matrix2d wave_symbol(const ModelSpec& spec, Wavenumber k);

/// Smallest eigenvalue of the Dirichlet Laplacian on (0, π).
inline constexpr double kWaveLambda1 = 1.0;
/// min{λ₁/α, α/2, sqrt(λ₁/2)} for the damping α of `spec`.
double epsilon_shift(const ModelSpec& spec);

/// Nonlinear part of the drift, without body force or control.
SpectralField nonlinear_drift(const ModelSpec& spec, const SpectralField& state);
/// nonlinear_drift plus the body force: everything the stepper treats explicitly.
SpectralField explicit_drift(const ModelSpec& spec, const SpectralField& state);

/// Named energy-type functionals of a state, in a fixed order per variant.
std::vector<std::pair<std::string, double>> energy_functionals(const ModelSpec& spec, const SpectralField& state);
/// Convenience lookup into energy_functionals; throws InvalidArgument for unknown names.
double energy_functional(const ModelSpec& spec, const SpectralField& state, const std::string& name);

/// Feedback acting on the shadow's drift: λ P_N(ξ - ξ̃) for the fluids,
/// (0, β P_N(sin u - sin ũ)) for the wave model.
SpectralField coupling_control(const ModelSpec& spec, const SpectralField& state, const SpectralField& shadow,
                               double lambda, const GalerkinCutoff& cutoff);

/// The weak distance in which coupled pairs must converge.
double rho_tilde(const ModelSpec& spec, const SpectralField& state, const SpectralField& shadow);

/// r = v + ε_shift u for a wave state.
SpectralField wave_shifted_velocity(const ModelSpec& spec, const SpectralField& state);
/// ½(|v|² + ‖u‖²) <= |r|² + ‖u‖² <= 2(|v|² + ‖u‖²).
bool wave_norm_equivalence_holds(const ModelSpec& spec, const SpectralField& state);

/// Velocity field of a fluid state (Voigt returns the unregularized velocity).
SpectralField fluid_velocity(const ModelSpec& spec, const SpectralField& state);

/// Random initial state drawn from a dedicated Philox channel.
///
/// Fluids: vorticity modes with `0 < |k| <= band` and `E|ξ̂_k|² ∝ |k|^{-slope}`,
/// rescaled so the velocity L² norm equals `amplitude`. Wave: sine modes
/// `1..band` of u with the same spectral law and `‖u‖ = amplitude`; v = 0.
struct InitialCondition {
  double amplitude = 1.0;
  int band = 4;
  double slope = 0.0;
};
SpectralField random_initial_state(const ModelSpec& spec, const Grid& grid, const InitialCondition& ic,
                                   std::uint64_t seed, std::uint32_t replica, std::uint32_t stream);

}  // namespace ergc
