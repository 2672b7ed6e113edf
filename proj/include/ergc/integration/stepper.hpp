#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "ergc/forcing/forcing_set.hpp"
#include "ergc/forcing/girsanov_ledger.hpp"
#include "ergc/models/model.hpp"

namespace ergc {

enum class Scheme { ExponentialEM, WaveBlock };

struct StepperConfig {
  double dt = 1e-3;
  double t_end = 1.0;
  /// Store a state every this many steps (0: only the endpoints).
  int checkpoint_every = 0;
  /// Wiener increments per step are sums of this many finer draws.
  int substeps = 1;
  /// Advective CFL bound dt·max|u|/Δx checked at start and at checkpoints.
  double cfl_limit = 0.5;
};

/// Per-mode propagators for one (model, grid, forcing, dt).
///
/// Fluids use the exponential Euler–Maruyama step
///   ŝ⁺ = e^{-m dt} ŝ + φ₁(-m dt) dt (N̂ + Ĝ) + η ρ̂·ΔW,
/// with η² = (1 - e^{-2m dt}) / (2m dt) so a pure OU mode has the exact
/// stationary variance at any dt. The wave pair is propagated by the exact
/// exponential of its 2×2 block; the drift enters through ∫₀^dt e^{As} ds and
/// the noise is the exact stochastic convolution, drawn jointly with ΔW from
/// two auxiliary normals per direction.
class Stepper {
 public:
  Stepper(const ModelSpec& spec, const Grid& grid, const ForcingSet* forcing, double dt);

  const ModelSpec& spec() const { return spec_; }
  const Grid& grid() const { return grid_; }
  const ForcingSet* forcing() const { return forcing_; }
  double dt() const { return dt_; }
  Scheme scheme() const { return spec_.is_fluid() ? Scheme::ExponentialEM : Scheme::WaveBlock; }
  int noise_dimension() const { return forcing_ ? forcing_->size() : 0; }
  /// Auxiliary normals consumed per step (wave scheme only).
  int auxiliary_count() const { return scheme() == Scheme::WaveBlock ? 2 * noise_dimension() : 0; }

  /// Advances `state` by one step from time `t`.
  ///
  /// A non-null `control` is used only while `ledger` is active; its shift is
  /// then booked on the ledger. The ledger always advances by dt.
  /// Throws DivergedTrajectory (carrying `t`) on a non-finite result.
  void step(SpectralField& state, std::span<const double> dW, std::span<const double> aux, GirsanovLedger* ledger,
            const SpectralField* control, double t) const;

  /// Per-step multiplier of a fluid mode under the linear part alone.
  double decay(std::size_t index) const { return decay_[index]; }
  /// φ₁(-m dt)·dt for a fluid mode.
  double drift_weight(std::size_t index) const { return drift_weight_[index]; }
  double noise_weight(std::size_t index) const { return noise_weight_[index]; }

 private:
  void step_fluid(SpectralField& state, std::span<const double> dW, const SpectralField* control) const;
  void step_wave(SpectralField& state, std::span<const double> dW, std::span<const double> aux,
                 const SpectralField* control) const;

  struct WaveDirection {
    std::size_t index;
    std::size_t conj_index;
    Complex value;
  };

  ModelSpec spec_;
  Grid grid_;
  const ForcingSet* forcing_;
  double dt_;
  std::vector<double> decay_, drift_weight_, noise_weight_;
  std::vector<std::vector<std::size_t>> noise_support_;
  std::vector<Eigen::Matrix2d> propagator_, integrated_;
  std::vector<Eigen::Vector2d> noise_mean_;
  std::vector<Eigen::Matrix2d> noise_chol_;
  std::vector<WaveDirection> wave_dirs_;
};

/// One exponential Euler–Maruyama step (fluid models).
void step_exponential_em(const Stepper& stepper, SpectralField& state, std::span<const double> dW,
                         GirsanovLedger* ledger, const SpectralField* control, double t);
/// One exact-block step of the wave pair.
void step_wave_block(const Stepper& stepper, SpectralField& state, std::span<const double> dW,
                     std::span<const double> aux, GirsanovLedger* ledger, const SpectralField* control, double t);

/// dt·max|u_adv|/Δx, where u_adv is the advecting velocity of the model (0 for the wave).
double cfl_number(const ModelSpec& spec, const SpectralField& state, double dt);

}  // namespace ergc
