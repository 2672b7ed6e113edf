#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "ergc/forcing/noise_path.hpp"
#include "ergc/integration/stepper.hpp"

namespace ergc {

/// States at the stored times plus the ledger at each of them.
struct Trajectory {
  std::vector<double> times;
  std::vector<SpectralField> states;
  std::vector<GirsanovLedger> ledgers;
  /// Checkpoints at which the advective CFL number exceeded the limit.
  int cfl_warnings = 0;
};

/// What an observer sees after every step.
struct StepEvent {
  std::uint64_t step;   // index of the completed step (0-based)
  double t;             // time at the start of the step
  double dt;
  const SpectralField& before;
  const SpectralField& after;
  std::span<const double> dW;
};
using StepObserver = std::function<void(const StepEvent&)>;

/// Number of steps covering [0, t_end]; t_end must be a whole multiple of dt.
std::uint64_t step_count(double t_end, double dt);

/// Uncontrolled integration of one replica. The noise path supplies ΔW (and
/// the auxiliary normals of the wave scheme); `forcing == nullptr` runs the
/// deterministic equation. Controlled runs go through the coupling harness.
Trajectory integrate(const ModelSpec& spec, const SpectralField& initial, const StepperConfig& config,
                     const ForcingSet* forcing, NoisePath& noise, const StepObserver& observer = {});

/// Binary checkpoint: "ERGC", u16 version, u32 modes_x, u32 modes_y,
/// u16 components, f64 time, then (re, im) f64 pairs in storage order; all little-endian.
inline constexpr std::uint16_t kCheckpointVersion = 1;
void write_checkpoint(const std::filesystem::path& path, const SpectralField& state, double time);
struct Checkpoint {
  SpectralField state;
  double time = 0.0;
};
Checkpoint read_checkpoint(const std::filesystem::path& path);

/// Pathwise Itô energy identity for a quadratic functional Q of the state.
///
/// Fluids use the velocity energy |u|² (Voigt: ‖Λ^{-α/2}ξ‖², the quantity the
/// regularized advection conserves); the wave uses |v|² + ‖u‖². The residual
///   Q(sₙ) - Q(s₀) - Σ [2⟨Ls + N, s⟩_Q dt + 2⟨s, σΔW⟩_Q + Σⱼ‖σⱼ‖²_Q ΔWⱼ²]
/// uses the realized quadratic variation, so it is O(dt) pathwise.
class EnergyBudget {
 public:
  EnergyBudget(const ModelSpec& spec, const ForcingSet* forcing);
  void observe(const StepEvent& event);
  double quadratic(const SpectralField& state) const;
  /// sup over observed steps of |residual|.
  double max_residual() const { return max_residual_; }
  double residual() const { return residual_; }

 private:
  double pairing(const SpectralField& a, const SpectralField& b) const;

  ModelSpec spec_;
  const ForcingSet* forcing_;
  std::vector<double> qv_weight_;
  double residual_ = 0.0;
  double max_residual_ = 0.0;
  bool started_ = false;
  double q0_ = 0.0;
  double predicted_ = 0.0;
};

}  // namespace ergc
