#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ergc/forcing/forcing_set.hpp"
#include "ergc/integration/integrate.hpp"
#include "ergc/models/model.hpp"

namespace ergc {

enum class ObservableKind { Energy, Enstrophy, LowMode, BoundedLipschitz };

/// A real functional of the state.
///
/// LowMode reads Re ξ̂(k) for the fluids and the sine coefficient
/// b_k = -2 Im û_k of the wave. BoundedLipschitz is tanh(c·coord) of that
/// coordinate, with c chosen so that c·|coord(a) - coord(b)| <= ρ̃(a, b): the
/// observable is bounded by 1 and 1-Lipschitz in ρ̃.
struct Observable {
  std::string name;
  ObservableKind kind = ObservableKind::Energy;
  Wavenumber mode{1, 0};
  double scale = 1.0;

  static Observable energy();
  static Observable enstrophy();
  static Observable low_mode(Wavenumber k);
  static Observable bounded_lipschitz(const ModelSpec& spec, Wavenumber k);

  double operator()(const ModelSpec& spec, const SpectralField& state) const;
};

/// The scale c of bounded_lipschitz for a given model and mode.
double lipschitz_scale(const ModelSpec& spec, Wavenumber k);

/// Samples φ(u(nT)) and their running means.
struct AverageSeries {
  std::string name;
  double period = 0.0;
  std::vector<double> times;
  std::vector<double> samples;
  std::vector<double> running_mean;
  double mean = 0.0;
  /// Batch-means standard error.
  double standard_error = 0.0;
  int batches = 0;
};

inline constexpr int kDefaultBatches = 20;

/// Builds the series from samples taken every `period`. Needs at least `batches` samples.
AverageSeries average_series(std::string name, double period, std::vector<double> times, std::vector<double> samples,
                             int batches = kDefaultBatches);

/// Birkhoff average of `obs` over the stored states of `trajectory` at times
/// burn_in + nT, n >= 1. Throws InsufficientDuration unless the sampled span
/// holds at least `batches` periods; every sample time must be a stored time.
AverageSeries birkhoff_average(const Trajectory& trajectory, const ModelSpec& spec, const Observable& obs, double period,
                               double burn_in = 0.0, int batches = kDefaultBatches);

/// Streaming sampler for long runs: pass `observer()` to integrate.
class ObservableSampler {
 public:
  ObservableSampler(const ModelSpec& spec, std::vector<Observable> observables, double period, double burn_in);
  StepObserver observer();
  std::vector<AverageSeries> series(int batches = kDefaultBatches) const;

 private:
  void sample(double t, const SpectralField& state);

  ModelSpec spec_;
  std::vector<Observable> observables_;
  double period_, burn_in_;
  std::uint64_t stride_ = 0, offset_ = 0;
  std::vector<double> times_;
  std::vector<std::vector<double>> samples_;
};

// ---- exponential martingale tails ----------------------------------------

/// The energy functional F(t) = Q(u(t)) + ∫₀ᵗ D(u) ds - Σⱼ Q(ρⱼ) t - Q(u₀),
/// where Q is the velocity energy (Voigt: ‖Λ^{-α/2}ξ‖²) and D = Σ_k m(k) w_k |ξ̂_k|²
/// its dissipation in the same weights w_k (ν‖u‖² for Navier–Stokes). F is
/// M - ∫D for the noise martingale M, so for Q-orthogonal directions its
/// supremum has tail <= e^{-γR} with γ = m_min / Σⱼ Q(ρⱼ) whenever
/// Σⱼ Q(ρⱼ) >= 2 maxⱼ Q(ρⱼ). The integral is a left Riemann sum over steps.
class TailFunctional {
 public:
  TailFunctional(const ModelSpec& spec, const ForcingSet* forcing);
  void observe(const StepEvent& event);
  double supremum() const { return sup_; }
  double quadratic(const SpectralField& state) const;
  double dissipation(const SpectralField& state) const;
  double noise_energy() const { return noise_energy_; }

 private:
  ModelSpec spec_;
  mutable std::vector<double> weight_, rate_;  // filled on first use
  double noise_energy_ = 0.0;
  bool started_ = false;
  double q0_ = 0.0, integral_ = 0.0, sup_ = 0.0;
};

/// γ of the tail bound, recomputed from the model and forcing on every call.
double tail_gamma(const ModelSpec& spec, const ForcingSet& forcing);
/// True when Σⱼ Q(ρⱼ) >= 2 maxⱼ Q(ρⱼ), the condition under which e^{-γR} is a proven bound.
bool tail_bound_rigorous(const ModelSpec& spec, const ForcingSet& forcing);

struct TailRow {
  double R = 0.0;
  double empirical = 0.0;
  double bound = 0.0;
  double standard_error = 0.0;
  bool flagged = false;  ///< empirical > bound + 3 SE
};
struct TailTable {
  double gamma = 0.0;
  bool rigorous = false;
  int replicas = 0;
  std::vector<TailRow> rows;
  bool any_flagged() const;
};

/// Tail table from per-replica suprema of the functional.
TailTable martingale_tail_check(const ModelSpec& spec, const ForcingSet& forcing, const std::vector<double>& suprema,
                                const std::vector<double>& R_grid);
/// Tail table from stored trajectories (states at every step).
TailTable martingale_tail_check(const ModelSpec& spec, const ForcingSet& forcing,
                                const std::vector<Trajectory>& ensemble, const std::vector<double>& R_grid);
/// Runs `replicas` independent paths from u0 and tabulates the tails. Needs >= 200 replicas.
TailTable martingale_tail_ensemble(const ModelSpec& spec, const ForcingSet& forcing, const SpectralField& u0,
                                   const StepperConfig& config, int replicas, std::uint64_t seed,
                                   const std::vector<double>& R_grid);

// ---- ergodic agreement ----------------------------------------------------

struct AgreementRow {
  std::string observable;
  double mean_a = 0.0, se_a = 0.0, mean_b = 0.0, se_b = 0.0;
  double difference = 0.0, combined_se = 0.0;
  int samples = 0;
  bool agrees = false;  ///< |difference| <= 3·combined_se
};
struct AgreementSettings {
  StepperConfig stepper;  ///< t_end is the horizon
  double period = 1.0;
  double burn_in = 0.0;
  /// Run a uses NoisePath(seed_a, 0), run b NoisePath(seed_b, 0): distinct seeds give independent noise.
  std::uint64_t seed_a = 1, seed_b = 2;
};
std::vector<AgreementRow> ergodic_agreement(const ModelSpec& spec, const ForcingSet* forcing, const SpectralField& u0_a,
                                            const SpectralField& u0_b, const std::vector<Observable>& observables,
                                            const AgreementSettings& settings,
                                            std::vector<AverageSeries>* series_a = nullptr,
                                            std::vector<AverageSeries>* series_b = nullptr);

// ---- inviscid limit -------------------------------------------------------

struct LimitSettings {
  std::vector<double> epsilons;
  double dt = 1e-3;
  double horizon = 5.0;
  int replicas = 20;
  std::uint64_t seed = 1;
  InitialCondition initial;
  std::vector<Observable> observables;
  /// Krylov–Bogolyubov averages sample every `period` over (0, horizon].
  double period = 0.1;
  int threads = 0;
};
struct LimitRow {
  double epsilon = 0.0;
  double discrepancy = 0.0;  ///< replica mean of ρ̃(u(t), u^ε(t)) at the horizon
  double discrepancy_se = 0.0;
  std::vector<double> averages;      ///< per observable, replica mean of the time average
  std::vector<double> averages_se;   ///< across replicas
  std::vector<double> shift;         ///< averages minus the ε = 0 averages (paired)
  std::vector<double> shift_se;      ///< SE of the paired difference
};
struct LimitReport {
  std::vector<LimitRow> rows;       ///< in the order of settings.epsilons
  LimitRow baseline;                ///< ε = 0
  double fitted_order = 0.0;        ///< slope of log discrepancy against log ε
  double fit_residual = 0.0;
  /// Per observable: |shift| shrinks as ε decreases, up to the combined SE.
  std::vector<bool> monotone;
  /// sup over ε and replicas of the voigt_vorticity functional at the sample times.
  double moment_sup = 0.0;
};
/// Shared-noise study of u^ε (eps_visc = ε) against the eps_visc = 0 run from the same u₀.
LimitReport inviscid_limit_study(const ModelSpec& voigt, const Grid& grid, const ForcingSet* forcing,
                                 const LimitSettings& settings);

}  // namespace ergc
