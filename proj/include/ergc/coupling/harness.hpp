#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ergc/forcing/forcing_set.hpp"
#include "ergc/forcing/girsanov_ledger.hpp"
#include "ergc/models/model.hpp"

namespace ergc {

enum class ControlForm { LinearProjection, SineDifference };

std::string to_string(ControlForm form);
/// Accepts "linear_projection" and "sine_difference".
ControlForm control_form_from_string(const std::string& name);

/// The feedback carried by the shadow trajectory.
struct ControlSpec {
  double lambda = 0.0;
  GalerkinCutoff cutoff;
  double budget = 1e4;
  ControlForm form = ControlForm::LinearProjection;

  /// Form/model compatibility, λ >= 0 and coverage of every retained mode by
  /// the forcing. Throws ConfigError keyed under "control".
  void validate(const ModelSpec& spec, const ForcingSet& forcing) const;
};

/// ν·λ_N for Navier–Stokes, λ_N^{γ/2} for fractional Euler (the dissipation
/// rate of the first excluded shell), 1 for Voigt. The wave control has no gain.
double default_lambda(const ModelSpec& spec, const GalerkinCutoff& cutoff);

ControlForm default_control_form(const ModelSpec& spec);

/// Run-time settings of one coupled pair.
struct PairSettings {
  double dt = 1e-3;
  double t_end = 1.0;
  /// Each ΔW sums this many finer draws, so runs at dt and dt/S share a path.
  int substeps = 1;
  /// Record ρ̃, energy and the ledger every this many steps (plus t = 0 and t_end).
  int record_every = 1;
  /// Keep both states at every record (needed by gronwall_envelope_check).
  bool keep_states = false;
  double success_factor = 1e-3;
  /// The decay fit ignores t < transient_fraction·t_end.
  double transient_fraction = 0.1;
  /// ... and samples with ρ̃ below fit_floor·ρ̃(0), where roundoff takes over.
  double fit_floor = 1e-10;
  /// Offset R of the leader energy envelope E(0) + |σ|² t + R.
  double envelope_offset = 10.0;
};

struct CouplingReport {
  std::uint32_t replica = 0;
  double dt = 0.0;
  int record_every = 1;
  std::vector<double> times;
  std::vector<double> rho;
  std::vector<double> energy;  ///< leader
  std::vector<GirsanovLedger> ledgers;
  std::vector<SpectralField> leader_states, shadow_states;  ///< only with keep_states

  bool tau_hit = false;
  std::optional<double> tau_time;
  double fitted_rate = 0.0;
  /// RMS deviation of log ρ̃ from the fitted line.
  double fit_residual = 0.0;
  int fit_points = 0;
  bool success = false;
  bool diverged = false;
  std::optional<double> diverged_time;
  /// Leader energy left the envelope at some recorded time.
  bool envelope_exceeded = false;

  const GirsanovLedger& final_ledger() const { return ledgers.back(); }
};

/// Couples (u, ũ) under one noise path: u is uncontrolled, ũ carries the
/// control while its ledger is active. A diverged pair returns a report with
/// `diverged` set instead of throwing.
CouplingReport run_pair(const ModelSpec& spec, const SpectralField& u0, const SpectralField& shadow0,
                        const ForcingSet& forcing, const ControlSpec& control, const PairSettings& settings,
                        std::uint64_t seed, std::uint32_t replica = 0);

/// Least-squares rate r of ρ̃ ≈ C e^{-rt} over the fit window described in PairSettings.
struct DecayFit {
  double rate = 0.0;
  double residual = 0.0;
  int points = 0;
};
DecayFit fit_decay(const std::vector<double>& times, const std::vector<double>& rho, double t_end,
                   double transient_fraction, double fit_floor);

/// Everything needed to build and run an ensemble of pairs.
struct EnsembleSetup {
  ModelSpec spec;
  Grid grid;
  ForcingSet forcing;
  ControlSpec control;
  PairSettings settings;
  InitialCondition initial;
  /// > 0: ũ0 = u0 + a perturbation with ρ̃(u0, ũ0) = separation.
  /// <= 0: ũ0 is an independent draw with the same law as u0.
  double separation = 0.0;
  std::uint64_t seed = 1;
  /// 0 uses the hardware concurrency.
  int threads = 0;
};

/// Initial pair of replica r: u0 from stream 0, the shadow from stream 1.
std::pair<SpectralField, SpectralField> initial_pair(const EnsembleSetup& setup, std::uint32_t replica);

struct EnsembleSummary {
  std::vector<CouplingReport> reports;
  /// Replicas that threw something other than divergence.
  std::vector<std::pair<std::uint32_t, std::string>> failures;
  int replicas = 0;
  int successes = 0;
  double success_frequency = 0.0;
  double wilson_low = 0.0, wilson_high = 0.0;
  int tau_hits = 0;
  double tau_hit_frequency = 0.0;
  int diverged = 0;
  /// Fitted rates of the successful replicas, in replica order.
  std::vector<double> success_rates;
  /// Replicas whose ledger broke cost <= K + max step increment.
  int budget_violations = 0;
  int envelope_exceedances = 0;
  /// Success frequency among replicas that stayed inside the energy envelope.
  double success_frequency_in_envelope = 0.0;
};

/// 95% Wilson score interval for k successes out of n.
std::pair<double, double> wilson_interval(int successes, int trials);

/// Runs replicas 0..n-1 in parallel. Results are stored and reduced in
/// replica order, so the summary does not depend on scheduling.
EnsembleSummary run_ensemble(const EnsembleSetup& setup, int replicas);

/// Linear rate per retained mode used by gronwall_envelope_check.
enum class GronwallRates {
  /// (g_k² - 1)/dt with g_k the exact per-step multiplier of the scheme: the
  /// linear identity then holds to roundoff.
  Discrete,
  /// -2(m(k) + λ 1_{|k|<=k_c}), the continuous-time right side.
  Continuous,
};

struct GronwallCheck {
  std::vector<double> residual;  ///< (|v_{n+1}|² - |v_n|²)/dt minus the right side at v_n
  std::vector<double> scale;     ///< sum of the absolute values of the right-side terms
  double max_abs_residual = 0.0;
};

/// Residual of the identity
///   d|v|²/dt = -2⟨m v, v⟩ - 2λ|P_N v|² - 2⟨(v·∇)u, v⟩,  v = u - ũ (velocities),
/// per step of a report recorded with keep_states and record_every = 1.
/// Navier–Stokes and fractional Euler with linear-projection control.
GronwallCheck gronwall_envelope_check(const CouplingReport& report, const ModelSpec& spec,
                                      const ControlSpec& control, GronwallRates rates = GronwallRates::Discrete);

}  // namespace ergc
