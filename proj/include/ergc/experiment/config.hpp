#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "ergc/coupling/harness.hpp"
#include "ergc/diagnostics/ergodic.hpp"
#include "ergc/integration/stepper.hpp"
#include "ergc/models/model.hpp"

namespace ergc {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

struct ModelBlock {
  ModelKind variant = ModelKind::NavierStokes;
  double nu = 0.1;
  double gamma = 1.0;
  double sobolev_r = 2.5;
  double alpha = 1.0;
  double gamma_damp = 0.5;
  double eps_visc = 0.0;
  double alpha_damp = 0.5;
  double beta = 1.0;
  bool advection = true;
  ModelSpec spec() const;
  bool operator==(const ModelBlock&) const = default;
};

struct GridBlock {
  int nx = 32;
  int ny = 32;  // 1 for the wave model
  bool operator==(const GridBlock&) const = default;
};

/// Fluids: every shell with 0 < |k|² <= max_shell is forced by cos and sin;
/// shell_amplitudes is keyed by |k|².
/// Wave: sin(jx) for j = 1..max_shell, shell_amplitudes keyed by j.
struct ForcingBlock {
  int max_shell = 2;
  double amplitude = 1.0;
  std::map<int, double> shell_amplitudes;
  bool operator==(const ForcingBlock&) const = default;
};

struct InitialBlock {
  double amplitude = 1.0;
  int band = 4;
  double slope = 0.0;
  double separation = 0.0;
  bool operator==(const InitialBlock&) const = default;
};

struct StepperBlock {
  double dt = 1e-3;
  double t_end = 1.0;
  int checkpoint_every = 0;
  int substeps = 1;
  double cfl_limit = 0.5;
  bool operator==(const StepperBlock&) const = default;
};

struct ControlBlock {
  double lambda = 0.0;  // unused by the sine-difference control
  double cutoff = 0.0;
  double budget = 1e4;
  ControlForm form = ControlForm::LinearProjection;
  int record_every = 100;
  double success_factor = 1e-3;
  double transient_fraction = 0.1;
  double fit_floor = 1e-10;
  double envelope_offset = 10.0;
  bool operator==(const ControlBlock&) const = default;
};

struct EnsembleBlock {
  int replicas = 1;
  std::uint64_t seed = 1;
  int threads = 0;
  /// Fraction of diverged replicas tolerated before the run exits with status 3.
  double diverged_tolerance = 0.0;
  bool operator==(const EnsembleBlock&) const = default;
};

struct ErgodicBlock {
  double period = 1.0;
  double burn_in = 0.0;
  std::vector<std::string> observables;
  std::vector<double> tail_R{1.0, 2.0, 4.0, 8.0};
  /// 0 skips the tail check; otherwise at least 200.
  int tail_replicas = 0;
  bool operator==(const ErgodicBlock&) const = default;
};

/// Present only for euler_voigt.
struct LimitBlock {
  std::vector<double> epsilons{0.04, 0.02, 0.01, 0.005};
  double horizon = 5.0;
  double period = 0.1;
  std::vector<std::string> observables;
  bool operator==(const LimitBlock&) const = default;
};

struct OutputBlock {
  std::string directory = "ergc_run";
  std::vector<std::string> formats{"ndjson", "csv"};
  bool checkpoints = true;
  bool operator==(const OutputBlock&) const = default;
};

/// A fully resolved experiment: every default is materialized.
struct ExperimentConfig {
  int schema_version = kSchemaVersion;
  ModelBlock model;
  GridBlock grid;
  ForcingBlock forcing;
  InitialBlock initial;
  StepperBlock stepper;
  ControlBlock control;
  EnsembleBlock ensemble;
  ErgodicBlock ergodic;
  LimitBlock inviscid_limit;
  OutputBlock output;
  bool operator==(const ExperimentConfig&) const = default;

  bool is_fluid() const { return model.variant != ModelKind::SineGordon; }
  Grid make_grid() const;
  ForcingSet make_forcing() const;
  ControlSpec control_spec() const;
  StepperConfig stepper_config() const;
  PairSettings pair_settings() const;
  InitialCondition initial_condition() const;
  bool wants(const std::string& format) const;
};

/// Parses and validates a JSON config. Unknown keys, keys that do not apply
/// to the chosen variant, wrong types and out-of-range values all raise
/// ConfigError with the dotted key path.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig parse_config(const Json& j);
inline ExperimentConfig parse_config(const char* text) { return parse_config(std::string(text)); }
/// Every field, defaults included, in a stable key order.
Json to_json(const ExperimentConfig& config);

/// Applies `key.path=value` to a raw config before parsing. The value is read
/// as JSON when it parses, otherwise as a string.
void apply_override(Json& raw, const std::string& assignment);

/// "energy", "enstrophy", "low_mode(a,b)" or "tanh_mode(a,b)".
Observable parse_observable(const ModelSpec& spec, const std::string& name);

/// 64-bit FNV-1a of a byte string, as 16 lowercase hex digits.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace ergc
