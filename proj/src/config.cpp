#include "ergc/experiment/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <regex>
#include <set>

#include "ergc/error.hpp"
#include "ergc/integration/integrate.hpp"

namespace ergc {

namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

std::string type_name(const Json& v) { return v.type_name(); }

/// One JSON object being consumed key by key; leftovers are errors.
class Block {
 public:
  Block(const Json* obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (obj_ && !obj_->is_object()) throw ConfigError(path_, "expected an object, got " + type_name(*obj_));
  }

  bool has(const std::string& key) const { return obj_ && obj_->contains(key); }

  const Json* raw(const std::string& key) {
    if (!has(key)) return nullptr;
    used_.insert(key);
    return &obj_->at(key);
  }

  double number(const std::string& key, double def) {
    const Json* v = raw(key);
    if (!v) return def;
    if (!v->is_number()) throw ConfigError(join(path_, key), "expected a number, got " + type_name(*v));
    const double x = v->get<double>();
    if (!std::isfinite(x)) throw ConfigError(join(path_, key), "must be finite");
    return x;
  }

  int integer(const std::string& key, int def) {
    const Json* v = raw(key);
    if (!v) return def;
    if (!v->is_number_integer()) throw ConfigError(join(path_, key), "expected an integer, got " + type_name(*v));
    const auto x = v->get<std::int64_t>();
    if (x < -(1LL << 31) || x >= (1LL << 31)) throw ConfigError(join(path_, key), "out of range");
    return static_cast<int>(x);
  }

  std::uint64_t unsigned_integer(const std::string& key, std::uint64_t def) {
    const Json* v = raw(key);
    if (!v) return def;
    if (v->is_number_unsigned()) return v->get<std::uint64_t>();
    if (v->is_number_integer()) throw ConfigError(join(path_, key), "must be nonnegative");
    throw ConfigError(join(path_, key), "expected a nonnegative integer, got " + type_name(*v));
  }

  bool boolean(const std::string& key, bool def) {
    const Json* v = raw(key);
    if (!v) return def;
    if (!v->is_boolean()) throw ConfigError(join(path_, key), "expected true or false, got " + type_name(*v));
    return v->get<bool>();
  }

  std::string string(const std::string& key, const std::string& def) {
    const Json* v = raw(key);
    if (!v) return def;
    if (!v->is_string()) throw ConfigError(join(path_, key), "expected a string, got " + type_name(*v));
    return v->get<std::string>();
  }

  std::vector<std::string> strings(const std::string& key, const std::vector<std::string>& def) {
    const Json* v = raw(key);
    if (!v) return def;
    if (!v->is_array()) throw ConfigError(join(path_, key), "expected an array of strings");
    std::vector<std::string> out;
    for (const Json& e : *v) {
      if (!e.is_string()) throw ConfigError(join(path_, key), "expected an array of strings");
      out.push_back(e.get<std::string>());
    }
    return out;
  }

  std::vector<double> numbers(const std::string& key, const std::vector<double>& def) {
    const Json* v = raw(key);
    if (!v) return def;
    if (!v->is_array()) throw ConfigError(join(path_, key), "expected an array of numbers");
    std::vector<double> out;
    for (const Json& e : *v) {
      if (!e.is_number()) throw ConfigError(join(path_, key), "expected an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  const std::string& path() const { return path_; }

  /// Throws for the first key not consumed. Keys listed in `elsewhere` exist in
  /// the schema but not for this variant.
  void finish(const std::set<std::string>& elsewhere = {}, const std::string& variant = "") const {
    if (!obj_) return;
    for (const auto& [key, value] : obj_->items()) {
      if (used_.count(key)) continue;
      if (elsewhere.count(key)) {
        throw ConfigError(join(path_, key), "does not apply to the " + variant + " variant");
      }
      throw ConfigError(join(path_, key), "unknown key");
    }
  }

 private:
  const Json* obj_;
  std::string path_;
  std::set<std::string> used_;
};

void require(bool ok, const std::string& path, const std::string& message) {
  if (!ok) throw ConfigError(path, message);
}

void require_steps(double t, double dt, const std::string& path) {
  try {
    step_count(t, dt);
  } catch (const InvalidArgument&) {
    throw ConfigError(path, "must be a nonnegative whole multiple of stepper.dt");
  }
}

const std::set<std::string> kModelKeys{"variant", "advection", "nu",        "gamma",      "sobolev_r",
                                       "alpha",   "gamma_damp", "eps_visc", "alpha_damp", "beta"};

std::vector<std::string> model_keys(ModelKind kind) {
  switch (kind) {
    case ModelKind::NavierStokes: return {"nu"};
    case ModelKind::FractionalEuler: return {"gamma", "sobolev_r"};
    case ModelKind::EulerVoigt: return {"alpha", "gamma_damp", "eps_visc"};
    case ModelKind::SineGordon: return {"alpha_damp", "beta"};
  }
  return {};
}

std::vector<std::string> default_observables(bool fluid) {
  if (fluid) return {"energy", "low_mode(1,0)", "low_mode(1,1)"};
  return {"energy", "low_mode(1,0)", "low_mode(2,0)"};
}

void check_observables(const ModelSpec& spec, const Grid& grid, const std::vector<std::string>& names,
                       const std::string& path) {
  require(!names.empty(), path, "needs at least one observable");
  for (const std::string& n : names) {
    Observable o;
    try {
      o = parse_observable(spec, n);
    } catch (const InvalidArgument& e) {
      throw ConfigError(path, e.what());
    }
    if (o.kind == ObservableKind::LowMode || o.kind == ObservableKind::BoundedLipschitz) {
      const bool inside = 2 * std::abs(o.mode.k1) < grid.modes_x() &&
                          (grid.dims() == 1 || 2 * std::abs(o.mode.k2) < grid.modes_y());
      require(inside, path, "observable '" + n + "' reads a mode outside the grid");
    }
  }
}

}  // namespace

ModelSpec ModelBlock::spec() const {
  ModelSpec s;
  s.kind = variant;
  s.nu = nu;
  s.gamma = gamma;
  s.sobolev_r = sobolev_r;
  s.alpha = alpha;
  s.gamma_damp = gamma_damp;
  s.eps_visc = eps_visc;
  s.alpha_damp = alpha_damp;
  s.beta = beta;
  s.advection = advection;
  return s;
}

Grid ExperimentConfig::make_grid() const { return is_fluid() ? Grid(grid.nx, grid.ny) : Grid(grid.nx, 1); }

ForcingSet ExperimentConfig::make_forcing() const {
  ShellAmplitudes amp{forcing.amplitude, {}};
  // wave shells are mode numbers j; the forcing set keys them by j²
  for (const auto& [shell, a] : forcing.shell_amplitudes) amp.by_norm_sq[is_fluid() ? shell : shell * shell] = a;
  return is_fluid() ? ForcingSet::canonical_fluid(make_grid(), forcing.max_shell, amp)
                    : ForcingSet::canonical_wave(make_grid(), forcing.max_shell, amp);
}

ControlSpec ExperimentConfig::control_spec() const {
  ControlSpec c;
  c.lambda = is_fluid() ? control.lambda : 0.0;
  c.cutoff = GalerkinCutoff(control.cutoff, is_fluid() ? 2 : 1);
  c.budget = control.budget;
  c.form = control.form;
  return c;
}

StepperConfig ExperimentConfig::stepper_config() const {
  StepperConfig s;
  s.dt = stepper.dt;
  s.t_end = stepper.t_end;
  s.checkpoint_every = stepper.checkpoint_every;
  s.substeps = stepper.substeps;
  s.cfl_limit = stepper.cfl_limit;
  return s;
}

PairSettings ExperimentConfig::pair_settings() const {
  PairSettings p;
  p.dt = stepper.dt;
  p.t_end = stepper.t_end;
  p.substeps = stepper.substeps;
  p.record_every = control.record_every;
  p.success_factor = control.success_factor;
  p.transient_fraction = control.transient_fraction;
  p.fit_floor = control.fit_floor;
  p.envelope_offset = control.envelope_offset;
  return p;
}

InitialCondition ExperimentConfig::initial_condition() const {
  return {initial.amplitude, initial.band, initial.slope};
}

bool ExperimentConfig::wants(const std::string& format) const {
  return std::find(output.formats.begin(), output.formats.end(), format) != output.formats.end();
}

Observable parse_observable(const ModelSpec& spec, const std::string& name) {
  if (name == "energy") return Observable::energy();
  if (name == "enstrophy") {
    if (!spec.is_fluid()) throw InvalidArgument("enstrophy is not defined for the wave model");
    return Observable::enstrophy();
  }
  static const std::regex mode_re(R"(^(low_mode|tanh_mode)\((-?\d+),(-?\d+)\)$)");
  std::smatch m;
  if (!std::regex_match(name, m, mode_re)) throw InvalidArgument("unknown observable '" + name + "'");
  const Wavenumber k{std::stoi(m[2]), std::stoi(m[3])};
  if (k.norm_sq() == 0) throw InvalidArgument("observable '" + name + "' reads the mean mode");
  if (!spec.is_fluid() && (k.k2 != 0 || k.k1 < 1)) {
    throw InvalidArgument("wave observables read sine modes (j,0) with j >= 1, got '" + name + "'");
  }
  if (m[1] == "low_mode") return Observable::low_mode(k);
  return Observable::bounded_lipschitz(spec, k);
}

ExperimentConfig parse_config(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError("", std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

ExperimentConfig parse_config(const Json& j) {
  Block top(&j, "");
  ExperimentConfig c;
  c.schema_version = top.integer("schema_version", kSchemaVersion);
  require(c.schema_version == kSchemaVersion, "schema_version",
          "unsupported schema version " + std::to_string(c.schema_version) + " (expected " +
              std::to_string(kSchemaVersion) + ")");

  // model
  {
    const Json* raw = top.raw("model");
    if (!raw) throw ConfigError("model", "missing required block");
    Block b(raw, "model");
    if (!b.has("variant")) throw ConfigError("model.variant", "missing required key");
    const std::string variant = b.string("variant", "");
    try {
      c.model.variant = model_kind_from_string(variant);
    } catch (const InvalidArgument& e) {
      throw ConfigError("model.variant", e.what());
    }
    c.model.advection = b.boolean("advection", true);
    for (const std::string& key : model_keys(c.model.variant)) {
      double* field = key == "nu"           ? &c.model.nu
                      : key == "gamma"      ? &c.model.gamma
                      : key == "sobolev_r"  ? &c.model.sobolev_r
                      : key == "alpha"      ? &c.model.alpha
                      : key == "gamma_damp" ? &c.model.gamma_damp
                      : key == "eps_visc"   ? &c.model.eps_visc
                      : key == "alpha_damp" ? &c.model.alpha_damp
                                            : &c.model.beta;
      *field = b.number(key, *field);
    }
    b.finish(kModelKeys, variant);
    const ModelBlock& m = c.model;
    switch (m.variant) {
      case ModelKind::NavierStokes: require(m.nu > 0.0, "model.nu", "must be positive"); break;
      case ModelKind::FractionalEuler:
        require(m.gamma > 0.0 && m.gamma <= 2.0, "model.gamma", "must lie in (0, 2]");
        break;
      case ModelKind::EulerVoigt:
        require(m.alpha >= 2.0 / 3.0, "model.alpha", "must be at least 2/3");
        require(m.gamma_damp >= 0.0, "model.gamma_damp", "must be nonnegative");
        require(m.eps_visc >= 0.0, "model.eps_visc", "must be nonnegative");
        break;
      case ModelKind::SineGordon: require(m.alpha_damp > 0.0, "model.alpha_damp", "must be positive"); break;
    }
  }
  const bool fluid = c.is_fluid();
  const ModelSpec spec = c.model.spec();

  // grid
  {
    Block b(top.raw("grid"), "grid");
    c.grid.nx = b.integer("nx", fluid ? 32 : 128);
    c.grid.ny = fluid ? b.integer("ny", 32) : 1;
    b.finish({"ny"}, to_string(c.model.variant));
    require(c.grid.nx >= 8 && c.grid.nx <= 4096 && c.grid.nx % 2 == 0, "grid.nx", "must be even and in [8, 4096]");
    if (fluid) {
      require(c.grid.ny >= 8 && c.grid.ny <= 4096 && c.grid.ny % 2 == 0, "grid.ny",
              "must be even and in [8, 4096]");
    }
  }
  const Grid grid = c.make_grid();

  // forcing
  {
    Block b(top.raw("forcing"), "forcing");
    c.forcing.max_shell = b.integer("max_shell", fluid ? 2 : 8);
    c.forcing.amplitude = b.number("amplitude", 1.0);
    if (const Json* sa = b.raw("shell_amplitudes")) {
      if (!sa->is_object()) throw ConfigError("forcing.shell_amplitudes", "expected an object of shell: amplitude");
      for (const auto& [key, value] : sa->items()) {
        const std::string path = "forcing.shell_amplitudes." + key;
        int shell = 0;
        try {
          std::size_t used = 0;
          shell = std::stoi(key, &used);
          if (used != key.size()) throw std::invalid_argument(key);
        } catch (const std::exception&) {
          throw ConfigError(path, "shell keys must be integers");
        }
        require(shell >= 1 && shell <= c.forcing.max_shell, path, "shell is not forced (1..max_shell)");
        require(value.is_number() && value.get<double>() > 0.0, path, "amplitude must be a positive number");
        c.forcing.shell_amplitudes[shell] = value.get<double>();
      }
    }
    const Json* d = b.raw("d");
    b.finish();
    require(c.forcing.max_shell >= 1, "forcing.max_shell", "must be >= 1");
    require(c.forcing.amplitude > 0.0, "forcing.amplitude", "must be positive");
    const int limit = fluid ? std::min(grid.modes_x(), grid.modes_y()) / 3 : grid.modes_x() / 3;
    const int reach = fluid ? static_cast<int>(std::ceil(std::sqrt(c.forcing.max_shell))) : c.forcing.max_shell;
    require(reach <= limit, "forcing.max_shell", "forced modes must lie inside the dealiased band of the grid");
    if (d) {
      const int size = c.make_forcing().size();
      require(d->is_number_integer() && d->get<int>() == size, "forcing.d",
              "is derived from max_shell; expected " + std::to_string(size));
    }
  }

  // initial
  {
    Block b(top.raw("initial"), "initial");
    c.initial.amplitude = b.number("amplitude", 1.0);
    c.initial.band = b.integer("band", 4);
    c.initial.slope = b.number("slope", 0.0);
    c.initial.separation = b.number("separation", 0.0);
    b.finish();
    require(c.initial.amplitude >= 0.0, "initial.amplitude", "must be nonnegative");
    const int limit = fluid ? std::min(grid.modes_x(), grid.modes_y()) : grid.modes_x();
    require(c.initial.band >= 1 && 3 * c.initial.band <= limit, "initial.band",
            "must be >= 1 and inside the dealiased band of the grid");
    require(c.initial.separation >= 0.0, "initial.separation", "must be nonnegative (0: independent draws)");
  }

  // stepper
  {
    Block b(top.raw("stepper"), "stepper");
    c.stepper.dt = b.number("dt", 1e-3);
    c.stepper.t_end = b.number("t_end", 1.0);
    c.stepper.checkpoint_every = b.integer("checkpoint_every", 0);
    c.stepper.substeps = b.integer("substeps", 1);
    c.stepper.cfl_limit = b.number("cfl_limit", 0.5);
    b.finish();
    require(c.stepper.dt > 0.0, "stepper.dt", "must be positive");
    require_steps(c.stepper.t_end, c.stepper.dt, "stepper.t_end");
    require(c.stepper.checkpoint_every >= 0, "stepper.checkpoint_every", "must be >= 0");
    require(c.stepper.substeps >= 1, "stepper.substeps", "must be >= 1");
    require(c.stepper.cfl_limit > 0.0, "stepper.cfl_limit", "must be positive");
  }

  // control
  {
    Block b(top.raw("control"), "control");
    c.control.cutoff = b.number("cutoff", fluid ? std::sqrt(static_cast<double>(c.forcing.max_shell))
                                                : static_cast<double>(c.forcing.max_shell));
    require(c.control.cutoff > 0.0, "control.cutoff", "must be positive");
    const GalerkinCutoff cut(c.control.cutoff, fluid ? 2 : 1);
    if (fluid) {
      c.control.lambda = b.number("lambda", default_lambda(spec, cut));
      require(c.control.lambda >= 0.0, "control.lambda", "must be nonnegative");
    }
    c.control.budget = b.number("budget", 1e4);
    const std::string form = b.string("form", to_string(default_control_form(spec)));
    try {
      c.control.form = control_form_from_string(form);
    } catch (const InvalidArgument& e) {
      throw ConfigError("control.form", e.what());
    }
    c.control.record_every = b.integer("record_every", 100);
    c.control.success_factor = b.number("success_factor", 1e-3);
    c.control.transient_fraction = b.number("transient_fraction", 0.1);
    c.control.fit_floor = b.number("fit_floor", 1e-10);
    c.control.envelope_offset = b.number("envelope_offset", 10.0);
    b.finish({"lambda"}, to_string(c.model.variant));
    require(c.control.record_every >= 1, "control.record_every", "must be >= 1");
    require(c.control.success_factor > 0.0 && c.control.success_factor < 1.0, "control.success_factor",
            "must lie in (0, 1)");
    require(c.control.transient_fraction >= 0.0 && c.control.transient_fraction < 1.0, "control.transient_fraction",
            "must lie in [0, 1)");
    require(c.control.fit_floor > 0.0 && c.control.fit_floor < 1.0, "control.fit_floor", "must lie in (0, 1)");
    require(c.control.envelope_offset >= 0.0, "control.envelope_offset", "must be nonnegative");
    // form compatibility first, then coverage
    c.control_spec().validate(spec, c.make_forcing());
  }

  // ensemble
  {
    Block b(top.raw("ensemble"), "ensemble");
    c.ensemble.replicas = b.integer("replicas", 1);
    c.ensemble.seed = b.unsigned_integer("seed", 1);
    c.ensemble.threads = b.integer("threads", 0);
    c.ensemble.diverged_tolerance = b.number("diverged_tolerance", 0.0);
    b.finish();
    require(c.ensemble.replicas >= 1, "ensemble.replicas", "must be >= 1");
    require(c.ensemble.threads >= 0, "ensemble.threads", "must be >= 0 (0: hardware concurrency)");
    require(c.ensemble.diverged_tolerance >= 0.0 && c.ensemble.diverged_tolerance <= 1.0,
            "ensemble.diverged_tolerance", "must lie in [0, 1]");
  }

  // ergodic
  {
    Block b(top.raw("ergodic"), "ergodic");
    c.ergodic.period = b.number("period", 1.0);
    c.ergodic.burn_in = b.number("burn_in", 0.0);
    c.ergodic.observables = b.strings("observables", default_observables(fluid));
    c.ergodic.tail_R = b.numbers("tail_R", c.ergodic.tail_R);
    c.ergodic.tail_replicas = b.integer("tail_replicas", 0);
    b.finish();
    require(c.ergodic.period > 0.0, "ergodic.period", "must be positive");
    require_steps(c.ergodic.period, c.stepper.dt, "ergodic.period");
    require_steps(c.ergodic.burn_in, c.stepper.dt, "ergodic.burn_in");
    check_observables(spec, grid, c.ergodic.observables, "ergodic.observables");
    for (double r : c.ergodic.tail_R) require(r > 0.0, "ergodic.tail_R", "levels must be positive");
    require(c.ergodic.tail_replicas == 0 || c.ergodic.tail_replicas >= 200, "ergodic.tail_replicas",
            "must be 0 (skip) or at least 200");
    require(c.ergodic.tail_replicas == 0 || fluid, "ergodic.tail_replicas",
            "the martingale tail check is defined for the fluid models");
  }

  // inviscid limit (euler_voigt only)
  if (c.model.variant == ModelKind::EulerVoigt) {
    Block b(top.raw("inviscid_limit"), "inviscid_limit");
    c.inviscid_limit.epsilons = b.numbers("epsilons", c.inviscid_limit.epsilons);
    c.inviscid_limit.horizon = b.number("horizon", 5.0);
    c.inviscid_limit.period = b.number("period", 0.1);
    c.inviscid_limit.observables = b.strings("observables", {"energy", "tanh_mode(1,0)", "tanh_mode(1,1)"});
    b.finish();
    require(!c.inviscid_limit.epsilons.empty(), "inviscid_limit.epsilons", "needs at least one value");
    for (double e : c.inviscid_limit.epsilons) require(e >= 0.0, "inviscid_limit.epsilons", "must be nonnegative");
    require(c.inviscid_limit.horizon > 0.0, "inviscid_limit.horizon", "must be positive");
    require_steps(c.inviscid_limit.horizon, c.stepper.dt, "inviscid_limit.horizon");
    require(c.inviscid_limit.period > 0.0, "inviscid_limit.period", "must be positive");
    require_steps(c.inviscid_limit.period, c.stepper.dt, "inviscid_limit.period");
    check_observables(spec, grid, c.inviscid_limit.observables, "inviscid_limit.observables");
  } else {
    c.inviscid_limit = LimitBlock{};
    c.inviscid_limit.epsilons.clear();
  }

  // output
  {
    Block b(top.raw("output"), "output");
    c.output.directory = b.string("directory", "ergc_run");
    c.output.formats = b.strings("formats", {"ndjson", "csv"});
    c.output.checkpoints = b.boolean("checkpoints", true);
    b.finish();
    require(!c.output.directory.empty(), "output.directory", "must not be empty");
    std::set<std::string> seen;
    for (const std::string& f : c.output.formats) {
      require(f == "ndjson" || f == "csv", "output.formats", "unknown format '" + f + "' (ndjson, csv)");
      require(seen.insert(f).second, "output.formats", "duplicate format '" + f + "'");
    }
  }

  top.finish(c.model.variant == ModelKind::EulerVoigt ? std::set<std::string>{}
                                                       : std::set<std::string>{"inviscid_limit"},
             to_string(c.model.variant));
  return c;
}

Json to_json(const ExperimentConfig& c) {
  const bool fluid = c.is_fluid();
  Json j;
  j["schema_version"] = c.schema_version;

  Json m;
  m["variant"] = to_string(c.model.variant);
  m["advection"] = c.model.advection;
  const ModelBlock& mb = c.model;
  for (const std::string& key : model_keys(c.model.variant)) {
    const double v = key == "nu"           ? mb.nu
                     : key == "gamma"      ? mb.gamma
                     : key == "sobolev_r"  ? mb.sobolev_r
                     : key == "alpha"      ? mb.alpha
                     : key == "gamma_damp" ? mb.gamma_damp
                     : key == "eps_visc"   ? mb.eps_visc
                     : key == "alpha_damp" ? mb.alpha_damp
                                           : mb.beta;
    m[key] = v;
  }
  j["model"] = m;

  Json g;
  g["nx"] = c.grid.nx;
  if (fluid) g["ny"] = c.grid.ny;
  j["grid"] = g;

  Json f;
  f["max_shell"] = c.forcing.max_shell;
  f["amplitude"] = c.forcing.amplitude;
  Json sa = Json::object();
  for (const auto& [shell, amp] : c.forcing.shell_amplitudes) sa[std::to_string(shell)] = amp;
  f["shell_amplitudes"] = sa;
  f["d"] = c.make_forcing().size();
  j["forcing"] = f;

  j["initial"] = {{"amplitude", c.initial.amplitude},
                  {"band", c.initial.band},
                  {"slope", c.initial.slope},
                  {"separation", c.initial.separation}};
  j["stepper"] = {{"dt", c.stepper.dt},
                  {"t_end", c.stepper.t_end},
                  {"checkpoint_every", c.stepper.checkpoint_every},
                  {"substeps", c.stepper.substeps},
                  {"cfl_limit", c.stepper.cfl_limit}};

  Json ctl;
  if (fluid) ctl["lambda"] = c.control.lambda;
  ctl["cutoff"] = c.control.cutoff;
  ctl["budget"] = c.control.budget;
  ctl["form"] = to_string(c.control.form);
  ctl["record_every"] = c.control.record_every;
  ctl["success_factor"] = c.control.success_factor;
  ctl["transient_fraction"] = c.control.transient_fraction;
  ctl["fit_floor"] = c.control.fit_floor;
  ctl["envelope_offset"] = c.control.envelope_offset;
  j["control"] = ctl;

  j["ensemble"] = {{"replicas", c.ensemble.replicas},
                   {"seed", c.ensemble.seed},
                   {"threads", c.ensemble.threads},
                   {"diverged_tolerance", c.ensemble.diverged_tolerance}};
  j["ergodic"] = {{"period", c.ergodic.period},
                  {"burn_in", c.ergodic.burn_in},
                  {"observables", c.ergodic.observables},
                  {"tail_R", c.ergodic.tail_R},
                  {"tail_replicas", c.ergodic.tail_replicas}};
  if (c.model.variant == ModelKind::EulerVoigt) {
    j["inviscid_limit"] = {{"epsilons", c.inviscid_limit.epsilons},
                           {"horizon", c.inviscid_limit.horizon},
                           {"period", c.inviscid_limit.period},
                           {"observables", c.inviscid_limit.observables}};
  }
  j["output"] = {{"directory", c.output.directory},
                 {"formats", c.output.formats},
                 {"checkpoints", c.output.checkpoints}};
  return j;
}

void apply_override(Json& raw, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("", "override '" + assignment + "' is not of the form key.path=value");
  }
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  Json value;
  try {
    value = Json::parse(text);
  } catch (const Json::parse_error&) {
    value = text;
  }
  if (!raw.is_object()) raw = Json::object();
  Json* node = &raw;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw ConfigError(path, "empty component in override key");
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    Json& child = (*node)[key];
    if (child.is_null()) child = Json::object();
    if (!child.is_object()) throw ConfigError(path.substr(0, dot), "override descends into a non-object");
    node = &child;
    start = dot + 1;
  }
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace ergc
