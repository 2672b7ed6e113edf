#include "ergc/experiment/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include "ergc/detail/parallel.hpp"
#include "ergc/error.hpp"
#include "ergc/integration/integrate.hpp"

#ifndef ERGC_VERSION
#define ERGC_VERSION "0.0.0"
#endif
#ifndef ERGC_GIT_DESCRIBE
#define ERGC_GIT_DESCRIBE "unknown"
#endif

namespace fs = std::filesystem;

namespace ergc {

namespace {

std::string num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

/// JSON has no NaN or infinity.
std::string jnum(double x) { return std::isfinite(x) ? num(x) : "null"; }

std::string jstr(const std::string& s) { return Json(s).dump(); }

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw InvalidArgument("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Writes files under one directory and remembers what it wrote.
class OutputSet {
 public:
  explicit OutputSet(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

  void write(const std::string& rel, const std::string& content) {
    const fs::path p = dir_ / rel;
    fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << content;
    if (!out) throw Error("cannot write " + p.string());
    outputs_.push_back(rel);
  }
  void record(const std::string& rel) { outputs_.push_back(rel); }
  const fs::path& dir() const { return dir_; }

  std::vector<std::string> sorted() const {
    std::vector<std::string> v = outputs_;
    std::sort(v.begin(), v.end());
    return v;
  }

 private:
  fs::path dir_;
  std::vector<std::string> outputs_;
};

std::vector<Observable> observables_of(const ModelSpec& spec, const std::vector<std::string>& names) {
  std::vector<Observable> out;
  for (const std::string& n : names) out.push_back(parse_observable(spec, n));
  return out;
}

bool too_many_diverged(int diverged, int replicas, double tolerance) {
  return diverged > 0 && static_cast<double>(diverged) > tolerance * replicas;
}

std::string checkpoint_name(std::uint32_t replica, std::uint64_t step) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "checkpoints/r%04u_s%09llu.ergc", replica, static_cast<unsigned long long>(step));
  return buf;
}

// ---- simulate --------------------------------------------------------------

int simulate(const ExperimentConfig& c, OutputSet& out, std::ostream& log) {
  const ModelSpec spec = c.model.spec();
  const Grid grid = c.make_grid();
  const ForcingSet forcing = c.make_forcing();
  const StepperConfig sc = c.stepper_config();

  std::vector<Observable> functionals{Observable::energy()};
  if (c.is_fluid()) functionals.push_back(Observable::enstrophy());
  for (const Observable& o : observables_of(spec, c.ergodic.observables)) {
    const bool seen = std::any_of(functionals.begin(), functionals.end(), [&](const Observable& f) { return f.name == o.name; });
    if (!seen) functionals.push_back(o);
  }

  struct Result {
    Trajectory traj;
    double budget_residual = 0.0;
    bool diverged = false;
    double diverged_time = std::numeric_limits<double>::quiet_NaN();
    std::string error;
  };
  const int n = c.ensemble.replicas;
  std::vector<Result> results(static_cast<std::size_t>(n));
  detail::parallel_for(n, c.ensemble.threads, [&](int i) {
    Result& r = results[static_cast<std::size_t>(i)];
    const auto rep = static_cast<std::uint32_t>(i);
    try {
      const SpectralField u0 = random_initial_state(spec, grid, c.initial_condition(), c.ensemble.seed, rep, 0);
      NoisePath noise(c.ensemble.seed, rep, sc.dt, sc.substeps);
      EnergyBudget budget(spec, &forcing);
      r.traj = integrate(spec, u0, sc, &forcing, noise, [&](const StepEvent& e) { budget.observe(e); });
      r.budget_residual = budget.max_residual();
    } catch (const DivergedTrajectory& e) {
      r.diverged = true;
      r.diverged_time = e.last_finite_time();
    } catch (const std::exception& e) {
      r.error = e.what();
    }
  });

  int diverged = 0;
  std::string ndjson, summary = "replica,t_end,final_energy,max_energy,energy_budget_residual,cfl_warnings,diverged,diverged_time\n";
  for (int i = 0; i < n; ++i) {
    const Result& r = results[static_cast<std::size_t>(i)];
    if (!r.error.empty()) throw Error("replica " + std::to_string(i) + ": " + r.error);
    if (r.diverged) {
      ++diverged;
      log << "replica " << i << " diverged after t = " << num(r.diverged_time) << "\n";
      summary += std::to_string(i) + "," + num(c.stepper.t_end) + ",nan,nan,nan,0,true," + num(r.diverged_time) + "\n";
      continue;
    }
    double max_energy = 0.0, final_energy = 0.0;
    for (std::size_t s = 0; s < r.traj.times.size(); ++s) {
      const SpectralField& state = r.traj.states[s];
      std::string line = "{\"replica\":" + std::to_string(i) + ",\"t\":" + jnum(r.traj.times[s]);
      for (const Observable& f : functionals) {
        const double v = f(spec, state);
        if (f.kind == ObservableKind::Energy) {
          max_energy = std::max(max_energy, v);
          final_energy = v;
        }
        line += "," + jstr(f.name) + ":" + jnum(v);
      }
      ndjson += line + "}\n";
      if (c.output.checkpoints) {
        const std::uint64_t step = s == 0 ? 0 : step_count(r.traj.times[s], c.stepper.dt);
        const std::string rel = checkpoint_name(static_cast<std::uint32_t>(i), step);
        fs::create_directories((out.dir() / rel).parent_path());
        write_checkpoint(out.dir() / rel, state, r.traj.times[s]);
        out.record(rel);
      }
    }
    summary += std::to_string(i) + "," + num(c.stepper.t_end) + "," + num(final_energy) + "," + num(max_energy) + "," +
               num(r.budget_residual) + "," + std::to_string(r.traj.cfl_warnings) + ",false,nan\n";
    if (r.traj.cfl_warnings > 0) log << "replica " << i << ": " << r.traj.cfl_warnings << " CFL warnings\n";
  }
  if (c.wants("ndjson")) out.write("simulate.ndjson", ndjson);
  if (c.wants("csv")) out.write("simulate_summary.csv", summary);
  log << "simulate: " << n << " replicas, " << diverged << " diverged\n";
  return too_many_diverged(diverged, n, c.ensemble.diverged_tolerance) ? kExitDiverged : kExitOk;
}

// ---- couple ----------------------------------------------------------------

int couple(const ExperimentConfig& c, OutputSet& out, std::ostream& log) {
  EnsembleSetup setup;
  setup.spec = c.model.spec();
  setup.grid = c.make_grid();
  setup.forcing = c.make_forcing();
  setup.control = c.control_spec();
  setup.settings = c.pair_settings();
  setup.initial = c.initial_condition();
  setup.separation = c.initial.separation;
  setup.seed = c.ensemble.seed;
  setup.threads = c.ensemble.threads;
  const EnsembleSummary s = run_ensemble(setup, c.ensemble.replicas);
  if (!s.failures.empty()) {
    throw Error("replica " + std::to_string(s.failures.front().first) + ": " + s.failures.front().second);
  }

  std::string ndjson;
  std::string replicas_csv =
      "replica,success,fitted_rate,fit_residual,fit_points,rho_initial,rho_final,cost,tau_hit,tau_time,diverged,"
      "diverged_time,envelope_exceeded\n";
  for (const CouplingReport& r : s.reports) {
    for (std::size_t i = 0; i < r.times.size(); ++i) {
      const GirsanovLedger& l = r.ledgers[i];
      ndjson += "{\"replica\":" + std::to_string(r.replica) + ",\"t\":" + jnum(r.times[i]) + ",\"rho\":" + jnum(r.rho[i]) +
                ",\"energy\":" + jnum(r.energy[i]) + ",\"cost\":" + jnum(l.cost()) +
                ",\"tau_hit\":" + (l.stopped() ? "true" : "false") + "}\n";
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    replicas_csv += std::to_string(r.replica) + "," + (r.success ? "true" : "false") + "," + num(r.fitted_rate) + "," +
                    num(r.fit_residual) + "," + std::to_string(r.fit_points) + "," + num(r.rho.front()) + "," +
                    num(r.rho.back()) + "," + num(r.final_ledger().cost()) + "," + (r.tau_hit ? "true" : "false") +
                    "," + num(r.tau_time.value_or(nan)) + "," + (r.diverged ? "true" : "false") + "," +
                    num(r.diverged_time.value_or(nan)) + "," + (r.envelope_exceeded ? "true" : "false") + "\n";
  }
  double mean_rate = 0.0;
  for (double r : s.success_rates) mean_rate += r;
  if (!s.success_rates.empty()) mean_rate /= static_cast<double>(s.success_rates.size());
  std::string summary = "key,value\n";
  auto row = [&](const std::string& k, const std::string& v) { summary += k + "," + v + "\n"; };
  row("replicas", std::to_string(s.replicas));
  row("successes", std::to_string(s.successes));
  row("success_frequency", num(s.success_frequency));
  row("wilson_low", num(s.wilson_low));
  row("wilson_high", num(s.wilson_high));
  row("mean_success_rate", num(mean_rate));
  row("tau_hits", std::to_string(s.tau_hits));
  row("tau_hit_frequency", num(s.tau_hit_frequency));
  row("diverged", std::to_string(s.diverged));
  row("budget_violations", std::to_string(s.budget_violations));
  row("envelope_exceedances", std::to_string(s.envelope_exceedances));
  row("success_frequency_in_envelope", num(s.success_frequency_in_envelope));

  if (c.wants("ndjson")) out.write("couple.ndjson", ndjson);
  if (c.wants("csv")) {
    out.write("couple_replicas.csv", replicas_csv);
    out.write("couple_summary.csv", summary);
  }
  log << "couple: " << s.successes << "/" << s.replicas << " coupled (Wilson 95% [" << num(s.wilson_low) << ", "
      << num(s.wilson_high) << "]), tau_K hits " << s.tau_hits << ", diverged " << s.diverged << "\n";
  return too_many_diverged(s.diverged, s.replicas, c.ensemble.diverged_tolerance) ? kExitDiverged : kExitOk;
}

// ---- ergodic ---------------------------------------------------------------

int ergodic(const ExperimentConfig& c, OutputSet& out, std::ostream& log) {
  const ModelSpec spec = c.model.spec();
  const Grid grid = c.make_grid();
  const ForcingSet forcing = c.make_forcing();
  const std::vector<Observable> obs = observables_of(spec, c.ergodic.observables);

  AgreementSettings as;
  as.stepper = c.stepper_config();
  as.period = c.ergodic.period;
  as.burn_in = c.ergodic.burn_in;
  as.seed_a = c.ensemble.seed;
  as.seed_b = c.ensemble.seed + 1;
  const SpectralField u0_a = random_initial_state(spec, grid, c.initial_condition(), c.ensemble.seed, 0, 0);
  const SpectralField u0_b = random_initial_state(spec, grid, c.initial_condition(), c.ensemble.seed, 0, 1);
  std::vector<AverageSeries> sa, sb;
  const std::vector<AgreementRow> rows = ergodic_agreement(spec, &forcing, u0_a, u0_b, obs, as, &sa, &sb);

  if (c.wants("ndjson")) {
    std::string ndjson;
    for (const auto* series : {&sa, &sb}) {
      const char* run = series == &sa ? "a" : "b";
      for (std::size_t i = 0; i < series->front().times.size(); ++i) {
        std::string line = std::string("{\"run\":\"") + run + "\",\"t\":" + jnum(series->front().times[i]);
        for (const AverageSeries& s : *series) {
          line += "," + jstr(s.name) + ":" + jnum(s.samples[i]) + "," + jstr(s.name + ".running_mean") + ":" +
                  jnum(s.running_mean[i]);
        }
        ndjson += line + "}\n";
      }
    }
    out.write("ergodic_series.ndjson", ndjson);
  }
  if (c.wants("csv")) {
    std::string avg = "run,observable,mean,standard_error,samples\n";
    for (const auto* series : {&sa, &sb}) {
      const char* run = series == &sa ? "a" : "b";
      for (const AverageSeries& s : *series) {
        avg += std::string(run) + "," + s.name + "," + num(s.mean) + "," + num(s.standard_error) + "," +
               std::to_string(s.samples.size()) + "\n";
      }
    }
    out.write("ergodic_averages.csv", avg);
    std::string agree = "observable,mean_a,se_a,mean_b,se_b,difference,combined_se,samples,agrees\n";
    for (const AgreementRow& r : rows) {
      agree += r.observable + "," + num(r.mean_a) + "," + num(r.se_a) + "," + num(r.mean_b) + "," + num(r.se_b) + "," +
               num(r.difference) + "," + num(r.combined_se) + "," + std::to_string(r.samples) + "," +
               (r.agrees ? "true" : "false") + "\n";
    }
    out.write("ergodic_agreement.csv", agree);
  }
  for (const AgreementRow& r : rows) {
    log << "ergodic: " << r.observable << " " << num(r.mean_a) << " vs " << num(r.mean_b) << " (|diff| / SE = "
        << num(std::abs(r.difference) / r.combined_se) << ")\n";
  }

  if (c.ergodic.tail_replicas > 0) {
    StepperConfig sc = c.stepper_config();
    sc.checkpoint_every = 0;
    const TailTable t = martingale_tail_ensemble(spec, forcing, u0_a, sc, c.ergodic.tail_replicas, c.ensemble.seed,
                                                 c.ergodic.tail_R);
    if (c.wants("csv")) {
      std::string csv = "R,empirical,bound,standard_error,flagged,gamma,rigorous,replicas\n";
      for (const TailRow& r : t.rows) {
        csv += num(r.R) + "," + num(r.empirical) + "," + num(r.bound) + "," + num(r.standard_error) + "," +
               (r.flagged ? "true" : "false") + "," + num(t.gamma) + "," + (t.rigorous ? "true" : "false") + "," +
               std::to_string(t.replicas) + "\n";
      }
      out.write("ergodic_tails.csv", csv);
    }
    log << "ergodic: tail gamma " << num(t.gamma) << (t.any_flagged() ? ", some levels FLAGGED" : ", no level flagged")
        << "\n";
  }
  return kExitOk;
}

// ---- inviscid limit --------------------------------------------------------

int inviscid_limit(const ExperimentConfig& c, OutputSet& out, std::ostream& log) {
  if (c.model.variant != ModelKind::EulerVoigt) {
    throw ConfigError("model.variant", "inviscid-limit needs the euler_voigt variant");
  }
  const ModelSpec spec = c.model.spec();
  const ForcingSet forcing = c.make_forcing();
  LimitSettings ls;
  ls.epsilons = c.inviscid_limit.epsilons;
  ls.dt = c.stepper.dt;
  ls.horizon = c.inviscid_limit.horizon;
  ls.replicas = c.ensemble.replicas;
  ls.seed = c.ensemble.seed;
  ls.initial = c.initial_condition();
  ls.observables = observables_of(spec, c.inviscid_limit.observables);
  ls.period = c.inviscid_limit.period;
  ls.threads = c.ensemble.threads;
  const LimitReport rep = inviscid_limit_study(spec, c.make_grid(), &forcing, ls);

  if (c.wants("csv")) {
    std::string main = "epsilon,discrepancy,discrepancy_se,fitted_order\n";
    for (const LimitRow& r : rep.rows) {
      main += num(r.epsilon) + "," + num(r.discrepancy) + "," + num(r.discrepancy_se) + "," + num(rep.fitted_order) + "\n";
    }
    out.write("inviscid_limit.csv", main);
    std::string obs = "epsilon,observable,average,average_se,shift,shift_se\n";
    auto add = [&](const LimitRow& r) {
      for (std::size_t k = 0; k < ls.observables.size(); ++k) {
        const double shift = r.shift.empty() ? 0.0 : r.shift[k];
        const double shift_se = r.shift_se.empty() ? 0.0 : r.shift_se[k];
        obs += num(r.epsilon) + "," + ls.observables[k].name + "," + num(r.averages[k]) + "," + num(r.averages_se[k]) +
               "," + num(shift) + "," + num(shift_se) + "\n";
      }
    };
    add(rep.baseline);
    for (const LimitRow& r : rep.rows) add(r);
    out.write("inviscid_limit_observables.csv", obs);
    std::string summary = "key,value\n";
    summary += "fitted_order," + num(rep.fitted_order) + "\n";
    summary += "fit_residual," + num(rep.fit_residual) + "\n";
    summary += "moment_sup," + num(rep.moment_sup) + "\n";
    for (std::size_t k = 0; k < ls.observables.size(); ++k) {
      summary += "monotone." + ls.observables[k].name + "," + (rep.monotone[k] ? "true" : "false") + "\n";
    }
    out.write("inviscid_limit_summary.csv", summary);
  }
  log << "inviscid-limit: fitted order " << num(rep.fitted_order) << " over " << rep.rows.size() << " values of eps\n";
  return kExitOk;
}

Json output_entry(const fs::path& dir, const std::string& rel) {
  const std::string bytes = read_file(dir / rel);
  return Json{{"path", rel}, {"bytes", bytes.size()}, {"fnv1a", fnv1a_hex(bytes)}};
}

}  // namespace

std::string to_string(Command command) {
  switch (command) {
    case Command::Simulate: return "simulate";
    case Command::Couple: return "couple";
    case Command::Ergodic: return "ergodic";
    case Command::InviscidLimit: return "inviscid-limit";
  }
  return "?";
}

Command command_from_string(const std::string& name) {
  for (Command c : {Command::Simulate, Command::Couple, Command::Ergodic, Command::InviscidLimit}) {
    if (to_string(c) == name) return c;
  }
  throw InvalidArgument("unknown subcommand '" + name + "'");
}

RunOutcome run_command(Command command, const ExperimentConfig& config, const fs::path& out_dir, std::ostream& log) {
  const auto start = std::chrono::steady_clock::now();
  OutputSet out(out_dir);
  const Json resolved = to_json(config);
  const std::string resolved_text = resolved.dump(2) + "\n";
  out.write("resolved_config.json", resolved_text);

  int status = kExitOk;
  try {
    switch (command) {
      case Command::Simulate: status = simulate(config, out, log); break;
      case Command::Couple: status = couple(config, out, log); break;
      case Command::Ergodic: status = ergodic(config, out, log); break;
      case Command::InviscidLimit: status = inviscid_limit(config, out, log); break;
    }
  } catch (const DivergedTrajectory& e) {
    log << "diverged: " << e.what() << "\n";
    status = kExitDiverged;
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  RunOutcome outcome;
  outcome.exit_status = status;
  outcome.outputs = out.sorted();
  outcome.directory = out_dir;
  Json outputs = Json::array();
  for (const std::string& rel : outcome.outputs) outputs.push_back(output_entry(out_dir, rel));
  Json manifest;
  manifest["program"] = "ergc";
  manifest["version"] = ERGC_VERSION;
  manifest["git_describe"] = ERGC_GIT_DESCRIBE;
  manifest["subcommand"] = to_string(command);
  manifest["seed"] = config.ensemble.seed;
  manifest["config_hash"] = fnv1a_hex(resolved.dump());
  manifest["wall_time_seconds"] = wall;
  manifest["exit_status"] = status;
  manifest["outputs"] = outputs;
  manifest["config"] = resolved;
  std::ofstream(out_dir / "manifest.json", std::ios::binary | std::ios::trunc) << manifest.dump(2) << "\n";
  return outcome;
}

fs::path resolve_output_dir(const ExperimentConfig& config, const std::optional<std::string>& flag) {
  if (flag && !flag->empty()) return *flag;
  if (const char* root = std::getenv("ERGC_OUTPUT_ROOT"); root && *root) return fs::path(root) / config.output.directory;
  return config.output.directory;
}

Json read_manifest(const fs::path& path) {
  Json j;
  try {
    j = Json::parse(read_file(path));
  } catch (const Json::parse_error& e) {
    throw ConfigError("manifest", path.string() + " is not valid JSON: " + e.what());
  }
  for (const char* key : {"subcommand", "config", "outputs"}) {
    if (!j.contains(key)) throw ConfigError(std::string("manifest.") + key, "missing in " + path.string());
  }
  return j;
}

RunOutcome replay(const Json& manifest, const fs::path& out_dir, std::ostream& log) {
  const Command command = command_from_string(manifest.at("subcommand").get<std::string>());
  const ExperimentConfig config = parse_config(manifest.at("config"));
  const std::string hash = fnv1a_hex(to_json(config).dump());
  if (manifest.contains("config_hash") && manifest.at("config_hash").get<std::string>() != hash) {
    throw ConfigError("manifest.config_hash", "does not match the embedded config");
  }
  log << "replaying " << to_string(command) << " into " << out_dir.string() << "\n";
  return run_command(command, config, out_dir, log);
}

std::vector<std::string> compare_outputs(const Json& a, const Json& b) {
  std::map<std::string, Json> left, right;
  for (const Json& e : a.at("outputs")) left[e.at("path").get<std::string>()] = e;
  for (const Json& e : b.at("outputs")) right[e.at("path").get<std::string>()] = e;
  std::vector<std::string> diff;
  for (const auto& [path, e] : left) {
    const auto it = right.find(path);
    if (it == right.end() || it->second.at("bytes") != e.at("bytes") || it->second.at("fnv1a") != e.at("fnv1a")) {
      diff.push_back(path);
    }
  }
  for (const auto& [path, e] : right) {
    if (!left.count(path)) diff.push_back(path);
  }
  return diff;
}

}  // namespace ergc
