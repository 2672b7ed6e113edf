// Acceptance suite: one PASS/FAIL line per criterion, printed in order at the end.
//
//   acceptance            run all criteria
//   acceptance 3 6 11     run a subset

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ergc/coupling/harness.hpp"
#include "ergc/diagnostics/ergodic.hpp"
#include "ergc/experiment/experiment.hpp"
#include "ergc/integration/integrate.hpp"
#include "ergc/spectral/operators.hpp"

using namespace ergc;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Ledger bookkeeping shared by every ensemble in the suite (criterion 4).
struct LedgerTally {
  int ensembles = 0;
  long ledgers = 0;
  int violations = 0;
  int hits = 0;

  void add(const EnsembleSummary& s) {
    ++ensembles;
    violations += s.budget_violations;
    hits += s.tau_hits;
    for (const CouplingReport& r : s.reports) {
      for (const GirsanovLedger& l : r.ledgers) {
        ++ledgers;
        if (!l.invariant_holds()) ++violations;
      }
      const GirsanovLedger& last = r.final_ledger();
      if (last.cost() > last.budget() + last.max_increment() && last.budget() > 0.0) ++violations;
    }
  }
} g_tally;

SpectralField random_field(const Grid& grid, int band, std::uint64_t seed, int components = 1) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  SpectralField f(grid, components);
  for (int c = 0; c < components; ++c) {
    for (int k1 = 0; k1 <= band; ++k1) {
      for (int k2 = -band; k2 <= band; ++k2) {
        if (k1 == 0 && k2 <= 0) continue;
        f.set_mode({k1, k2}, {normal(rng), normal(rng)}, c);
      }
    }
  }
  return f;
}

double max_abs_diff(const SpectralField& a, const SpectralField& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]));
  return worst;
}

ModelSpec navier_stokes(double nu, bool advection = true) {
  ModelSpec s;
  s.kind = ModelKind::NavierStokes;
  s.nu = nu;
  s.advection = advection;
  return s;
}

// ---- 1 -----------------------------------------------------------------------

// Dealiased vel·∇θ by summing every pair of retained modes.
SpectralField convolution_oracle(const SpectralField& vel, const SpectralField& theta) {
  const Grid& g = vel.grid();
  SpectralField out(g);
  const Complex I{0.0, 1.0};
  auto kept = [&](Wavenumber k) { return 3 * std::abs(k.k1) <= g.modes_x() && 3 * std::abs(k.k2) <= g.modes_y(); };
  for (std::size_t p = 0; p < g.size(); ++p) {
    const Wavenumber kp = g.wavenumber(p);
    if (!kept(kp) || g.is_nyquist(p)) continue;
    for (std::size_t q = 0; q < g.size(); ++q) {
      const Wavenumber kq = g.wavenumber(q);
      if (!kept(kq) || g.is_nyquist(q)) continue;
      const Wavenumber sum{kp.k1 + kq.k1, kp.k2 + kq.k2};
      if (!kept(sum)) continue;
      out(0, g.index_of(sum)) += vel(0, p) * (I * static_cast<double>(kq.k1) * theta(0, q)) +
                                 vel(1, p) * (I * static_cast<double>(kq.k2) * theta(0, q));
    }
  }
  return out;
}

Verdict spectral_oracle() {
  const auto start = std::chrono::steady_clock::now();
  const Grid g(8, 8);
  double adv = 0.0, bs = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const SpectralField xi = random_field(g, 3, seed);
    const SpectralField theta = random_field(g, 3, seed + 1000);
    const SpectralField u = biot_savart(xi);
    adv = std::max(adv, max_abs_diff(advect(u, theta, true), convolution_oracle(u, theta)));
    bs = std::max(bs, max_abs_diff(curl(u), xi));
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {adv <= 1e-12 && bs <= 1e-12 && secs < 1.0,
          fmt("advect vs direct sum %.2e, curl(BS) - id %.2e, %.3f s", adv, bs, secs)};
}

// ---- 2 -----------------------------------------------------------------------

Verdict conservation() {
  const Grid g(32, 32);
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const SpectralField xi = dealias(random_field(g, 15, seed));
    const SpectralField u = biot_savart(xi);
    const double scale = sobolev_norm(xi, 0.0) * sobolev_norm(xi, 1.0) * sobolev_norm(u, 0.0);
    worst = std::max(worst, std::abs(inner_product(advect(u, xi, true), xi)) / scale);
  }
  ModelSpec voigt;
  voigt.kind = ModelKind::EulerVoigt;
  voigt.alpha = 1.0;
  voigt.gamma_damp = 0.0;
  voigt.eps_visc = 0.0;
  const SpectralField s0 = random_initial_state(voigt, g, {1.0, 10, 0.0}, 21, 0, 0);
  StepperConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_end = 1.0;
  NoisePath noise(21, 0, cfg.dt);
  const Trajectory tr = integrate(voigt, s0, cfg, nullptr, noise);
  const double e0 = energy_functional(voigt, s0, "voigt_vorticity");
  const double drift = std::abs(energy_functional(voigt, tr.states.back(), "voigt_vorticity") - e0) / e0;
  return {worst <= 1e-10 && drift <= 1e-3,
          fmt("max |<u.grad xi, xi>| / scale %.2e over 100 fields; Voigt energy drift %.2e", worst, drift)};
}

// ---- 3 -----------------------------------------------------------------------

Verdict ou_exactness() {
  const Grid g(8, 8);
  const double a = 0.8;  // cos and sin amplitude: each real coordinate carries a/2
  std::string detail;
  bool pass = true;
  for (auto [m, dt] : {std::pair{1.0, 0.5}, std::pair{0.5, 2.0}, std::pair{5.0, 1.0}}) {
    const ModelSpec spec = navier_stokes(m, false);
    const ForcingSet f = ForcingSet::canonical_fluid(g, 1, ShellAmplitudes{a, {}});
    const Stepper st(spec, g, &f, dt);
    NoisePath noise(101, 0, dt);
    SpectralField s(g);
    const int n = 1000000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      st.step(s, noise.sample_increments(f.size()), {}, nullptr, nullptr, 0.0);
      sum += 0.5 * (std::norm(s.at({1, 0}).real()) + std::norm(s.at({0, 1}).imag()));
    }
    const double expected = (a / 2) * (a / 2) / (2 * m);
    const double rel = std::abs(sum / n / expected - 1.0);
    pass = pass && rel <= 0.01;
    detail += fmt("m=%g dt=%g (m dt=%g): rel err %.4f; ", m, dt, m * dt, rel);
  }
  return {pass, detail};
}

// ---- 4 -----------------------------------------------------------------------

Verdict girsanov_budget() {
  // Small budgets so τ_K is actually reached, on every model family.
  EnsembleSetup nse;
  nse.spec = navier_stokes(0.1);
  nse.grid = Grid(16, 16);
  nse.forcing = ForcingSet::canonical_fluid(nse.grid, 2, ShellAmplitudes{});
  nse.control.lambda = 0.4;
  nse.control.cutoff = GalerkinCutoff(std::sqrt(2.0), 2);
  nse.settings.dt = 1e-3;
  nse.settings.t_end = 2.0;
  nse.settings.record_every = 20;
  for (double k : {0.002, 0.01, 0.05}) {
    nse.control.budget = k;
    g_tally.add(run_ensemble(nse, 20));
  }
  EnsembleSetup wave;
  wave.spec.kind = ModelKind::SineGordon;
  wave.spec.alpha_damp = 0.5;
  wave.spec.beta = 1.0;
  wave.grid = Grid(128, 1);
  wave.forcing = ForcingSet::canonical_wave(wave.grid, 8, ShellAmplitudes{});
  wave.control.cutoff = GalerkinCutoff(8.0, 1);
  wave.control.form = ControlForm::SineDifference;
  wave.control.budget = 0.05;
  wave.settings.dt = 1e-3;
  wave.settings.t_end = 5.0;
  wave.settings.record_every = 50;
  g_tally.add(run_ensemble(wave, 20));

  // K = 0: the shadow is bit-identical to an uncontrolled run on the same path.
  bool identical = true;
  for (std::uint32_t r = 0; r < 5; ++r) {
    nse.control.budget = 0.0;
    nse.settings.keep_states = true;
    const auto [u0, w0] = initial_pair(nse, r);
    const CouplingReport rep = run_pair(nse.spec, u0, w0, nse.forcing, nse.control, nse.settings, nse.seed, r);
    StepperConfig cfg;
    cfg.dt = nse.settings.dt;
    cfg.t_end = nse.settings.t_end;
    NoisePath p(nse.seed, r, cfg.dt);
    identical = identical && rep.final_ledger().cost() == 0.0 &&
                rep.shadow_states.back() == integrate(nse.spec, w0, cfg, &nse.forcing, p).states.back();
  }
  return {g_tally.violations == 0 && identical && g_tally.hits > 0,
          fmt("%d ensembles, %ld ledger records, %d violations, %d tau_K hits; K=0 bit-identical: %s",
              g_tally.ensembles, g_tally.ledgers, g_tally.violations, g_tally.hits, identical ? "yes" : "no")};
}

// ---- 5 -----------------------------------------------------------------------

Verdict foias_prodi() {
  EnsembleSetup s;
  s.spec = navier_stokes(0.1);
  s.grid = Grid(32, 32);
  s.forcing = ForcingSet::canonical_fluid(s.grid, 2, ShellAmplitudes{});
  s.control.cutoff = GalerkinCutoff(std::sqrt(2.0), 2);
  s.control.lambda = default_lambda(s.spec, s.control.cutoff);
  s.control.budget = 1e4;
  s.settings.dt = 1e-3;
  s.settings.t_end = 200.0;
  s.settings.record_every = 1000;
  s.seed = 2024;
  const EnsembleSummary r = run_ensemble(s, 50);
  g_tally.add(r);
  const double floor = s.control.lambda / 4.0;
  int fast = 0;
  double min_rate = r.success_rates.empty() ? 0.0 : 1e300;
  for (double rate : r.success_rates) {
    fast += rate >= floor;
    min_rate = std::min(min_rate, rate);
  }
  const bool pass = r.failures.empty() && r.success_frequency >= 0.8 && fast == r.successes &&
                    r.tau_hit_frequency <= 0.1;
  return {pass, fmt("lambda=%g: success %d/50 (Wilson [%.3f, %.3f]), min rate among successes %.4f (floor %.3f), "
                    "tau_K hits %d, diverged %d, envelope exits %d",
                    s.control.lambda, r.successes, r.wilson_low, r.wilson_high, min_rate, floor, r.tau_hits,
                    r.diverged, r.envelope_exceedances)};
}

// ---- 6 -----------------------------------------------------------------------

Verdict gronwall_order() {
  const Grid g(32, 32);
  const ModelSpec spec = navier_stokes(0.1);
  const ForcingSet f = ForcingSet::canonical_fluid(g, 2, ShellAmplitudes{});
  ControlSpec control;
  control.cutoff = GalerkinCutoff(std::sqrt(2.0), 2);
  control.lambda = default_lambda(spec, control.cutoff);
  const SpectralField u0 = random_initial_state(spec, g, {1.0, 8, 0.0}, 5, 0, 0);
  const SpectralField w0 = random_initial_state(spec, g, {1.0, 8, 0.0}, 5, 0, 1);
  auto max_residual = [&](double dt, int substeps) {
    PairSettings ps;
    ps.dt = dt;
    ps.substeps = substeps;
    ps.t_end = 0.2;
    ps.keep_states = true;
    const CouplingReport rep = run_pair(spec, u0, w0, f, control, ps, 5, 0);
    return gronwall_envelope_check(rep, spec, control).max_abs_residual;
  };
  // the coarse run sums pairs of the fine increments: both see one Brownian path
  const double coarse = max_residual(2e-3, 2);
  const double fine = max_residual(1e-3, 1);
  const double ratio = coarse / fine;
  return {ratio >= 1.7 && ratio <= 2.3, fmt("max residual %.4e at dt=2e-3, %.4e at dt=1e-3, ratio %.3f", coarse, fine, ratio)};
}

// ---- 7 -----------------------------------------------------------------------

Verdict sine_gordon() {
  EnsembleSetup s;
  s.spec.kind = ModelKind::SineGordon;
  s.spec.alpha_damp = 0.5;
  s.spec.beta = 1.0;
  s.grid = Grid(128, 1);
  const int kc = 8;
  s.forcing = ForcingSet::canonical_wave(s.grid, kc, ShellAmplitudes{});
  s.control.cutoff = GalerkinCutoff(kc, 1);
  s.control.form = ControlForm::SineDifference;
  s.control.budget = 1e4;
  s.settings.dt = 1e-3;
  s.settings.t_end = 50.0;
  s.settings.record_every = 100;
  s.seed = 77;
  const EnsembleSummary r = run_ensemble(s, 50);
  g_tally.add(r);
  // ε_shift = min{λ₁/α, α/2, √(λ₁/2)} with λ₁ = 1 on (0, π)
  const double a = s.spec.alpha_damp;
  const double eps_shift = std::min({1.0 / a, a / 2.0, std::sqrt(0.5)});
  const double floor = eps_shift / 4.0;
  int fast = 0;
  double min_rate = 1e300;
  for (const CouplingReport& rep : r.reports) {
    if (!rep.diverged && rep.fitted_rate >= floor) ++fast;
    min_rate = std::min(min_rate, rep.fitted_rate);
  }
  const bool pass = r.failures.empty() && std::abs(epsilon_shift(s.spec) - eps_shift) < 1e-15 && fast >= 40;
  return {pass, fmt("eps_shift %.4f, k_c %d: rate >= %.4f in %d/50 replicas (min rate %.4f), coupled %d/50",
                    eps_shift, kc, floor, fast, min_rate, r.successes)};
}

// ---- 8 -----------------------------------------------------------------------

Verdict martingale_tails() {
  const Grid g(16, 16);
  const ModelSpec spec = navier_stokes(0.1, false);
  // amplitude chosen so that every level R has a nonzero empirical tail
  const ForcingSet f = ForcingSet::canonical_fluid(g, 2, ShellAmplitudes{0.1, {}});
  StepperConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_end = 10.0;
  const SpectralField u0 = random_initial_state(spec, g, {0.1, 2, 0.0}, 3, 0, 0);
  const TailTable t = martingale_tail_ensemble(spec, f, u0, cfg, 500, 8, {1, 2, 4, 8});
  const double gamma = spec.nu / f.sigma_norm_sq();
  std::string detail = fmt("gamma %.4f (nu/|sigma|^2 %.4f), rigorous %s:", t.gamma, gamma, t.rigorous ? "yes" : "no");
  bool ok = std::abs(t.gamma - gamma) <= 1e-12 * gamma && t.rigorous && t.replicas == 500;
  for (const TailRow& r : t.rows) {
    ok = ok && r.empirical <= r.bound + 3.0 * r.standard_error && !r.flagged;
    detail += fmt(" R=%g %.3f<=%.3f+3*%.3f;", r.R, r.empirical, r.bound, r.standard_error);
  }
  return {ok, detail};
}

// ---- 9 -----------------------------------------------------------------------

Verdict ergodic_agreement_check() {
  const Grid g(32, 32);
  ModelSpec spec;
  spec.kind = ModelKind::FractionalEuler;
  spec.gamma = 1.0;
  const ForcingSet f = ForcingSet::canonical_fluid(g, 2, ShellAmplitudes{});
  const SpectralField a = random_initial_state(spec, g, {1.0, 4, 0.0}, 7, 0, 0);
  const SpectralField b = random_initial_state(spec, g, {1.0, 4, 0.0}, 7, 0, 1);
  AgreementSettings s;
  s.stepper.dt = 1e-3;
  s.stepper.t_end = 2000.0;
  s.period = 1.0;
  s.burn_in = 20.0;
  s.seed_a = 11;
  s.seed_b = 12;
  const std::vector<Observable> obs{Observable::energy(), Observable::low_mode({1, 0}), Observable::low_mode({1, 1})};
  const std::vector<AgreementRow> rows = ergodic_agreement(spec, &f, a, b, obs, s);
  bool ok = true;
  std::string detail = fmt("rho(u0_a, u0_b) %.3f;", rho_tilde(spec, a, b));
  for (const AgreementRow& r : rows) {
    ok = ok && r.agrees;
    detail += fmt(" %s %.4g vs %.4g (|diff|/SE %.2f);", r.observable.c_str(), r.mean_a, r.mean_b,
                  std::abs(r.difference) / r.combined_se);
  }
  return {ok, detail};
}

// ---- 10 ----------------------------------------------------------------------

Verdict inviscid_limit() {
  const Grid g(64, 64);
  ModelSpec spec;
  spec.kind = ModelKind::EulerVoigt;
  spec.alpha = 1.0;
  spec.gamma_damp = 0.5;
  // Weak forcing and rough initial data: the discrepancy is carried by the
  // initial high modes, where viscosity acts within the horizon.
  const ForcingSet f = ForcingSet::canonical_fluid(g, 2, ShellAmplitudes{0.03, {}});
  LimitSettings s;
  s.epsilons = {0.04, 0.02, 0.01, 0.005};
  s.dt = 1e-3;
  s.horizon = 5.0;
  s.replicas = 20;
  s.seed = 10;
  s.initial = {3.0, 21, 1.0};
  s.period = 0.1;
  s.observables = {Observable::energy(), Observable::bounded_lipschitz(spec, {1, 0}), Observable::low_mode({1, 1})};
  const LimitReport r = inviscid_limit_study(spec, g, &f, s);
  bool monotone = true;
  for (bool m : r.monotone) monotone = monotone && m;
  std::string detail = fmt("fitted order %.4f (residual %.2e), KB averages monotone: %s; discrepancy", r.fitted_order,
                           r.fit_residual, monotone ? "yes" : "no");
  for (const LimitRow& row : r.rows) detail += fmt(" %.3g", row.discrepancy);
  return {r.fitted_order >= 0.35 && r.fitted_order <= 0.65 && monotone, detail};
}

// ---- 11 ----------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Verdict reproducibility() {
  const fs::path root = fs::temp_directory_path() / "ergc_acceptance_replay";
  fs::remove_all(root);
  const std::vector<std::pair<Command, const char*>> runs{
      {Command::Simulate,
       R"({"model": {"variant": "navier_stokes"}, "stepper": {"t_end": 0.5, "checkpoint_every": 100},
           "ensemble": {"replicas": 3}})"},
      {Command::Couple,
       R"({"model": {"variant": "fractional_euler"}, "stepper": {"t_end": 2}, "control": {"record_every": 20},
           "ensemble": {"replicas": 4}})"},
      {Command::Couple,
       R"({"model": {"variant": "sine_gordon"}, "stepper": {"t_end": 2}, "ensemble": {"replicas": 3}})"},
      {Command::Ergodic,
       R"({"model": {"variant": "navier_stokes", "nu": 0.5}, "grid": {"nx": 16, "ny": 16},
           "stepper": {"dt": 0.01, "t_end": 5}, "ergodic": {"period": 0.2}})"},
      {Command::InviscidLimit,
       R"({"model": {"variant": "euler_voigt"}, "grid": {"nx": 16, "ny": 16}, "initial": {"band": 4},
           "stepper": {"dt": 0.01}, "ensemble": {"replicas": 2},
           "inviscid_limit": {"horizon": 0.5, "period": 0.1}})"}};
  int files = 0, mismatches = 0;
  std::ostringstream log;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const fs::path first = root / ("run" + std::to_string(i));
    const fs::path again = root / ("replay" + std::to_string(i));
    const RunOutcome a = run_command(runs[i].first, parse_config(runs[i].second), first, log);
    const RunOutcome b = replay(read_manifest(first / "manifest.json"), again, log);
    if (a.outputs != b.outputs) ++mismatches;
    for (const std::string& rel : a.outputs) {
      ++files;
      if (slurp(first / rel) != slurp(again / rel)) ++mismatches;
    }
  }
  fs::remove_all(root);
  return {mismatches == 0 && files > 0,
          fmt("%zu experiments replayed from their manifests: %d output files, %d mismatches", runs.size(), files,
              mismatches)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<int, std::pair<const char*, std::function<Verdict()>>>> criteria{
      {1, {"spectral oracle equivalence", spectral_oracle}},
      {2, {"conservation", conservation}},
      {3, {"OU exactness", ou_exactness}},
      {5, {"Foias-Prodi contraction", foias_prodi}},
      {6, {"Gronwall envelope residual order", gronwall_order}},
      {7, {"Sine-Gordon coupling", sine_gordon}},
      {8, {"martingale tail gate", martingale_tails}},
      {9, {"ergodic agreement", ergodic_agreement_check}},
      {10, {"inviscid-limit order", inviscid_limit}},
      {11, {"reproducibility", reproducibility}},
      // last: it also tallies the ledgers of every ensemble above
      {4, {"Girsanov budget invariant", girsanov_budget}},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  std::map<int, std::pair<std::string, Verdict>> results;
  for (const auto& [id, entry] : criteria) {
    if (!only.empty() && !only.count(id)) continue;
    std::cerr << "running criterion " << id << " (" << entry.first << ")..." << std::endl;
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = entry.second();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    v.detail += fmt(" [%.1f s]", secs);
    std::cerr << "  " << (v.pass ? "PASS" : "FAIL") << ": " << v.detail << std::endl;
    results[id] = {entry.first, v};
  }

  int failed = 0;
  for (const auto& [id, r] : results) {
    std::cout << (r.second.pass ? "PASS" : "FAIL") << "  " << id << "  " << r.first << ": " << r.second.detail << "\n";
    failed += !r.second.pass;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
  return failed == 0 ? 0 : 1;
}
