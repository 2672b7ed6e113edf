#include <cmath>

#include "doctest.h"
#include "ergc/coupling/harness.hpp"
#include "ergc/error.hpp"
#include "ergc/integration/integrate.hpp"

using namespace ergc;

namespace {

ModelSpec nse(bool advection = true) {
  ModelSpec s;
  s.kind = ModelKind::NavierStokes;
  s.nu = 0.1;
  s.advection = advection;
  return s;
}

ControlSpec fluid_control(double lambda, double budget = 1e4) {
  ControlSpec c;
  c.lambda = lambda;
  c.cutoff = GalerkinCutoff(std::sqrt(2.0), 2);
  c.budget = budget;
  return c;
}

}  // namespace

TEST_CASE("control spec validation") {
  const Grid g(16, 16);
  const ForcingSet f = ForcingSet::canonical_fluid(g, 2, ShellAmplitudes{});
  ControlSpec c = fluid_control(0.4);
  CHECK_NOTHROW(c.validate(nse(), f));
  c.form = ControlForm::SineDifference;
  CHECK_THROWS_AS(c.validate(nse(), f), ConfigError);
  c.form = ControlForm::LinearProjection;
  c.cutoff = GalerkinCutoff(2.0, 2);
  try {
    c.validate(nse(), f);
    FAIL("expected a coverage error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("Range(σ) ⊃ H_N") != std::string::npos);
    CHECK(e.key_path() == "control.cutoff");
  }
  CHECK(default_lambda(nse(), GalerkinCutoff(std::sqrt(2.0), 2)) == doctest::Approx(0.4));
  CHECK(control_form_from_string(to_string(ControlForm::SineDifference)) == ControlForm::SineDifference);
}

TEST_CASE("decay fit and Wilson interval") {
  std::vector<double> t, r;
  for (int i = 0; i <= 100; ++i) {
    t.push_back(i * 0.5);
    r.push_back(3.0 * std::exp(-0.7 * t.back()));
  }
  const DecayFit fit = fit_decay(t, r, 50.0, 0.1, 1e-10);
  CHECK(fit.rate == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(fit.residual < 1e-10);
  // 3 e^{-0.7 t} <= 3e-10 from t ≈ 32.9 on.
  CHECK(fit.points == 56);

  const auto [lo, hi] = wilson_interval(8, 10);
  CHECK(lo == doctest::Approx(0.4902).epsilon(1e-3));
  CHECK(hi == doctest::Approx(0.9433).epsilon(1e-3));
  const auto [lo0, hi0] = wilson_interval(0, 50);
  CHECK(lo0 == 0.0);
  CHECK(hi0 == doctest::Approx(0.0714).epsilon(1e-2));
}

TEST_CASE("identical initial states never separate") {
  const Grid g(16, 16);
  const ForcingSet f = ForcingSet::canonical_fluid(g, 2, ShellAmplitudes{});
  const SpectralField u0 = random_initial_state(nse(), g, {1.0, 4, 0.0}, 3, 0, 0);
  PairSettings ps;
  ps.dt = 0.01;
  ps.t_end = 1.0;
  const CouplingReport rep = run_pair(nse(), u0, u0, f, fluid_control(0.4), ps, 7);
  for (double x : rep.rho) CHECK(x == 0.0);
  CHECK(rep.final_ledger().cost() == 0.0);
  CHECK(rep.success);
}

TEST_CASE("zero budget reproduces the uncontrolled shadow bit for bit") {
  const Grid g(16, 16);
  const ModelSpec spec = nse();
  const ForcingSet f = ForcingSet::canonical_fluid(g, 2, ShellAmplitudes{});
  const SpectralField u0 = random_initial_state(spec, g, {1.0, 4, 0.0}, 3, 0, 0);
  const SpectralField w0 = random_initial_state(spec, g, {1.0, 4, 0.0}, 3, 0, 1);
  PairSettings ps;
  ps.dt = 0.01;
  ps.t_end = 2.0;
  ps.keep_states = true;
  const CouplingReport rep = run_pair(spec, u0, w0, f, fluid_control(0.4, 0.0), ps, 11, 4);
  CHECK(rep.final_ledger().cost() == 0.0);
  StepperConfig cfg;
  cfg.dt = ps.dt;
  cfg.t_end = ps.t_end;
  NoisePath p(11, 4, ps.dt);
  const Trajectory free = integrate(spec, w0, cfg, &f, p);
  CHECK(rep.shadow_states.back() == free.states.back());
  NoisePath q(11, 4, ps.dt);
  CHECK(rep.leader_states.back() == integrate(spec, u0, cfg, &f, q).states.back());
}

TEST_CASE("linear coupled system decays at the slowest mode rate") {
  const Grid g(16, 16);
  const ModelSpec spec = nse(false);
  const ForcingSet f = ForcingSet::canonical_fluid(g, 2, ShellAmplitudes{});
  const SpectralField u0 = random_initial_state(spec, g, {1.0, 3, 0.0}, 5, 0, 0);
  const SpectralField w0 = random_initial_state(spec, g, {1.0, 3, 0.0}, 5, 0, 1);
  // Retained shells |k|² <= 2 decay at ν|k|² + λ, the rest at ν|k|².
  for (auto [lambda, expected] : {std::pair{0.4, 0.4}, std::pair{0.1, 0.2}}) {
    PairSettings ps;
    ps.dt = 0.01;
    ps.t_end = 100.0;
    ps.record_every = 10;
    ps.transient_fraction = 0.3;
    const CouplingReport rep = run_pair(spec, u0, w0, f, fluid_control(lambda), ps, 2);
    INFO("lambda " << lambda);
    CHECK(rep.fitted_rate == doctest::Approx(expected).epsilon(0.01));
    CHECK(rep.success);
  }

  // Mode-wise: per-mode energy of the difference decays at 2(m + λ) inside the cutoff and 2m outside.
  PairSettings ps;
  ps.dt = 1e-3;
  ps.t_end = 2.0;
  ps.record_every = 2000;
  ps.keep_states = true;
  const double lambda = 0.3;
  const CouplingReport rep = run_pair(spec, u0, w0, f, fluid_control(lambda), ps, 2);
  const SpectralField d0 = rep.leader_states.front() - rep.shadow_states.front();
  const SpectralField d1 = rep.leader_states.back() - rep.shadow_states.back();
  for (Wavenumber k : {Wavenumber{1, 0}, Wavenumber{1, 1}, Wavenumber{2, 0}, Wavenumber{1, 2}}) {
    const double m = 0.1 * k.norm_sq() + (k.norm_sq() <= 2 ? lambda : 0.0);
    const double rate = -std::log(std::norm(d1.at(k)) / std::norm(d0.at(k))) / ps.t_end;
    CHECK(rate == doctest::Approx(2.0 * m).epsilon(1e-3));
  }
}

TEST_CASE("Gronwall identity residual") {
  const Grid g(32, 32);
  const ForcingSet f = ForcingSet::canonical_fluid(g, 2, ShellAmplitudes{});
  const ControlSpec control = fluid_control(0.4);
  PairSettings ps;
  ps.dt = 1e-3;
  ps.t_end = 0.2;
  ps.keep_states = true;

  SUBCASE("zero difference") {
    const SpectralField u0 = random_initial_state(nse(), g, {1.0, 4, 0.0}, 3, 0, 0);
    const CouplingReport rep = run_pair(nse(), u0, u0, f, control, ps, 1);
    CHECK(gronwall_envelope_check(rep, nse(), control).max_abs_residual == 0.0);
  }
  SUBCASE("linear model is exact") {
    const ModelSpec spec = nse(false);
    const SpectralField u0 = random_initial_state(spec, g, {1.0, 8, 0.0}, 3, 0, 0);
    const SpectralField w0 = random_initial_state(spec, g, {1.0, 8, 0.0}, 3, 0, 1);
    const CouplingReport rep = run_pair(spec, u0, w0, f, control, ps, 1);
    const GronwallCheck chk = gronwall_envelope_check(rep, spec, control);
    for (std::size_t n = 0; n < chk.residual.size(); ++n) CHECK(std::abs(chk.residual[n]) < 1e-9 * chk.scale[n]);
    const GronwallCheck cont = gronwall_envelope_check(rep, spec, control, GronwallRates::Continuous);
    CHECK(cont.max_abs_residual > 1e3 * chk.max_abs_residual);
  }
  SUBCASE("Navier-Stokes residual is within the Taylor bound") {
    const SpectralField u0 = random_initial_state(nse(), g, {1.0, 8, 0.0}, 3, 0, 0);
    const SpectralField w0 = random_initial_state(nse(), g, {1.0, 8, 0.0}, 3, 0, 1);
    const CouplingReport rep = run_pair(nse(), u0, w0, f, control, ps, 1);
    const GronwallCheck chk = gronwall_envelope_check(rep, nse(), control);
    REQUIRE(chk.residual.size() == 200);
    for (std::size_t n = 0; n < chk.residual.size(); ++n) CHECK(std::abs(chk.residual[n]) <= 10.0 * ps.dt * chk.scale[n]);
  }
}

TEST_CASE("ensemble bookkeeping") {
  EnsembleSetup setup;
  setup.spec = nse();
  setup.grid = Grid(16, 16);
  setup.forcing = ForcingSet::canonical_fluid(setup.grid, 2, ShellAmplitudes{});
  setup.control = fluid_control(0.4);
  setup.settings.dt = 0.01;
  setup.settings.t_end = 2.0;
  setup.settings.record_every = 10;
  setup.seed = 9;

  const EnsembleSummary one = run_ensemble(setup, 1);
  REQUIRE(one.reports.size() == 1);
  const auto [u0, w0] = initial_pair(setup, 0);
  const CouplingReport direct = run_pair(setup.spec, u0, w0, setup.forcing, setup.control, setup.settings, 9, 0);
  CHECK(one.reports[0].rho == direct.rho);
  CHECK(one.successes == (direct.success ? 1 : 0));

  setup.threads = 1;
  const EnsembleSummary serial = run_ensemble(setup, 4);
  setup.threads = 3;
  const EnsembleSummary parallel = run_ensemble(setup, 4);
  for (int r = 0; r < 4; ++r) {
    CHECK(serial.reports[r].rho == parallel.reports[r].rho);
    CHECK(serial.reports[r].final_ledger() == parallel.reports[r].final_ledger());
  }

  setup.separation = 0.5;
  const auto [a, b] = initial_pair(setup, 2);
  CHECK(rho_tilde(setup.spec, a, b) == doctest::Approx(0.5));

  // Budgets straddling the realized costs: with shared noise each replica
  // stops no later at a larger K, so the hit count cannot grow.
  setup.separation = 0.0;
  std::vector<int> hits;
  std::vector<std::vector<double>> stops;
  for (double k : {0.005, 0.01, 0.02}) {
    setup.control.budget = k;
    const EnsembleSummary s = run_ensemble(setup, 6);
    CHECK(s.budget_violations == 0);
    hits.push_back(s.tau_hits);
    std::vector<double> st;
    for (const CouplingReport& rep : s.reports) {
      CHECK(rep.final_ledger().cost() <= k + rep.final_ledger().max_increment());
      st.push_back(rep.tau_time.value_or(1e300));
    }
    stops.push_back(st);
  }
  CHECK(hits[0] >= hits[1]);
  CHECK(hits[1] >= hits[2]);
  CHECK(hits[0] > hits[2]);
  for (std::size_t r = 0; r < 6; ++r) {
    CHECK(stops[0][r] <= stops[1][r]);
    CHECK(stops[1][r] <= stops[2][r]);
  }
}

TEST_CASE("sine-gordon pair runs the wave control") {
  const Grid line(128, 1);
  ModelSpec spec;
  spec.kind = ModelKind::SineGordon;
  spec.alpha_damp = 0.5;
  const ForcingSet f = ForcingSet::canonical_wave(line, 8, ShellAmplitudes{});
  ControlSpec c;
  c.form = ControlForm::SineDifference;
  c.cutoff = GalerkinCutoff(8.0, 1);
  c.lambda = 1.0;
  const SpectralField u0 = random_initial_state(spec, line, {1.0, 8, 0.0}, 1, 0, 0);
  const SpectralField w0 = random_initial_state(spec, line, {1.0, 8, 0.0}, 1, 0, 1);
  PairSettings ps;
  ps.dt = 0.01;
  ps.t_end = 20.0;
  ps.record_every = 10;
  const CouplingReport rep = run_pair(spec, u0, w0, f, c, ps, 3);
  CHECK(rep.rho.back() < rep.rho.front());
  CHECK(rep.final_ledger().cost() > 0.0);
  CHECK_THROWS_AS(run_pair(spec, u0, w0, f, fluid_control(1.0), ps, 3), ConfigError);
}
