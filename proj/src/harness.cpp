#include "ergc/coupling/harness.hpp"

#include <algorithm>
#include <cmath>

#include "ergc/detail/parallel.hpp"
#include "ergc/error.hpp"
#include "ergc/forcing/noise_path.hpp"
#include "ergc/integration/integrate.hpp"

namespace ergc {

std::string to_string(ControlForm form) {
  return form == ControlForm::LinearProjection ? "linear_projection" : "sine_difference";
}

ControlForm control_form_from_string(const std::string& name) {
  if (name == "linear_projection") return ControlForm::LinearProjection;
  if (name == "sine_difference") return ControlForm::SineDifference;
  throw InvalidArgument("unknown control form '" + name + "'");
}

void ControlSpec::validate(const ModelSpec& spec, const ForcingSet& forcing) const {
  if (spec.is_fluid() && form != ControlForm::LinearProjection) {
    throw ConfigError("control.form", "sine_difference control requires the sine_gordon model, not " +
                                          to_string(spec.kind));
  }
  if (!spec.is_fluid() && form != ControlForm::SineDifference) {
    throw ConfigError("control.form", "linear_projection control requires a fluid model, not sine_gordon");
  }
  if (!(lambda >= 0.0)) throw ConfigError("control.lambda", "must be nonnegative");
  forcing.require_coverage(cutoff, "control.cutoff");
}

double default_lambda(const ModelSpec& spec, const GalerkinCutoff& cutoff) {
  switch (spec.kind) {
    case ModelKind::NavierStokes: return spec.nu * cutoff.lambda_n();
    case ModelKind::FractionalEuler: return std::pow(cutoff.lambda_n(), 0.5 * spec.gamma);
    case ModelKind::EulerVoigt:
    case ModelKind::SineGordon: return 1.0;
  }
  return 1.0;
}

ControlForm default_control_form(const ModelSpec& spec) {
  return spec.is_fluid() ? ControlForm::LinearProjection : ControlForm::SineDifference;
}

DecayFit fit_decay(const std::vector<double>& times, const std::vector<double>& rho, double t_end,
                   double transient_fraction, double fit_floor) {
  DecayFit fit;
  if (rho.empty() || !(rho.front() > 0.0)) return fit;
  const double floor = fit_floor * rho.front();
  std::size_t end = 0;
  while (end < rho.size() && rho[end] > floor) ++end;

  auto window = [&](double t0) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < end; ++i) {
      if (times[i] >= t0) idx.push_back(i);
    }
    return idx;
  };
  std::vector<std::size_t> idx = window(transient_fraction * t_end);
  if (idx.size() < 3) idx = window(0.0);
  if (idx.size() < 2) return fit;

  double st = 0, sy = 0, stt = 0, sty = 0;
  const double n = static_cast<double>(idx.size());
  for (std::size_t i : idx) {
    const double t = times[i], y = std::log(rho[i]);
    st += t, sy += y, stt += t * t, sty += t * y;
  }
  const double slope = (n * sty - st * sy) / (n * stt - st * st);
  const double intercept = (sy - slope * st) / n;
  double ss = 0.0;
  for (std::size_t i : idx) ss += std::pow(std::log(rho[i]) - intercept - slope * times[i], 2);
  fit.rate = -slope;
  fit.residual = std::sqrt(ss / n);
  fit.points = static_cast<int>(idx.size());
  return fit;
}

CouplingReport run_pair(const ModelSpec& spec, const SpectralField& u0, const SpectralField& shadow0,
                        const ForcingSet& forcing, const ControlSpec& control, const PairSettings& settings,
                        std::uint64_t seed, std::uint32_t replica) {
  spec.validate();
  control.validate(spec, forcing);
  if (!u0.same_shape(shadow0)) throw GridMismatch("run_pair: initial states differ in shape");
  if (settings.record_every < 1) throw InvalidArgument("run_pair: record_every must be >= 1");
  const Stepper stepper(spec, u0.grid(), &forcing, settings.dt);
  const std::uint64_t steps = step_count(settings.t_end, settings.dt);
  const int d = stepper.noise_dimension();
  const int n_aux = stepper.auxiliary_count();
  NoisePath noise(seed, replica, settings.dt, settings.substeps);
  const double sigma_sq = forcing.sigma_norm_sq();

  CouplingReport rep;
  rep.replica = replica;
  rep.dt = settings.dt;
  rep.record_every = settings.record_every;
  SpectralField u = u0, w = shadow0;
  GirsanovLedger ledger(control.budget);
  const double e0 = energy_functional(spec, u0, "energy");

  auto record = [&](double t) {
    rep.times.push_back(t);
    rep.rho.push_back(rho_tilde(spec, u, w));
    const double e = energy_functional(spec, u, "energy");
    rep.energy.push_back(e);
    if (e > e0 + sigma_sq * t + settings.envelope_offset) rep.envelope_exceeded = true;
    rep.ledgers.push_back(ledger);
    if (settings.keep_states) {
      rep.leader_states.push_back(u);
      rep.shadow_states.push_back(w);
    }
  };
  record(0.0);

  std::vector<double> empty;
  try {
    for (std::uint64_t n = 0; n < steps; ++n) {
      const double t = static_cast<double>(n) * settings.dt;
      const std::uint64_t index = noise.step();
      const std::vector<double> dW = noise.sample_increments(d);
      const std::vector<double> aux = n_aux > 0 ? noise.auxiliary_normals_at(index, n_aux) : empty;
      if (ledger.control_active()) {
        const SpectralField g = coupling_control(spec, u, w, control.lambda, control.cutoff);
        stepper.step(u, dW, aux, nullptr, nullptr, t);
        stepper.step(w, dW, aux, &ledger, &g, t);
      } else {
        stepper.step(u, dW, aux, nullptr, nullptr, t);
        stepper.step(w, dW, aux, &ledger, nullptr, t);
      }
      if ((n + 1) % static_cast<std::uint64_t>(settings.record_every) == 0 || n + 1 == steps) {
        record(static_cast<double>(n + 1) * settings.dt);
      }
    }
  } catch (const DivergedTrajectory& e) {
    rep.diverged = true;
    rep.diverged_time = e.last_finite_time();
  }

  rep.tau_time = ledger.stop_time();
  rep.tau_hit = rep.tau_time.has_value();
  const DecayFit fit = fit_decay(rep.times, rep.rho, settings.t_end, settings.transient_fraction, settings.fit_floor);
  rep.fitted_rate = fit.rate;
  rep.fit_residual = fit.residual;
  rep.fit_points = fit.points;
  rep.success = !rep.diverged && rep.rho.back() <= settings.success_factor * rep.rho.front();
  return rep;
}

std::pair<SpectralField, SpectralField> initial_pair(const EnsembleSetup& setup, std::uint32_t replica) {
  SpectralField u0 = random_initial_state(setup.spec, setup.grid, setup.initial, setup.seed, replica, 0);
  SpectralField other = random_initial_state(setup.spec, setup.grid, setup.initial, setup.seed, replica, 1);
  if (setup.separation <= 0.0) return {std::move(u0), std::move(other)};
  const SpectralField zero(setup.grid, setup.spec.state_components());
  const double size = rho_tilde(setup.spec, other, zero);
  if (!(size > 0.0)) throw InvalidArgument("initial_pair: degenerate perturbation");
  other *= setup.separation / size;
  SpectralField shadow = u0 + other;
  return {std::move(u0), std::move(shadow)};
}

std::pair<double, double> wilson_interval(int successes, int trials) {
  if (trials <= 0) return {0.0, 1.0};
  const double z = 1.959963984540054;
  const double n = trials, p = successes / n;
  const double denom = 1.0 + z * z / n;
  const double centre = (p + z * z / (2.0 * n)) / denom;
  const double half = z / denom * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n));
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

EnsembleSummary run_ensemble(const EnsembleSetup& setup, int replicas) {
  if (replicas < 1) throw InvalidArgument("run_ensemble: replicas must be >= 1");
  setup.control.validate(setup.spec, setup.forcing);
  std::vector<std::optional<CouplingReport>> slots(static_cast<std::size_t>(replicas));
  std::vector<std::string> errors(static_cast<std::size_t>(replicas));
  detail::parallel_for(replicas, setup.threads, [&](int r) {
    const auto id = static_cast<std::uint32_t>(r);
    try {
      const auto [u0, w0] = initial_pair(setup, id);
      slots[id] = run_pair(setup.spec, u0, w0, setup.forcing, setup.control, setup.settings, setup.seed, id);
    } catch (const std::exception& e) {
      errors[id] = e.what();
    }
  });

  EnsembleSummary s;
  s.replicas = replicas;
  int in_envelope = 0, success_in_envelope = 0;
  for (int r = 0; r < replicas; ++r) {
    if (!slots[r]) {
      s.failures.emplace_back(static_cast<std::uint32_t>(r), errors[r]);
      continue;
    }
    const CouplingReport& rep = *slots[r];
    if (rep.success) {
      ++s.successes;
      s.success_rates.push_back(rep.fitted_rate);
    }
    if (rep.tau_hit && setup.control.budget > 0.0) ++s.tau_hits;
    if (rep.diverged) ++s.diverged;
    if (!rep.final_ledger().invariant_holds()) ++s.budget_violations;
    if (rep.envelope_exceeded) {
      ++s.envelope_exceedances;
    } else {
      ++in_envelope;
      if (rep.success) ++success_in_envelope;
    }
    s.reports.push_back(std::move(*slots[r]));
  }
  s.success_frequency = static_cast<double>(s.successes) / replicas;
  std::tie(s.wilson_low, s.wilson_high) = wilson_interval(s.successes, replicas);
  s.tau_hit_frequency = static_cast<double>(s.tau_hits) / replicas;
  s.success_frequency_in_envelope = in_envelope > 0 ? static_cast<double>(success_in_envelope) / in_envelope : 0.0;
  return s;
}

namespace {

SpectralField component_of(const SpectralField& f, int c) {
  SpectralField out(f.grid());
  std::copy(f.component(c).begin(), f.component(c).end(), out.component(0).begin());
  return out;
}

}  // namespace

GronwallCheck gronwall_envelope_check(const CouplingReport& report, const ModelSpec& spec, const ControlSpec& control,
                                      GronwallRates rates) {
  if (spec.kind != ModelKind::NavierStokes && spec.kind != ModelKind::FractionalEuler) {
    throw InvalidArgument("gronwall_envelope_check: needs navier_stokes or fractional_euler");
  }
  if (control.form != ControlForm::LinearProjection) {
    throw InvalidArgument("gronwall_envelope_check: needs the linear_projection control");
  }
  if (report.record_every != 1 || report.leader_states.size() != report.times.size() ||
      report.shadow_states.size() != report.times.size()) {
    throw InvalidArgument("gronwall_envelope_check: report must keep states at every step");
  }
  GronwallCheck out;
  if (report.times.size() < 2) return out;
  const Grid& g = report.leader_states.front().grid();
  const double dt = report.dt;
  const Stepper stepper(spec, g, nullptr, dt);

  auto energy = [](const SpectralField& v) { return std::pow(sobolev_norm(v, -1.0), 2); };
  const std::size_t steps = report.times.size() - 1;
  for (std::size_t n = 0; n < steps; ++n) {
    const SpectralField v = report.leader_states[n] - report.shadow_states[n];
    const SpectralField v_next = report.leader_states[n + 1] - report.shadow_states[n + 1];
    const bool active = report.ledgers[n].control_active();

    double linear = 0.0, linear_abs = 0.0;
    for (std::size_t i = 1; i < g.size(); ++i) {
      const int k2 = g.norm_sq(i);
      const double mass = g.volume() * std::norm(v(0, i)) / k2;
      const bool controlled = active && control.cutoff.keeps(k2);
      double rate;
      if (rates == GronwallRates::Discrete) {
        const double gk = stepper.decay(i) - (controlled ? control.lambda * stepper.drift_weight(i) : 0.0);
        rate = (gk * gk - 1.0) / dt;
      } else {
        rate = -2.0 * (linear_symbol(spec, g.wavenumber(i)) + (controlled ? control.lambda : 0.0));
      }
      linear += rate * mass;
      linear_abs += std::abs(rate) * mass;
    }

    double transfer = 0.0;
    if (spec.advection) {
      const SpectralField vel = biot_savart(v);
      const SpectralField lead = biot_savart(report.leader_states[n]);
      for (int c = 0; c < 2; ++c) {
        transfer += inner_product(advect(vel, component_of(lead, c), true), component_of(vel, c));
      }
      transfer *= -2.0;
    }
    const double lhs = (energy(v_next) - energy(v)) / dt;
    const double r = lhs - linear - transfer;
    out.residual.push_back(r);
    out.scale.push_back(linear_abs + std::abs(transfer));
    out.max_abs_residual = std::max(out.max_abs_residual, std::abs(r));
  }
  return out;
}

}  // namespace ergc
