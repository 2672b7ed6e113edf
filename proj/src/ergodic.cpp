#include "ergc/diagnostics/ergodic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ergc/detail/parallel.hpp"
#include "ergc/error.hpp"

namespace ergc {

namespace {

constexpr double kPi = std::numbers::pi;

double coordinate(const ModelSpec& spec, const SpectralField& state, Wavenumber k) {
  if (spec.is_fluid()) return state.at(k).real();
  return -2.0 * state.at({k.k1, 0}, 0).imag();
}

bool near(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b)); }

double mean_of(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v;
  return x.empty() ? 0.0 : s / static_cast<double>(x.size());
}

double se_of(const std::vector<double>& x) {
  if (x.size() < 2) return 0.0;
  const double m = mean_of(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(x.size() - 1) / static_cast<double>(x.size()));
}

}  // namespace

Observable Observable::energy() { return {"energy", ObservableKind::Energy, {0, 0}, 1.0}; }

Observable Observable::enstrophy() { return {"enstrophy", ObservableKind::Enstrophy, {0, 0}, 1.0}; }

Observable Observable::low_mode(Wavenumber k) {
  return {"low_mode(" + std::to_string(k.k1) + "," + std::to_string(k.k2) + ")", ObservableKind::LowMode, k, 1.0};
}

Observable Observable::bounded_lipschitz(const ModelSpec& spec, Wavenumber k) {
  return {"tanh_mode(" + std::to_string(k.k1) + "," + std::to_string(k.k2) + ")", ObservableKind::BoundedLipschitz, k,
          lipschitz_scale(spec, k)};
}

double lipschitz_scale(const ModelSpec& spec, Wavenumber k) {
  const double n = std::sqrt(static_cast<double>(k.norm_sq()));
  if (n == 0.0) throw InvalidArgument("bounded_lipschitz: the mean mode carries no information");
  switch (spec.kind) {
    case ModelKind::NavierStokes:
    case ModelKind::FractionalEuler: return 2.0 * kPi * std::sqrt(2.0) / n;
    case ModelKind::EulerVoigt: return 2.0 * kPi * std::sqrt(2.0) / std::pow(n, 1.0 + 0.5 * spec.alpha);
    case ModelKind::SineGordon: return n * std::sqrt(kPi);
  }
  return 1.0;
}

double Observable::operator()(const ModelSpec& spec, const SpectralField& state) const {
  switch (kind) {
    case ObservableKind::Energy: return energy_functional(spec, state, "energy");
    case ObservableKind::Enstrophy:
      if (!spec.is_fluid()) throw InvalidArgument("enstrophy is not defined for the wave model");
      return energy_functional(spec, state, "enstrophy");
    case ObservableKind::LowMode: return coordinate(spec, state, mode);
    case ObservableKind::BoundedLipschitz: return std::tanh(scale * coordinate(spec, state, mode));
  }
  return 0.0;
}

AverageSeries average_series(std::string name, double period, std::vector<double> times, std::vector<double> samples,
                             int batches) {
  if (batches < 2) throw InvalidArgument("average_series: need at least two batches");
  if (samples.size() < static_cast<std::size_t>(batches)) {
    throw InsufficientDuration("average_series: " + std::to_string(samples.size()) + " samples for " +
                               std::to_string(batches) + " batches; the run must cover at least " +
                               std::to_string(batches) + " sample periods");
  }
  AverageSeries s;
  s.name = std::move(name);
  s.period = period;
  s.batches = batches;
  double sum = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    sum += samples[i];
    s.running_mean.push_back(sum / static_cast<double>(i + 1));
  }
  s.mean = s.running_mean.back();
  // Batches of equal length over the tail of the record.
  const std::size_t len = samples.size() / static_cast<std::size_t>(batches);
  const std::size_t start = samples.size() - len * static_cast<std::size_t>(batches);
  std::vector<double> means;
  for (int b = 0; b < batches; ++b) {
    double m = 0.0;
    for (std::size_t i = 0; i < len; ++i) m += samples[start + static_cast<std::size_t>(b) * len + i];
    means.push_back(m / static_cast<double>(len));
  }
  s.standard_error = se_of(means);
  s.times = std::move(times);
  s.samples = std::move(samples);
  return s;
}

AverageSeries birkhoff_average(const Trajectory& trajectory, const ModelSpec& spec, const Observable& obs, double period,
                               double burn_in, int batches) {
  if (!(period > 0.0)) throw InvalidArgument("birkhoff_average: period must be positive");
  if (trajectory.times.empty()) throw InsufficientDuration("birkhoff_average: empty trajectory");
  const double span = trajectory.times.back() - burn_in;
  const auto n = static_cast<std::size_t>(std::floor(span / period + 1e-9));
  if (n < static_cast<std::size_t>(batches)) {
    throw InsufficientDuration("birkhoff_average: duration after burn-in is " + std::to_string(span) + ", below " +
                               std::to_string(batches) + " sample periods of " + std::to_string(period));
  }
  std::vector<double> times, samples;
  std::size_t j = 0;
  for (std::size_t i = 1; i <= n; ++i) {
    const double t = burn_in + static_cast<double>(i) * period;
    while (j < trajectory.times.size() && trajectory.times[j] < t && !near(trajectory.times[j], t)) ++j;
    if (j == trajectory.times.size() || !near(trajectory.times[j], t)) {
      throw InvalidArgument("birkhoff_average: no stored state at t = " + std::to_string(t));
    }
    times.push_back(t);
    samples.push_back(obs(spec, trajectory.states[j]));
  }
  return average_series(obs.name, period, std::move(times), std::move(samples), batches);
}

ObservableSampler::ObservableSampler(const ModelSpec& spec, std::vector<Observable> observables, double period,
                                     double burn_in)
    : spec_(spec), observables_(std::move(observables)), period_(period), burn_in_(burn_in),
      samples_(observables_.size()) {
  if (!(period_ > 0.0) || burn_in_ < 0.0) throw InvalidArgument("sampler: need period > 0 and burn_in >= 0");
}

StepObserver ObservableSampler::observer() {
  return [this](const StepEvent& e) {
    if (stride_ == 0) {
      stride_ = step_count(period_, e.dt);
      offset_ = step_count(burn_in_, e.dt);
      if (stride_ == 0) throw InvalidArgument("sampler: period shorter than dt");
    }
    const std::uint64_t done = e.step + 1;
    if (done > offset_ && (done - offset_) % stride_ == 0) sample(static_cast<double>(done) * e.dt, e.after);
  };
}

void ObservableSampler::sample(double t, const SpectralField& state) {
  times_.push_back(t);
  for (std::size_t i = 0; i < observables_.size(); ++i) samples_[i].push_back(observables_[i](spec_, state));
}

std::vector<AverageSeries> ObservableSampler::series(int batches) const {
  std::vector<AverageSeries> out;
  for (std::size_t i = 0; i < observables_.size(); ++i) {
    out.push_back(average_series(observables_[i].name, period_, times_, samples_[i], batches));
  }
  return out;
}

// ---- tails ----------------------------------------------------------------

namespace {

void require_tail_model(const ModelSpec& spec) {
  if (!spec.is_fluid()) throw InvalidArgument("martingale tails: defined for the fluid models");
}

double weight(const ModelSpec& spec, int k2) {
  return spec.kind == ModelKind::EulerVoigt ? std::pow(static_cast<double>(k2), -0.5 * spec.alpha)
                                            : 1.0 / static_cast<double>(k2);
}

double q_form(const ModelSpec& spec, const SpectralField& f, int component) {
  const Grid& g = f.grid();
  double s = 0.0;
  for (std::size_t i = 1; i < g.size(); ++i) s += weight(spec, g.norm_sq(i)) * std::norm(f(component, i));
  return g.volume() * s;
}

double min_rate(const ModelSpec& spec, const Grid& g) {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < g.size(); ++i) {
    if (!g.is_nyquist(i)) m = std::min(m, linear_symbol(spec, g.wavenumber(i)));
  }
  return m;
}

}  // namespace

TailFunctional::TailFunctional(const ModelSpec& spec, const ForcingSet* forcing) : spec_(spec) {
  require_tail_model(spec_);
  if (forcing) {
    for (int j = 0; j < forcing->size(); ++j) noise_energy_ += q_form(spec_, forcing->direction(j), 0);
  }
}

double TailFunctional::quadratic(const SpectralField& state) const { return q_form(spec_, state, 0); }

double TailFunctional::dissipation(const SpectralField& state) const {
  const Grid& g = state.grid();
  if (weight_.size() != g.size()) {
    weight_.assign(g.size(), 0.0);
    rate_.assign(g.size(), 0.0);
    for (std::size_t i = 1; i < g.size(); ++i) {
      weight_[i] = weight(spec_, g.norm_sq(i));
      rate_[i] = linear_symbol(spec_, g.wavenumber(i));
    }
  }
  double s = 0.0;
  for (std::size_t i = 1; i < g.size(); ++i) s += rate_[i] * weight_[i] * std::norm(state(0, i));
  return g.volume() * s;
}

void TailFunctional::observe(const StepEvent& event) {
  if (!started_) {
    q0_ = quadratic(event.before);
    started_ = true;
  }
  integral_ += dissipation(event.before) * event.dt;
  const double t = event.t + event.dt;
  const double f = quadratic(event.after) + integral_ - noise_energy_ * t - q0_;
  sup_ = std::max(sup_, f);
}

double tail_gamma(const ModelSpec& spec, const ForcingSet& forcing) {
  require_tail_model(spec);
  const TailFunctional tf(spec, &forcing);
  if (!(tf.noise_energy() > 0.0)) return std::numeric_limits<double>::infinity();
  return min_rate(spec, forcing.grid()) / tf.noise_energy();
}

bool tail_bound_rigorous(const ModelSpec& spec, const ForcingSet& forcing) {
  require_tail_model(spec);
  double total = 0.0, peak = 0.0;
  for (int j = 0; j < forcing.size(); ++j) {
    const double q = q_form(spec, forcing.direction(j), 0);
    total += q;
    peak = std::max(peak, q);
  }
  return total >= 2.0 * peak;
}

bool TailTable::any_flagged() const {
  return std::any_of(rows.begin(), rows.end(), [](const TailRow& r) { return r.flagged; });
}

TailTable martingale_tail_check(const ModelSpec& spec, const ForcingSet& forcing, const std::vector<double>& suprema,
                                const std::vector<double>& R_grid) {
  TailTable table;
  table.gamma = tail_gamma(spec, forcing);
  table.rigorous = tail_bound_rigorous(spec, forcing);
  table.replicas = static_cast<int>(suprema.size());
  const double n = static_cast<double>(suprema.size());
  for (double R : R_grid) {
    TailRow row;
    row.R = R;
    const auto hits = std::count_if(suprema.begin(), suprema.end(), [&](double s) { return s >= R; });
    row.empirical = n > 0 ? static_cast<double>(hits) / n : 0.0;
    row.bound = std::exp(-table.gamma * R);
    // Binomial SE at the bound, so an empirical frequency of 0 or 1 is still judged.
    const double p = std::min(row.bound, 1.0);
    row.standard_error = n > 0 ? std::sqrt(p * (1.0 - p) / n) : 0.0;
    row.flagged = row.empirical > row.bound + 3.0 * row.standard_error;
    table.rows.push_back(row);
  }
  return table;
}

TailTable martingale_tail_check(const ModelSpec& spec, const ForcingSet& forcing,
                                const std::vector<Trajectory>& ensemble, const std::vector<double>& R_grid) {
  std::vector<double> sups;
  for (const Trajectory& tr : ensemble) {
    TailFunctional tf(spec, &forcing);
    for (std::size_t i = 0; i + 1 < tr.states.size(); ++i) {
      const double dt = tr.times[i + 1] - tr.times[i];
      tf.observe(StepEvent{i, tr.times[i], dt, tr.states[i], tr.states[i + 1], {}});
    }
    sups.push_back(tf.supremum());
  }
  return martingale_tail_check(spec, forcing, sups, R_grid);
}

TailTable martingale_tail_ensemble(const ModelSpec& spec, const ForcingSet& forcing, const SpectralField& u0,
                                   const StepperConfig& config, int replicas, std::uint64_t seed,
                                   const std::vector<double>& R_grid) {
  if (replicas < 200) throw InvalidArgument("martingale_tail_ensemble: needs at least 200 replicas");
  std::vector<double> sups(static_cast<std::size_t>(replicas));
  detail::parallel_for(replicas, 0, [&](int r) {
    NoisePath noise(seed, static_cast<std::uint32_t>(r), config.dt, config.substeps);
    TailFunctional tf(spec, &forcing);
    StepperConfig c = config;
    c.checkpoint_every = 0;
    integrate(spec, u0, c, &forcing, noise, [&](const StepEvent& e) { tf.observe(e); });
    sups[static_cast<std::size_t>(r)] = tf.supremum();
  });
  return martingale_tail_check(spec, forcing, sups, R_grid);
}

// ---- agreement ------------------------------------------------------------

std::vector<AgreementRow> ergodic_agreement(const ModelSpec& spec, const ForcingSet* forcing, const SpectralField& u0_a,
                                            const SpectralField& u0_b, const std::vector<Observable>& observables,
                                            const AgreementSettings& settings, std::vector<AverageSeries>* series_a,
                                            std::vector<AverageSeries>* series_b) {
  const double span = settings.stepper.t_end - settings.burn_in;
  if (span < kDefaultBatches * settings.period) {
    throw InsufficientDuration("ergodic_agreement: horizon after burn-in must be at least " +
                               std::to_string(kDefaultBatches) + " sample periods");
  }
  auto run = [&](const SpectralField& u0, std::uint64_t seed) {
    ObservableSampler sampler(spec, observables, settings.period, settings.burn_in);
    NoisePath noise(seed, 0, settings.stepper.dt, settings.stepper.substeps);
    StepperConfig c = settings.stepper;
    c.checkpoint_every = 0;
    integrate(spec, u0, c, forcing, noise, sampler.observer());
    return sampler.series();
  };
  const std::vector<AverageSeries> a = run(u0_a, settings.seed_a);
  const std::vector<AverageSeries> b = run(u0_b, settings.seed_b);
  std::vector<AgreementRow> rows;
  for (std::size_t i = 0; i < observables.size(); ++i) {
    AgreementRow r;
    r.observable = observables[i].name;
    r.mean_a = a[i].mean;
    r.se_a = a[i].standard_error;
    r.mean_b = b[i].mean;
    r.se_b = b[i].standard_error;
    r.difference = r.mean_a - r.mean_b;
    r.combined_se = std::hypot(r.se_a, r.se_b);
    r.samples = static_cast<int>(a[i].samples.size());
    r.agrees = std::abs(r.difference) <= 3.0 * r.combined_se;
    rows.push_back(r);
  }
  if (series_a) *series_a = a;
  if (series_b) *series_b = b;
  return rows;
}

// ---- inviscid limit -------------------------------------------------------

LimitReport inviscid_limit_study(const ModelSpec& voigt, const Grid& grid, const ForcingSet* forcing,
                                 const LimitSettings& settings) {
  if (voigt.kind != ModelKind::EulerVoigt) throw InvalidArgument("inviscid_limit_study: needs the euler_voigt model");
  if (settings.replicas < 1) throw InvalidArgument("inviscid_limit_study: replicas must be >= 1");
  for (double e : settings.epsilons) {
    if (e < 0.0) throw InvalidArgument("inviscid_limit_study: epsilons must be nonnegative");
  }
  ModelSpec base = voigt;
  base.eps_visc = 0.0;
  const std::size_t n_eps = settings.epsilons.size();
  const std::size_t n_obs = settings.observables.size();
  const auto reps = static_cast<std::size_t>(settings.replicas);

  struct Run {
    SpectralField final_state;
    std::vector<double> averages;
    double moment = 0.0;
  };
  // runs[r][0] is the baseline, runs[r][1 + i] the run at epsilons[i].
  std::vector<std::vector<Run>> runs(reps, std::vector<Run>(n_eps + 1));
  StepperConfig cfg;
  cfg.dt = settings.dt;
  cfg.t_end = settings.horizon;

  detail::parallel_for(settings.replicas, settings.threads, [&](int r) {
    const auto id = static_cast<std::uint32_t>(r);
    const SpectralField u0 = random_initial_state(base, grid, settings.initial, settings.seed, id, 0);
    for (std::size_t i = 0; i <= n_eps; ++i) {
      ModelSpec spec = base;
      spec.eps_visc = i == 0 ? 0.0 : settings.epsilons[i - 1];
      NoisePath noise(settings.seed, id, settings.dt);
      std::vector<double> sums(n_obs, 0.0);
      std::uint64_t count = 0;
      double moment = 0.0;
      const std::uint64_t stride = step_count(settings.period, settings.dt);
      const Trajectory tr = integrate(spec, u0, cfg, forcing, noise, [&](const StepEvent& e) {
        if ((e.step + 1) % stride != 0) return;
        for (std::size_t o = 0; o < n_obs; ++o) sums[o] += settings.observables[o](spec, e.after);
        moment = std::max(moment, energy_functional(spec, e.after, "voigt_vorticity"));
        ++count;
      });
      Run& run = runs[static_cast<std::size_t>(r)][i];
      run.final_state = tr.states.back();
      for (double s : sums) run.averages.push_back(count > 0 ? s / static_cast<double>(count) : 0.0);
      run.moment = moment;
    }
  });

  auto make_row = [&](std::size_t i, double eps) {
    LimitRow row;
    row.epsilon = eps;
    std::vector<double> disc;
    for (std::size_t r = 0; r < reps; ++r) disc.push_back(rho_tilde(base, runs[r][0].final_state, runs[r][i].final_state));
    row.discrepancy = mean_of(disc);
    row.discrepancy_se = se_of(disc);
    for (std::size_t o = 0; o < n_obs; ++o) {
      std::vector<double> avg, diff;
      for (std::size_t r = 0; r < reps; ++r) {
        avg.push_back(runs[r][i].averages[o]);
        diff.push_back(runs[r][i].averages[o] - runs[r][0].averages[o]);
      }
      row.averages.push_back(mean_of(avg));
      row.averages_se.push_back(se_of(avg));
      row.shift.push_back(mean_of(diff));
      row.shift_se.push_back(se_of(diff));
    }
    return row;
  };

  LimitReport report;
  report.baseline = make_row(0, 0.0);
  for (std::size_t i = 0; i < n_eps; ++i) report.rows.push_back(make_row(i + 1, settings.epsilons[i]));
  for (const auto& per_rep : runs) {
    for (const Run& run : per_rep) report.moment_sup = std::max(report.moment_sup, run.moment);
  }

  std::vector<double> lx, ly;
  for (const LimitRow& row : report.rows) {
    if (row.epsilon > 0.0 && row.discrepancy > 0.0) {
      lx.push_back(std::log(row.epsilon));
      ly.push_back(std::log(row.discrepancy));
    }
  }
  if (lx.size() >= 2) {
    const double mx = mean_of(lx), my = mean_of(ly);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      sxy += (lx[i] - mx) * (ly[i] - my);
      sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    report.fitted_order = sxy / sxx;
    double ss = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) ss += std::pow(ly[i] - my - report.fitted_order * (lx[i] - mx), 2);
    report.fit_residual = std::sqrt(ss / static_cast<double>(lx.size()));
  }

  std::vector<std::size_t> order(n_eps);
  for (std::size_t i = 0; i < n_eps; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return report.rows[a].epsilon > report.rows[b].epsilon; });
  for (std::size_t o = 0; o < n_obs; ++o) {
    bool ok = true;
    for (std::size_t j = 0; j + 1 < order.size(); ++j) {
      const LimitRow& big = report.rows[order[j]];
      const LimitRow& small = report.rows[order[j + 1]];
      const double slack = std::hypot(big.shift_se[o], small.shift_se[o]);
      if (std::abs(small.shift[o]) > std::abs(big.shift[o]) + slack) ok = false;
    }
    report.monotone.push_back(ok);
  }
  return report;
}

}  // namespace ergc
