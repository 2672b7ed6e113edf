#include "ergc/integration/integrate.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "ergc/error.hpp"

namespace ergc {

std::uint64_t step_count(double t_end, double dt) {
  if (t_end < 0.0) throw InvalidArgument("t_end must be nonnegative");
  const double ratio = t_end / dt;
  const double steps = std::round(ratio);
  if (std::abs(ratio - steps) > 1e-9 * std::max(1.0, ratio)) {
    throw InvalidArgument("t_end must be a whole number of steps of size dt");
  }
  return static_cast<std::uint64_t>(steps);
}

Trajectory integrate(const ModelSpec& spec, const SpectralField& initial, const StepperConfig& config,
                     const ForcingSet* forcing, NoisePath& noise, const StepObserver& observer) {
  const Stepper stepper(spec, initial.grid(), forcing, config.dt);
  if (std::abs(noise.dt() - config.dt) > 1e-15 * config.dt) {
    throw InvalidArgument("integrate: noise path and stepper disagree on dt");
  }
  if (cfl_number(spec, initial, config.dt) > config.cfl_limit) {
    throw InvalidArgument("integrate: dt violates the advective CFL limit for the initial state");
  }
  const std::uint64_t steps = step_count(config.t_end, config.dt);
  const int d = stepper.noise_dimension();
  const int n_aux = stepper.auxiliary_count();

  Trajectory traj;
  GirsanovLedger ledger(0.0);
  traj.times.push_back(0.0);
  traj.states.push_back(initial);
  traj.ledgers.push_back(ledger);

  SpectralField state = initial;
  SpectralField before;
  std::vector<double> empty;
  for (std::uint64_t n = 0; n < steps; ++n) {
    const double t = static_cast<double>(n) * config.dt;
    const std::uint64_t index = noise.step();
    const std::vector<double> dW = d > 0 ? noise.sample_increments(d) : empty;
    const std::vector<double> aux = n_aux > 0 ? noise.auxiliary_normals_at(index, n_aux) : empty;
    if (observer) before = state;
    stepper.step(state, dW, aux, &ledger, nullptr, t);
    if (observer) observer(StepEvent{n, t, config.dt, before, state, dW});
    const bool last = n + 1 == steps;
    const bool store = config.checkpoint_every > 0 && (n + 1) % static_cast<std::uint64_t>(config.checkpoint_every) == 0;
    if (store || last) {
      traj.times.push_back(static_cast<double>(n + 1) * config.dt);
      traj.states.push_back(state);
      traj.ledgers.push_back(ledger);
      if (cfl_number(spec, state, config.dt) > config.cfl_limit) ++traj.cfl_warnings;
    }
  }
  return traj;
}

namespace {

template <typename T>
void put(std::ostream& out, T value) {
  static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get(std::istream& in, const std::filesystem::path& path) {
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) throw Error("checkpoint truncated: " + path.string());
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace

void write_checkpoint(const std::filesystem::path& path, const SpectralField& state, double time) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open checkpoint for writing: " + path.string());
  out.write("ERGC", 4);
  put<std::uint16_t>(out, kCheckpointVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(state.grid().modes_x()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(state.grid().modes_y()));
  put<std::uint16_t>(out, static_cast<std::uint16_t>(state.components()));
  put<double>(out, time);
  for (const Complex& z : state.data()) {
    put<double>(out, z.real());
    put<double>(out, z.imag());
  }
  if (!out) throw Error("failed writing checkpoint: " + path.string());
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint: " + path.string());
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "ERGC", 4) != 0) throw Error("not a checkpoint file: " + path.string());
  const auto version = get<std::uint16_t>(in, path);
  if (version != kCheckpointVersion) throw Error("unsupported checkpoint version in " + path.string());
  const auto nx = get<std::uint32_t>(in, path);
  const auto ny = get<std::uint32_t>(in, path);
  const auto comps = get<std::uint16_t>(in, path);
  Checkpoint cp;
  cp.time = get<double>(in, path);
  cp.state = SpectralField(Grid(static_cast<int>(nx), static_cast<int>(ny)), comps);
  for (Complex& z : cp.state.data()) {
    const double re = get<double>(in, path);
    const double im = get<double>(in, path);
    z = {re, im};
  }
  return cp;
}

EnergyBudget::EnergyBudget(const ModelSpec& spec, const ForcingSet* forcing) : spec_(spec), forcing_(forcing) {
  if (forcing_) {
    for (int j = 0; j < forcing_->size(); ++j) {
      SpectralField dir(forcing_->grid(), spec_.state_components());
      const int comp = spec_.is_fluid() ? 0 : 1;
      std::copy(forcing_->direction(j).component(0).begin(), forcing_->direction(j).component(0).end(),
                dir.component(comp).begin());
      qv_weight_.push_back(quadratic(dir));
    }
  }
}

double EnergyBudget::pairing(const SpectralField& a, const SpectralField& b) const {
  const Grid& g = a.grid();
  double sum = 0.0;
  for (std::size_t i = 1; i < g.size(); ++i) {
    const double k2 = g.norm_sq(i);
    for (int c = 0; c < a.components(); ++c) {
      double w = 1.0;
      if (spec_.is_fluid()) {
        w = spec_.kind == ModelKind::EulerVoigt ? std::pow(k2, -0.5 * spec_.alpha) : 1.0 / k2;
      } else if (c == 0) {
        w = k2;
      }
      sum += w * (a(c, i).real() * b(c, i).real() + a(c, i).imag() * b(c, i).imag());
    }
  }
  return g.volume() * sum;
}

double EnergyBudget::quadratic(const SpectralField& state) const { return pairing(state, state); }

void EnergyBudget::observe(const StepEvent& event) {
  const SpectralField& s = event.before;
  const Grid& g = s.grid();
  if (!started_) {
    q0_ = quadratic(s);
    started_ = true;
  }
  // Linear generator applied to s.
  SpectralField ls(g, s.components());
  for (std::size_t i = 1; i < g.size(); ++i) {
    const Wavenumber k = g.wavenumber(i);
    if (spec_.is_fluid()) {
      ls(0, i) = -linear_symbol(spec_, k) * s(0, i);
    } else {
      const Eigen::Matrix2d a = wave_symbol(spec_, k);
      ls(0, i) = a(0, 0) * s(0, i) + a(0, 1) * s(1, i);
      ls(1, i) = a(1, 0) * s(0, i) + a(1, 1) * s(1, i);
    }
  }
  ls += explicit_drift(spec_, s);
  double step = 2.0 * pairing(ls, s) * event.dt;
  if (forcing_) {
    SpectralField noise(g, s.components());
    forcing_->accumulate(event.dW, noise, spec_.is_fluid() ? 0 : 1);
    step += 2.0 * pairing(s, noise);
    for (std::size_t j = 0; j < qv_weight_.size(); ++j) step += qv_weight_[j] * event.dW[j] * event.dW[j];
  }
  predicted_ += step;
  residual_ = quadratic(event.after) - q0_ - predicted_;
  max_residual_ = std::max(max_residual_, std::abs(residual_));
}

}  // namespace ergc
