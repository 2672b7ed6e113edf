#include "ergc/integration/stepper.hpp"

#include <cmath>
#include <numbers>

#include <unsupported/Eigen/MatrixFunctions>

#include "ergc/error.hpp"
#include "ergc/spectral/fft.hpp"

namespace ergc {

namespace {

bool has_explicit_drift(const ModelSpec& spec) {
  if (!spec.body_force.empty()) return true;
  if (!spec.advection) return false;
  return !(spec.kind == ModelKind::SineGordon && spec.beta == 0.0);
}

}  // namespace

Stepper::Stepper(const ModelSpec& spec, const Grid& grid, const ForcingSet* forcing, double dt)
    : spec_(spec), grid_(grid), forcing_(forcing), dt_(dt) {
  if (!(dt > 0.0)) throw InvalidArgument("stepper: dt must be positive");
  if (forcing_ && forcing_->grid() != grid_) throw GridMismatch("stepper: forcing lives on a different grid");
  if (!spec_.body_force.empty() &&
      (spec_.body_force.grid() != grid_ || spec_.body_force.components() != spec_.state_components())) {
    throw GridMismatch("stepper: body force shape does not match the state");
  }
  const std::size_t n = grid_.size();

  if (spec_.is_fluid()) {
    if (grid_.dims() != 2) throw InvalidArgument("stepper: fluid models need a 2D grid");
    decay_.resize(n);
    drift_weight_.resize(n);
    noise_weight_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double m = i == 0 ? 0.0 : linear_symbol(spec_, grid_.wavenumber(i));
      const double z = m * dt_;
      if (z == 0.0) {
        decay_[i] = 1.0;
        drift_weight_[i] = dt_;
        noise_weight_[i] = 1.0;
      } else {
        decay_[i] = std::exp(-z);
        drift_weight_[i] = -std::expm1(-z) / m;
        noise_weight_[i] = std::sqrt(-std::expm1(-2.0 * z) / (2.0 * z));
      }
    }
    if (forcing_) {
      for (int j = 0; j < forcing_->size(); ++j) {
        std::vector<std::size_t> support;
        for (std::size_t i = 0; i < n; ++i) {
          if (forcing_->direction(j)(0, i) != Complex(0.0)) support.push_back(i);
        }
        noise_support_.push_back(std::move(support));
      }
    }
    return;
  }

  if (grid_.dims() != 1) throw InvalidArgument("stepper: the wave model needs a 1D grid");
  propagator_.resize(n);
  integrated_.resize(n);
  noise_mean_.resize(n);
  noise_chol_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Matrix2d a = wave_symbol(spec_, grid_.wavenumber(i));
    Eigen::Matrix4d aug = Eigen::Matrix4d::Zero();
    aug.topLeftCorner<2, 2>() = a * dt_;
    aug.topRightCorner<2, 2>() = Eigen::Matrix2d::Identity() * dt_;
    const Eigen::Matrix4d aug_exp = aug.exp();
    propagator_[i] = aug_exp.topLeftCorner<2, 2>();
    integrated_[i] = aug_exp.topRightCorner<2, 2>();

    // Van Loan: C = ∫₀^dt e^{As} B Bᵀ e^{Aᵀs} ds with B = (0, 1)ᵀ.
    Eigen::Matrix4d h = Eigen::Matrix4d::Zero();
    h.topLeftCorner<2, 2>() = -a * dt_;
    h(1, 3) = dt_;
    h.bottomRightCorner<2, 2>() = a.transpose() * dt_;
    const Eigen::Matrix4d f = h.exp();
    Eigen::Matrix2d c = f.bottomRightCorner<2, 2>().transpose() * f.topRightCorner<2, 2>();
    c = 0.5 * (c + c.transpose());
    const Eigen::Vector2d g = integrated_[i].col(1);  // Cov(ζ, ΔW)
    noise_mean_[i] = g / dt_;
    const Eigen::Matrix2d s = c - g * g.transpose() / dt_;
    // Cholesky with v first: ζ_v needs one auxiliary normal, ζ_u the second.
    const double lvv = std::sqrt(std::max(s(1, 1), 0.0));
    const double luv = lvv > 0.0 ? s(0, 1) / lvv : 0.0;
    const double luu = std::sqrt(std::max(s(0, 0) - luv * luv, 0.0));
    Eigen::Matrix2d l;
    l << luv, luu, lvv, 0.0;
    noise_chol_[i] = l;
  }
  if (forcing_) {
    for (int j = 0; j < forcing_->size(); ++j) {
      const SpectralField& rho = forcing_->direction(j);
      std::size_t found = grid_.size();
      for (std::size_t i = 1; i < grid_.size() / 2; ++i) {
        if (rho(0, i) == Complex(0.0)) continue;
        if (found != grid_.size()) throw InvalidArgument("wave stepper: each forcing direction must be a single mode");
        found = i;
      }
      if (found == grid_.size()) throw InvalidArgument("wave stepper: forcing direction has no positive mode");
      wave_dirs_.push_back({found, grid_.conjugate_index(found), rho(0, found)});
    }
  }
}

void Stepper::step(SpectralField& state, std::span<const double> dW, std::span<const double> aux,
                   GirsanovLedger* ledger, const SpectralField* control, double t) const {
  if (state.grid() != grid_ || state.components() != spec_.state_components()) {
    throw GridMismatch("step: state does not match the stepper");
  }
  if (static_cast<int>(dW.size()) != noise_dimension()) throw InvalidArgument("step: wrong number of increments");

  const SpectralField* applied = nullptr;
  if (ledger) {
    if (control && ledger->control_active()) {
      if (!forcing_) throw RangeViolation("step: a control needs forcing directions", 1.0);
      const int comp = spec_.is_fluid() ? 0 : 1;
      ledger->update(forcing_->pseudo_inverse_shift(*control, comp), dt_);
      applied = control;
    } else {
      ledger->advance(dt_);
    }
  } else {
    applied = control;
  }

  if (scheme() == Scheme::ExponentialEM) {
    step_fluid(state, dW, applied);
  } else {
    step_wave(state, dW, aux, applied);
  }
  if (!state.all_finite()) {
    throw DivergedTrajectory("non-finite coefficient after the step starting at t = " + std::to_string(t), t);
  }
}

void Stepper::step_fluid(SpectralField& state, std::span<const double> dW, const SpectralField* control) const {
  const std::size_t n = grid_.size();
  auto s = state.component(0);
  // The transport term is kept with its sign flipped: drift = -adv + body + control.
  SpectralField adv;
  if (spec_.advection) {
    if (spec_.kind == ModelKind::EulerVoigt) {
      const SpectralField smooth = fractional_laplacian(state, -spec_.alpha);
      adv = advect_by_vorticity(smooth, smooth);
    } else {
      adv = advect_by_vorticity(state, state);
    }
    adv(0, 0) = 0.0;
  }
  const Complex* a = adv.empty() ? nullptr : adv.component(0).data();
  const Complex* body = spec_.body_force.empty() ? nullptr : spec_.body_force.component(0).data();
  const Complex* g = control ? control->component(0).data() : nullptr;
  for (std::size_t i = 0; i < n; ++i) {
    Complex d = 0.0;
    if (a) d -= a[i];
    if (body) d += body[i];
    if (g) d += g[i];
    s[i] = decay_[i] * s[i] + drift_weight_[i] * d;
  }
  if (forcing_) {
    for (int j = 0; j < forcing_->size(); ++j) {
      const double w = dW[static_cast<std::size_t>(j)];
      const SpectralField& rho = forcing_->direction(j);
      for (const std::size_t i : noise_support_[static_cast<std::size_t>(j)]) s[i] += noise_weight_[i] * w * rho(0, i);
    }
  }
}

void Stepper::step_wave(SpectralField& state, std::span<const double> dW, std::span<const double> aux,
                        const SpectralField* control) const {
  if (forcing_ && static_cast<int>(aux.size()) != auxiliary_count()) {
    throw InvalidArgument("wave step: wrong number of auxiliary normals");
  }
  const std::size_t n = grid_.size();
  const bool drift_on = has_explicit_drift(spec_) || control;
  SpectralField drift = has_explicit_drift(spec_) ? explicit_drift(spec_, state) : SpectralField(grid_, 2);
  if (control) drift += *control;
  for (std::size_t i = 0; i < n; ++i) {
    const Complex u = state(0, i), v = state(1, i);
    const Eigen::Matrix2d& e = propagator_[i];
    Complex nu = e(0, 0) * u + e(0, 1) * v;
    Complex nv = e(1, 0) * u + e(1, 1) * v;
    if (drift_on) {
      const Eigen::Matrix2d& p = integrated_[i];
      const Complex bu = drift(0, i), bv = drift(1, i);
      nu += p(0, 0) * bu + p(0, 1) * bv;
      nv += p(1, 0) * bu + p(1, 1) * bv;
    }
    state(0, i) = nu;
    state(1, i) = nv;
  }
  for (std::size_t j = 0; j < wave_dirs_.size(); ++j) {
    const WaveDirection& wd = wave_dirs_[j];
    const Eigen::Vector2d zeta =
        noise_mean_[wd.index] * dW[j] + noise_chol_[wd.index] * Eigen::Vector2d(aux[2 * j], aux[2 * j + 1]);
    state(0, wd.index) += wd.value * zeta(0);
    state(1, wd.index) += wd.value * zeta(1);
    state(0, wd.conj_index) += std::conj(wd.value) * zeta(0);
    state(1, wd.conj_index) += std::conj(wd.value) * zeta(1);
  }
}

void step_exponential_em(const Stepper& stepper, SpectralField& state, std::span<const double> dW,
                         GirsanovLedger* ledger, const SpectralField* control, double t) {
  if (stepper.scheme() != Scheme::ExponentialEM) throw InvalidArgument("step_exponential_em: not a fluid model");
  stepper.step(state, dW, {}, ledger, control, t);
}

void step_wave_block(const Stepper& stepper, SpectralField& state, std::span<const double> dW,
                     std::span<const double> aux, GirsanovLedger* ledger, const SpectralField* control, double t) {
  if (stepper.scheme() != Scheme::WaveBlock) throw InvalidArgument("step_wave_block: not the wave model");
  stepper.step(state, dW, aux, ledger, control, t);
}

double cfl_number(const ModelSpec& spec, const SpectralField& state, double dt) {
  if (!spec.is_fluid() || !spec.advection) return 0.0;
  const Grid& g = state.grid();
  const SpectralField adv = spec.kind == ModelKind::EulerVoigt ? fractional_laplacian(state, -spec.alpha) : state;
  const SpectralField u = biot_savart(adv);
  const auto u1 = to_physical(u, 0);
  const auto u2 = to_physical(u, 1);
  double peak = 0.0;
  for (std::size_t j = 0; j < u1.size(); ++j) peak = std::max(peak, std::abs(u1[j]) + std::abs(u2[j]));
  const double dx = 2.0 * std::numbers::pi / std::max(g.modes_x(), g.modes_y());
  return dt * peak / dx;
}

}  // namespace ergc
