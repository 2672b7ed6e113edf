#pragma once

#include "ergc/spectral/field.hpp"

namespace ergc {

/// Wavenumber-ball Galerkin split. `P_N` keeps `|k| <= cutoff`, `Q_N` the rest;
/// `lambda_N` is the first excluded eigenvalue of -Δ, i.e. the smallest lattice
/// value of `|k|²` strictly above `cutoff²`.
class GalerkinCutoff {
 public:
  GalerkinCutoff() = default;
  GalerkinCutoff(double cutoff_wavenumber, int dims);

  double cutoff() const { return cutoff_; }
  double lambda_n() const { return lambda_n_; }
  bool keeps(int norm_sq) const { return static_cast<double>(norm_sq) <= cutoff_sq_; }

 private:
  double cutoff_ = 0.0;
  double cutoff_sq_ = 0.0;
  double lambda_n_ = 1.0;
};

enum class GalerkinPart { Low, High };

/// `|k|^s`, with the conventions `|0|^0 = 1` and `|0|^s = 0` otherwise.
double sobolev_multiplier(int norm_sq, double s);

/// Multiplies coefficient k by |k|^s. Negative s needs a mean-zero field.
SpectralField fractional_laplacian(const SpectralField& f, double s);

/// Divergence-free velocity with curl equal to the scalar vorticity `xi`:
/// `û(k) = i (k₂, -k₁) ξ̂(k) / |k|²`.
SpectralField biot_savart(const SpectralField& xi);

/// Scalar curl `∂₁u₂ - ∂₂u₁` of a two-component field.
SpectralField curl(const SpectralField& u);
SpectralField divergence(const SpectralField& u);
SpectralField gradient(const SpectralField& scalar);

/// Per-mode orthogonal projection onto divergence-free fields.
SpectralField leray_project(const SpectralField& f);

/// Copy of `f` with every mode outside the 2/3-rule band set to zero.
SpectralField dealias(const SpectralField& f);

/// Spectral coefficients of `vel · ∇scalar`, formed pseudo-spectrally. With
/// `dealias_product`, both inputs and the product are truncated by the 2/3 rule.
SpectralField advect(const SpectralField& vel, const SpectralField& scalar, bool dealias_product = true);

/// `advect(biot_savart(omega), theta, true)` in one pass with reused
/// buffers; the hot path of every fluid step.
SpectralField advect_by_vorticity(const SpectralField& omega, const SpectralField& theta);

SpectralField galerkin_project(const SpectralField& f, const GalerkinCutoff& cutoff, GalerkinPart part);

/// `(Σ_k |k|^{2s} |f̂(k)|²)^{1/2}` scaled by the box volume, so that s = 0 is
/// the physical L² norm. Summed over components.
double sobolev_norm(const SpectralField& f, double s);

/// Real L² inner product over the box, summed over components.
double inner_product(const SpectralField& f, const SpectralField& g);

/// Largest `|k·û(k)| / (|k| |û(k)|)` over modes (0 for a scalar field).
double divergence_defect(const SpectralField& u);

}  // namespace ergc
