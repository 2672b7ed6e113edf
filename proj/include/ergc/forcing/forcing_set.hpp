#pragma once

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ergc/spectral/field.hpp"
#include "ergc/spectral/operators.hpp"

namespace ergc {

/// How a direction's |σ_k|² is measured.
enum class ForcingKind {
  Vorticity,  ///< directions are curls ρ_k; σ_k = biot_savart(ρ_k) is the velocity forcing
  Direct,     ///< directions act on the prognostic variable itself (wave model)
};

/// Amplitude per |k|² shell; shells not listed use `fallback`.
struct ShellAmplitudes {
  double fallback = 1.0;
  std::map<int, double> by_norm_sq;

  double operator()(int norm_sq) const {
    const auto it = by_norm_sq.find(norm_sq);
    return it == by_norm_sq.end() ? fallback : it->second;
  }
};

/// The forced directions and the bookkeeping around them.
///
/// Directions live in the prognostic variable (vorticity for the fluid models,
/// the v-equation for the wave). The noise field of a step is `Σ_j ρ_j ΔW_j`.
class ForcingSet {
 public:
  ForcingSet() = default;
  ForcingSet(std::vector<SpectralField> directions, ForcingKind kind);

  /// `a·cos(k·x)` and `a·sin(k·x)` for every k in the upper half-plane with `0 < |k|² <= max_norm_sq`.
  static ForcingSet canonical_fluid(const Grid& grid, int max_norm_sq, const ShellAmplitudes& amplitude);
  /// `a·sin(j x)` for `j = 1..max_mode` on the one-dimensional grid.
  static ForcingSet canonical_wave(const Grid& grid, int max_mode, const ShellAmplitudes& amplitude);

  int size() const { return static_cast<int>(directions_.size()); }
  ForcingKind kind() const { return kind_; }
  const Grid& grid() const { return grid_; }
  const SpectralField& direction(int j) const { return directions_[static_cast<std::size_t>(j)]; }

  /// |σ|² = Σ_j ‖σ_j‖²_{L²}, with σ_j the velocity for vorticity directions.
  double sigma_norm_sq() const { return sigma_norm_sq_; }
  const std::vector<double>& sigma_norms_sq() const { return per_direction_sq_; }
  /// ‖ρ_j‖²_{L²} in the prognostic variable.
  const std::vector<double>& direction_norms_sq() const { return direction_sq_; }

  /// Direction indices touching a given storage index (either member of a conjugate pair).
  std::span<const int> directions_at(std::size_t index) const;

  /// `out(component) += Σ_j weights[j]·ρ_j`.
  void accumulate(std::span<const double> weights, SpectralField& out, int component = 0) const;

  /// Coefficients h with `Σ h_j ρ_j = G` (on `component` of G).
  /// Throws RangeViolation when the residual exceeds 1e-10·‖G‖.
  std::vector<double> pseudo_inverse_shift(const SpectralField& G, int component = 0) const;

  /// Modes with `|k| <= k_c` whose cosine (fluids) or sine test field the directions do not span.
  std::vector<Wavenumber> uncovered_modes(const GalerkinCutoff& cutoff) const;
  /// Throws ConfigError keyed at `key_path` if any retained mode is uncovered.
  void require_coverage(const GalerkinCutoff& cutoff, const std::string& key_path = "control.cutoff") const;

 private:
  struct Entry {
    std::size_t index;
    Complex value;
  };
  double dot(int j, std::span<const Complex> g) const;

  Grid grid_;
  ForcingKind kind_ = ForcingKind::Vorticity;
  std::vector<SpectralField> directions_;
  std::vector<std::vector<Entry>> support_;
  std::vector<std::vector<int>> by_index_;
  std::vector<double> per_direction_sq_;
  std::vector<double> direction_sq_;
  double sigma_norm_sq_ = 0.0;
  Eigen::LDLT<Eigen::MatrixXd> gram_;
};

}  // namespace ergc
