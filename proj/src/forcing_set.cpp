#include "ergc/forcing/forcing_set.hpp"

#include <algorithm>
#include <cmath>

#include "ergc/error.hpp"

namespace ergc {

namespace {

// Upper half-plane of the lattice, sorted by shell then by k.
std::vector<Wavenumber> half_plane(const Grid& grid, int max_norm_sq) {
  std::vector<Wavenumber> out;
  const int h1 = grid.modes_x() / 2 - 1;
  const int h2 = grid.dims() == 1 ? 0 : grid.modes_y() / 2 - 1;
  for (int k1 = 0; k1 <= h1; ++k1) {
    for (int k2 = -h2; k2 <= h2; ++k2) {
      if (k1 == 0 && k2 <= 0) continue;
      const Wavenumber k{k1, k2};
      if (k.norm_sq() <= max_norm_sq) out.push_back(k);
    }
  }
  std::stable_sort(out.begin(), out.end(), [](Wavenumber a, Wavenumber b) { return a.norm_sq() < b.norm_sq(); });
  return out;
}

}  // namespace

ForcingSet::ForcingSet(std::vector<SpectralField> directions, ForcingKind kind)
    : kind_(kind), directions_(std::move(directions)) {
  if (directions_.empty()) throw InvalidArgument("forcing set: no directions");
  grid_ = directions_.front().grid();
  by_index_.assign(grid_.size(), {});
  const int d = size();
  for (int j = 0; j < d; ++j) {
    const SpectralField& rho = directions_[static_cast<std::size_t>(j)];
    if (rho.grid() != grid_ || rho.components() != 1) {
      throw GridMismatch("forcing set: directions must be scalar fields on one grid");
    }
    if (!rho.is_mean_zero()) throw MeanZeroViolation("forcing set: direction has a nonzero mean");
    std::vector<Entry> entries;
    for (std::size_t i = 0; i < grid_.size(); ++i) {
      if (rho(0, i) == Complex(0.0)) continue;
      entries.push_back({i, rho(0, i)});
      by_index_[i].push_back(j);
    }
    support_.push_back(std::move(entries));
    direction_sq_.push_back(std::pow(sobolev_norm(rho, 0.0), 2));
    per_direction_sq_.push_back(kind_ == ForcingKind::Vorticity ? std::pow(sobolev_norm(rho, -1.0), 2)
                                                                : direction_sq_.back());
  }
  for (double s : per_direction_sq_) sigma_norm_sq_ += s;

  Eigen::MatrixXd gram(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j <= i; ++j) {
      gram(i, j) = gram(j, i) = dot(i, directions_[static_cast<std::size_t>(j)].component(0));
    }
  }
  gram_.compute(gram);
  const Eigen::VectorXd diag = gram_.vectorD();
  if (gram_.info() != Eigen::Success || diag.minCoeff() <= 1e-12 * diag.maxCoeff()) {
    throw InvalidArgument("forcing set: directions are linearly dependent");
  }
}

ForcingSet ForcingSet::canonical_fluid(const Grid& grid, int max_norm_sq, const ShellAmplitudes& amplitude) {
  if (grid.dims() != 2) throw InvalidArgument("canonical fluid forcing needs a two-dimensional grid");
  std::vector<SpectralField> dirs;
  for (const Wavenumber k : half_plane(grid, max_norm_sq)) {
    const double a = amplitude(k.norm_sq());
    if (a == 0.0) continue;
    SpectralField c(grid), s(grid);
    c.set_mode(k, {0.5 * a, 0.0});
    s.set_mode(k, {0.0, -0.5 * a});
    dirs.push_back(std::move(c));
    dirs.push_back(std::move(s));
  }
  return ForcingSet(std::move(dirs), ForcingKind::Vorticity);
}

ForcingSet ForcingSet::canonical_wave(const Grid& grid, int max_mode, const ShellAmplitudes& amplitude) {
  if (grid.dims() != 1) throw InvalidArgument("canonical wave forcing needs a one-dimensional grid");
  if (max_mode >= grid.modes_x() / 2) throw InvalidArgument("canonical wave forcing: max_mode beyond the grid");
  std::vector<SpectralField> dirs;
  for (int j = 1; j <= max_mode; ++j) {
    const double a = amplitude(j * j);
    if (a == 0.0) continue;
    SpectralField s(grid);
    s.set_mode({j, 0}, {0.0, -0.5 * a});
    dirs.push_back(std::move(s));
  }
  return ForcingSet(std::move(dirs), ForcingKind::Direct);
}

std::span<const int> ForcingSet::directions_at(std::size_t index) const { return by_index_.at(index); }

double ForcingSet::dot(int j, std::span<const Complex> g) const {
  double s = 0.0;
  for (const Entry& e : support_[static_cast<std::size_t>(j)]) {
    s += e.value.real() * g[e.index].real() + e.value.imag() * g[e.index].imag();
  }
  return grid_.volume() * s;
}

void ForcingSet::accumulate(std::span<const double> weights, SpectralField& out, int component) const {
  if (static_cast<int>(weights.size()) != size()) throw InvalidArgument("forcing set: weight count differs from d");
  if (out.grid() != grid_) throw GridMismatch("forcing set: accumulate on a different grid");
  auto target = out.component(component);
  for (std::size_t j = 0; j < weights.size(); ++j) {
    const double w = weights[j];
    if (w == 0.0) continue;
    for (const Entry& e : support_[j]) target[e.index] += w * e.value;
  }
}

std::vector<double> ForcingSet::pseudo_inverse_shift(const SpectralField& G, int component) const {
  if (G.grid() != grid_) throw GridMismatch("pseudo_inverse_shift: grid differs from the forcing grid");
  const int d = size();
  const auto g = G.component(component);
  Eigen::VectorXd b(d);
  for (int j = 0; j < d; ++j) b(j) = dot(j, g);
  const Eigen::VectorXd h = gram_.solve(b);

  std::vector<Complex> residual(g.begin(), g.end());
  for (int j = 0; j < d; ++j) {
    for (const Entry& e : support_[static_cast<std::size_t>(j)]) residual[e.index] -= h(j) * e.value;
  }
  double r2 = 0.0, g2 = 0.0;
  for (std::size_t i = 0; i < residual.size(); ++i) {
    r2 += std::norm(residual[i]);
    g2 += std::norm(g[i]);
  }
  if (r2 > 1e-20 * g2) {
    const double rel = std::sqrt(r2 / g2);
    throw RangeViolation("pseudo_inverse_shift: control leaves the range of the forcing (relative residual " +
                             std::to_string(rel) + ")",
                         rel);
  }
  return {h.data(), h.data() + d};
}

std::vector<Wavenumber> ForcingSet::uncovered_modes(const GalerkinCutoff& cutoff) const {
  std::vector<Wavenumber> missing;
  const int max_sq = static_cast<int>(std::floor(cutoff.cutoff() * cutoff.cutoff() * (1.0 + 1e-12)));
  for (const Wavenumber k : half_plane(grid_, max_sq)) {
    if (!cutoff.keeps(k.norm_sq())) continue;
    std::vector<Complex> tests;
    if (grid_.dims() == 2) tests.emplace_back(0.5, 0.0);
    tests.emplace_back(0.0, -0.5);
    for (const Complex value : tests) {
      SpectralField probe(grid_);
      probe.set_mode(k, value);
      try {
        (void)pseudo_inverse_shift(probe);
      } catch (const RangeViolation&) {
        missing.push_back(k);
        break;
      }
    }
  }
  return missing;
}

void ForcingSet::require_coverage(const GalerkinCutoff& cutoff, const std::string& key_path) const {
  const auto missing = uncovered_modes(cutoff);
  if (missing.empty()) return;
  const Wavenumber k = missing.front();
  throw ConfigError(key_path, "cutoff retains mode (" + std::to_string(k.k1) + ", " + std::to_string(k.k2) +
                                  ") that no forcing direction reaches; the coupling needs Range(σ) ⊃ H_N (" +
                                  std::to_string(missing.size()) + " uncovered modes)");
}

}  // namespace ergc
