#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace ergc {

/// Philox4x32-10 block function (Salmon et al., SC'11). Counter-based: output
/// is a pure function of (counter, key), so any draw can be addressed directly.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter, std::array<std::uint32_t, 2> key);

/// Reproducible Wiener increments for one replica.
///
/// The normal with index `i` of channel `ch` at fine step `n` comes from the
/// Philox block with key `seed` and counter `(i/2, n_lo, n_hi | ch << 24, replica)`,
/// turned into a pair of normals by Box–Muller. Distinct replicas and channels
/// therefore read disjoint counter ranges of one keyed permutation.
/// Channel 0 drives the Wiener increments, channel 1 the auxiliary normals of
/// the wave scheme; higher channels are free for initial conditions.
///
/// With `substeps = S`, step `n` of size `dt` sums the fine normals
/// `n·S, …, n·S + S - 1` scaled by `sqrt(dt / S)`, so a path at `dt` and a path
/// at `dt / S` with one substep share the same Brownian motion.
class NoisePath {
 public:
  NoisePath(std::uint64_t seed, std::uint32_t replica_id, double dt, int substeps = 1);

  std::uint64_t seed() const { return seed_; }
  std::uint32_t replica_id() const { return replica_; }
  double dt() const { return dt_; }
  int substeps() const { return substeps_; }
  std::uint64_t step() const { return step_; }

  /// Increments of the current step (length d, variance dt each); advances the step counter.
  std::vector<double> sample_increments(int d);
  /// Increments of an arbitrary step without touching the counter.
  std::vector<double> increments_at(std::uint64_t step, int d) const;
  /// Unit-variance normals of the auxiliary channel for `step` (single-substep paths only).
  std::vector<double> auxiliary_normals_at(std::uint64_t step, int d) const;

  /// Standard normal number `index` of channel `channel` at fine step `fine_step`.
  double standard_normal(std::uint32_t channel, std::uint64_t fine_step, std::uint32_t index) const;

 private:
  std::uint64_t seed_;
  std::uint32_t replica_;
  double dt_;
  int substeps_;
  std::uint64_t step_ = 0;
};

}  // namespace ergc
