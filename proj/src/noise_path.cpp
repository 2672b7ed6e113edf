#include "ergc/forcing/noise_path.hpp"

#include <cmath>
#include <numbers>

#include "ergc/error.hpp"

namespace ergc {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

// 53-bit uniform in (0, 1].
inline double open_uniform(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
  return (static_cast<double>(bits) + 1.0) * 0x1.0p-53;
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

NoisePath::NoisePath(std::uint64_t seed, std::uint32_t replica_id, double dt, int substeps)
    : seed_(seed), replica_(replica_id), dt_(dt), substeps_(substeps) {
  if (!(dt > 0.0)) throw InvalidArgument("noise path: dt must be positive");
  if (substeps < 1) throw InvalidArgument("noise path: substeps must be >= 1");
}

double NoisePath::standard_normal(std::uint32_t channel, std::uint64_t fine_step, std::uint32_t index) const {
  if (channel > 0xffu || (fine_step >> 56) != 0) throw InvalidArgument("noise path: channel or step out of range");
  const std::array<std::uint32_t, 4> ctr{index / 2, static_cast<std::uint32_t>(fine_step),
                                         static_cast<std::uint32_t>(fine_step >> 32) | (channel << 24), replica_};
  const std::array<std::uint32_t, 2> key{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)};
  const auto x = philox4x32(ctr, key);
  const double radius = std::sqrt(-2.0 * std::log(open_uniform(x[0], x[1])));
  const double angle = 2.0 * std::numbers::pi * open_uniform(x[2], x[3]);
  return (index % 2 == 0) ? radius * std::cos(angle) : radius * std::sin(angle);
}

std::vector<double> NoisePath::increments_at(std::uint64_t step, int d) const {
  std::vector<double> out(static_cast<std::size_t>(d), 0.0);
  const double scale = std::sqrt(dt_ / substeps_);
  for (int s = 0; s < substeps_; ++s) {
    const std::uint64_t fine = step * static_cast<std::uint64_t>(substeps_) + static_cast<std::uint64_t>(s);
    for (int j = 0; j < d; ++j) out[j] += scale * standard_normal(0, fine, static_cast<std::uint32_t>(j));
  }
  return out;
}

std::vector<double> NoisePath::sample_increments(int d) { return increments_at(step_++, d); }

std::vector<double> NoisePath::auxiliary_normals_at(std::uint64_t step, int d) const {
  if (substeps_ != 1) throw InvalidArgument("noise path: auxiliary normals need a single-substep path");
  std::vector<double> out(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) out[j] = standard_normal(1, step, static_cast<std::uint32_t>(j));
  return out;
}

}  // namespace ergc
