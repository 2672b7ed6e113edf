#include <cmath>
#include <random>

#include "doctest.h"
#include "ergc/error.hpp"
#include "ergc/forcing/forcing_set.hpp"
#include "ergc/forcing/girsanov_ledger.hpp"
#include "ergc/forcing/noise_path.hpp"
#include "test_support.hpp"

using namespace ergc;

TEST_CASE("philox known-answer vectors") {
  using A4 = std::array<std::uint32_t, 4>;
  CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) == A4{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}) ==
        A4{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}) ==
        A4{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("noise path determinism and variance") {
  NoisePath a(42, 3, 0.01), b(42, 3, 0.01);
  for (int n = 0; n < 5; ++n) CHECK(a.sample_increments(7) == b.sample_increments(7));
  CHECK(a.step() == 5);
  CHECK(NoisePath(42, 3, 0.01).increments_at(4, 7) == b.increments_at(4, 7));
  CHECK(NoisePath(42, 4, 0.01).increments_at(4, 7) != b.increments_at(4, 7));
  CHECK_THROWS_AS(NoisePath(1, 0, 0.0), InvalidArgument);

  const double dt = 1e-3;
  NoisePath p(7, 0, dt), q(7, 1, dt);
  const int n = 100000;
  double sp = 0, sq = 0, spp = 0, sqq = 0, spq = 0;
  for (int i = 0; i < n; ++i) {
    const double x = p.sample_increments(1)[0];
    const double y = q.sample_increments(1)[0];
    sp += x, sq += y, spp += x * x, sqq += y * y, spq += x * y;
  }
  const double var_p = spp / n - (sp / n) * (sp / n);
  const double var_q = sqq / n - (sq / n) * (sq / n);
  CHECK(std::abs(var_p / dt - 1.0) < 0.05);
  CHECK(std::abs(var_q / dt - 1.0) < 0.05);
  const double corr = (spq / n - (sp / n) * (sq / n)) / std::sqrt(var_p * var_q);
  CHECK(std::abs(corr) < 0.02);
}

TEST_CASE("components of one step are uncorrelated") {
  NoisePath p(11, 0, 1.0);
  const int n = 50000;
  double s01 = 0, s12 = 0, s00 = 0;
  for (int i = 0; i < n; ++i) {
    const auto w = p.sample_increments(3);
    s01 += w[0] * w[1];
    s12 += w[1] * w[2];
    s00 += w[0] * w[0];
  }
  CHECK(std::abs(s01 / n) < 0.02);
  CHECK(std::abs(s12 / n) < 0.02);
  CHECK(std::abs(s00 / n - 1.0) < 0.05);
}

TEST_CASE("substeps share the fine Brownian path") {
  NoisePath coarse(5, 2, 0.02, 4), fine(5, 2, 0.005);
  for (int n = 0; n < 10; ++n) {
    const auto c = coarse.sample_increments(3);
    std::vector<double> sum(3, 0.0);
    for (int s = 0; s < 4; ++s) {
      const auto f = fine.sample_increments(3);
      for (int j = 0; j < 3; ++j) sum[j] += f[j];
    }
    for (int j = 0; j < 3; ++j) CHECK(c[j] == doctest::Approx(sum[j]).epsilon(1e-13));
  }
  CHECK_THROWS_AS((void)coarse.auxiliary_normals_at(0, 2), InvalidArgument);
  const auto aux = fine.auxiliary_normals_at(3, 2);
  CHECK(aux != fine.increments_at(3, 2));
}

TEST_CASE("canonical fluid forcing") {
  const Grid g(32, 32);
  const ForcingSet f = ForcingSet::canonical_fluid(g, 2, ShellAmplitudes{1.0, {}});
  CHECK(f.size() == 8);
  double sum = 0.0;
  for (double s : f.sigma_norms_sq()) sum += s;
  CHECK(std::abs(f.sigma_norm_sq() - sum) < 1e-12 * sum);
  // a cos(k·x) vorticity with |k|² = m has velocity L² norm² 2π² a² / m.
  const double pi2 = std::numbers::pi * std::numbers::pi;
  CHECK(f.sigma_norm_sq() == doctest::Approx(4 * 2 * pi2 + 4 * pi2).epsilon(1e-14));
  CHECK(f.directions_at(g.index_of({1, 0})).size() == 2);
  CHECK(f.directions_at(g.index_of({-1, 0})).size() == 2);
  CHECK(f.directions_at(g.index_of({2, 0})).empty());

  const ForcingSet shaped = ForcingSet::canonical_fluid(g, 2, ShellAmplitudes{1.0, {{2, 0.5}}});
  CHECK(shaped.sigma_norms_sq().back() == doctest::Approx(2 * pi2 * 0.25 / 2).epsilon(1e-14));
}

TEST_CASE("pseudo-inverse shift") {
  const Grid g(32, 32);
  const ForcingSet f = ForcingSet::canonical_fluid(g, 5, ShellAmplitudes{1.0, {{2, 0.3}, {5, 2.0}}});
  for (double h : f.pseudo_inverse_shift(SpectralField(g))) CHECK(h == 0.0);

  const auto h2 = f.pseudo_inverse_shift(2.0 * f.direction(0));
  CHECK(h2[0] == doctest::Approx(2.0).epsilon(1e-14));
  for (std::size_t j = 1; j < h2.size(); ++j) CHECK(std::abs(h2[j]) < 1e-14);

  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<double> w(static_cast<std::size_t>(f.size()));
    for (double& x : w) x = normal(rng);
    SpectralField G(g);
    f.accumulate(w, G);
    const auto h = f.pseudo_inverse_shift(G);
    SpectralField back(g);
    f.accumulate(h, back);
    CHECK(test::max_abs_diff(back, G) < 1e-12 * test::max_abs(G));
  }

  SpectralField outside(g);
  outside.set_mode({3, 0}, 1.0);
  CHECK_THROWS_AS((void)f.pseudo_inverse_shift(outside), RangeViolation);
  try {
    (void)f.pseudo_inverse_shift(outside + f.direction(1));
  } catch (const RangeViolation& e) {
    CHECK(e.relative_residual() > 0.1);
  }
}

TEST_CASE("coverage of the galerkin cutoff") {
  const Grid g(32, 32);
  const ForcingSet f = ForcingSet::canonical_fluid(g, 2, ShellAmplitudes{});
  CHECK(f.uncovered_modes(GalerkinCutoff(std::sqrt(2.0), 2)).empty());
  CHECK(f.uncovered_modes(GalerkinCutoff(2.0, 2)).size() == 2);
  CHECK_THROWS_AS(f.require_coverage(GalerkinCutoff(2.0, 2)), ConfigError);
  try {
    f.require_coverage(GalerkinCutoff(2.0, 2));
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("Range(σ) ⊃ H_N") != std::string::npos);
  }

  const Grid line(128, 1);
  const ForcingSet w = ForcingSet::canonical_wave(line, 6, ShellAmplitudes{});
  CHECK(w.size() == 6);
  CHECK(w.uncovered_modes(GalerkinCutoff(6.0, 1)).empty());
  CHECK(w.uncovered_modes(GalerkinCutoff(7.0, 1)).size() == 1);
  CHECK(w.sigma_norm_sq() == doctest::Approx(6 * std::numbers::pi).epsilon(1e-14));
}

TEST_CASE("linearly dependent directions are rejected") {
  const Grid g(16, 16);
  SpectralField a(g);
  a.set_mode({1, 0}, 1.0);
  CHECK_THROWS_AS(ForcingSet({a, 2.0 * a}, ForcingKind::Vorticity), InvalidArgument);
  SpectralField mean(g);
  mean(0, 0) = 1.0;
  CHECK_THROWS_AS(ForcingSet({mean}, ForcingKind::Vorticity), MeanZeroViolation);
}

TEST_CASE("girsanov ledger") {
  GirsanovLedger l(1.0);
  const std::vector<double> zero{0.0, 0.0};
  const GirsanovLedger after_zero = ledger_update(l, zero, 0.5);
  CHECK(after_zero.cost() == 0.0);
  CHECK(after_zero.time() == 0.5);
  CHECK_FALSE(after_zero.stopped());

  const std::vector<double> h{1.0, 1.0};  // |h|² = 2
  l.update(h, 0.5);
  CHECK(l.cost() == 1.0);
  CHECK(l.stopped());
  CHECK(l.stop_time() == 0.5);
  l.update(h, 0.5);
  CHECK(l.cost() == 1.0);
  CHECK(l.time() == 1.0);

  const GirsanovLedger off(0.0);
  CHECK(off.stopped());
  CHECK(off.stop_time() == 0.0);
  CHECK_THROWS_AS(ledger_update(off, h, 0.0), InvalidArgument);
}

TEST_CASE("larger budgets never stop earlier") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::vector<double>> hs(500, std::vector<double>(3));
    for (auto& h : hs)
      for (double& x : h) x = normal(rng);
    GirsanovLedger a(5.0), b(10.0);
    for (const auto& h : hs) {
      a.update(h, 0.01);
      b.update(h, 0.01);
      CHECK(a.invariant_holds());
      CHECK(b.invariant_holds());
      CHECK(b.cost() >= a.cost());
    }
    if (b.stopped()) {
      REQUIRE(a.stopped());
      CHECK(*b.stop_time() >= *a.stop_time());
    }
  }
}
