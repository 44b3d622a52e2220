#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "qpa/metrics.hpp"

using namespace qpa;
using Catch::Matchers::WithinAbs;

// Expected values in this file were frozen from an arbitrary-precision
// evaluation (50-digit mpmath) of the same closed-form definitions.

TEST_CASE("binary entropy anchors", "[metrics]") {
  REQUIRE_THAT(binary_entropy(0.0), WithinAbs(0.0, 1e-15));
  REQUIRE_THAT(binary_entropy(1.0), WithinAbs(0.0, 1e-15));
  REQUIRE_THAT(binary_entropy(0.5), WithinAbs(1.0, 1e-15));
  REQUIRE_THAT(binary_entropy(0.11), WithinAbs(0.49991595816452800, 1e-13));
  REQUIRE_THAT(binary_entropy(0.25), WithinAbs(0.81127812445913286, 1e-13));
  REQUIRE_THAT(binary_entropy(0.01), WithinAbs(0.080793135895911173, 1e-13));
  REQUIRE_THAT(binary_entropy(0.001), WithinAbs(0.011407757737461136, 1e-13));
  SECTION("symmetry") {
    for (double x : {0.01, 0.2, 0.37}) {
      REQUIRE_THAT(binary_entropy(x), WithinAbs(binary_entropy(1.0 - x), 1e-14));
    }
  }
  SECTION("domain") {
    REQUIRE_THROWS_AS(binary_entropy(-0.01), std::invalid_argument);
    REQUIRE_THROWS_AS(binary_entropy(1.01), std::invalid_argument);
  }
}

TEST_CASE("key fraction clamps at zero", "[metrics]") {
  REQUIRE_THAT(devetak_winter(QberPair{0.0, 0.0}), WithinAbs(1.0, 1e-15));
  REQUIRE_THAT(devetak_winter(QberPair{0.05, 0.05}), WithinAbs(0.42720608576808774, 1e-13));
  REQUIRE_THAT(devetak_winter(QberPair{0.2, 0.2}), WithinAbs(0.0, 1e-15));
  REQUIRE_THAT(devetak_winter(QberPair{0.5, 0.0}), WithinAbs(0.0, 1e-15));
}

TEST_CASE("noiseless strategy rates", "[metrics]") {
  const QberPair clean{0.0, 0.0};
  REQUIRE_THAT(key_rate_noisy(clean, clean), WithinAbs(1.5, 1e-15));
  REQUIRE_THAT(key_rate_qpa(1.0, clean), WithinAbs(0.5, 1e-15));
  REQUIRE_THAT(gain(0.5, 1.5), WithinAbs(-1.0, 1e-15));
}

TEST_CASE("zero yield forces a zero distilled rate", "[metrics]") {
  REQUIRE_THAT(key_rate_qpa(0.0, QberPair{0.0, 0.0}), WithinAbs(0.0, 0.0));
  REQUIRE_THAT(key_rate_qpa(1e-13, QberPair{0.0, 0.0}), WithinAbs(0.0, 0.0));
  QpaOutcome undefined_outcome;
  undefined_outcome.yield = 0.0;
  undefined_outcome.output_defined = false;
  REQUIRE_THAT(key_rate_qpa(undefined_outcome), WithinAbs(0.0, 0.0));
}

TEST_CASE("per-DOF thresholds", "[metrics]") {
  // Frozen bisection-oracle roots of the respective unclamped key fractions.
  REQUIRE_THAT(threshold_pol(), WithinAbs(0.11002786443835955, 1e-10));
  REQUIRE_THAT(threshold_et(), WithinAbs(0.15135891202198484, 1e-10));
  REQUIRE(threshold_et() > threshold_pol());
  SECTION("rates vanish just above and survive just below") {
    const double eps = 1e-6;
    REQUIRE(devetak_winter(QberPair{threshold_pol() - eps, threshold_pol() - eps}) > 0.0);
    REQUIRE(devetak_winter(QberPair{threshold_pol() + eps, threshold_pol() + eps}) == 0.0);
    const double qt = threshold_et();
    REQUIRE(devetak_winter(QberPair{qt - eps, (qt - eps) / 2.0}) > 0.0);
    REQUIRE(devetak_winter(QberPair{qt + eps, (qt + eps) / 2.0}) == 0.0);
  }
}

TEST_CASE("full report at the reference point p = q = 0.1", "[metrics]") {
  const KeyRateReport r = evaluate_point(NoiseParams{0.1, 0.1, 0.0, 0.0});
  REQUIRE_THAT(r.pol.e_z, WithinAbs(0.1, 1e-12));
  REQUIRE_THAT(r.pol.e_x, WithinAbs(0.1, 1e-12));
  REQUIRE_THAT(r.et.e_z, WithinAbs(0.1, 1e-12));
  REQUIRE_THAT(r.et.e_x, WithinAbs(0.05, 1e-12));
  REQUIRE_THAT(r.k_pol, WithinAbs(0.062008812821437558, 1e-12));
  REQUIRE_THAT(r.k_et, WithinAbs(0.24460744929476265, 1e-12));
  REQUIRE_THAT(r.k_noisy, WithinAbs(0.18431253746881888, 1e-12));
  REQUIRE_THAT(r.yield, WithinAbs(0.82, 1e-12));
  REQUIRE_THAT(r.post_pol.e_z, WithinAbs(0.012195121951219513, 1e-12));
  REQUIRE_THAT(r.post_pol.e_x, WithinAbs(0.0060975609756097561, 1e-12));
  REQUIRE_THAT(r.k_qpa, WithinAbs(0.34905333023060849, 1e-12));
  REQUIRE_THAT(r.gain, WithinAbs(0.16474079276178961, 1e-12));
  REQUIRE(r.region == Region::IV);
}

TEST_CASE("full report at p = q = 0.2", "[metrics]") {
  const KeyRateReport r = evaluate_point(NoiseParams{0.2, 0.2, 0.0, 0.0});
  REQUIRE_THAT(r.k_noisy, WithinAbs(0.0, 1e-15));
  REQUIRE_THAT(r.yield, WithinAbs(0.68, 1e-12));
  REQUIRE_THAT(r.k_qpa, WithinAbs(0.16517532733805884, 1e-12));
  REQUIRE_THAT(r.gain, WithinAbs(0.16517532733805884, 1e-12));
  REQUIRE(r.region == Region::I);
}

TEST_CASE("region classification covers all five labels", "[metrics]") {
  auto region_at = [](double p, double q) {
    return evaluate_point(NoiseParams{p, q, 0.0, 0.0}).region;
  };
  REQUIRE(region_at(0.0, 0.0) == Region::None);   // distillation loses here
  REQUIRE(region_at(0.2, 0.2) == Region::I);      // neither DOF keys alone
  REQUIRE(region_at(0.10, 0.2) == Region::II);    // only polarisation keys
  REQUIRE(region_at(0.15, 0.1) == Region::III);   // only energy-time keys
  REQUIRE(region_at(0.105, 0.15) == Region::IV);  // both key, QPA still wins
}

TEST_CASE("classification uses clamped rates with exact zero tests", "[metrics]") {
  KeyRateReport r;
  r.gain = 0.0;
  REQUIRE(classify_region(r) == Region::None);  // ties resolve to NONE
  r.gain = 0.1;
  r.k_pol = 0.0;
  r.k_et = 0.0;
  REQUIRE(classify_region(r) == Region::I);
  r.k_pol = 0.2;
  REQUIRE(classify_region(r) == Region::II);
  r.k_pol = 0.0;
  r.k_et = 0.3;
  REQUIRE(classify_region(r) == Region::III);
  r.k_pol = 0.2;
  REQUIRE(classify_region(r) == Region::IV);
  // A rate at the tolerance floor counts as zero (threshold-line ties).
  r.k_pol = 1e-13;
  r.k_et = 0.0;
  REQUIRE(classify_region(r) == Region::I);
}

TEST_CASE("region names round-trip", "[metrics]") {
  for (Region r : {Region::None, Region::I, Region::II, Region::III, Region::IV}) {
    REQUIRE(region_from_name(region_name(r)) == r);
  }
  REQUIRE_THROWS_AS(region_from_name("V"), std::invalid_argument);
}

TEST_CASE("gain field has no grid-scale discontinuities", "[metrics]") {
  // Neighbouring default-grid points differ by less than 0.1 bits. The
  // steepest step sits at the p = 0 edge, where the entropy slope diverges;
  // its measured value is 0.0883, so a genuine branch discontinuity (which
  // would jump by O(0.2) or more) still fails this bound.
  const double step = 0.005;
  const int n = 81;
  std::vector<double> g(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      g[static_cast<std::size_t>(i) * n + j] =
          evaluate_point(NoiseParams{i * step, j * step, 0.0, 0.0}).gain;
    }
  }
  double max_step = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i + 1 < n) {
        max_step = std::max(max_step, std::abs(g[static_cast<std::size_t>(i + 1) * n + j] -
                                               g[static_cast<std::size_t>(i) * n + j]));
      }
      if (j + 1 < n) {
        max_step = std::max(max_step, std::abs(g[static_cast<std::size_t>(i) * n + j + 1] -
                                               g[static_cast<std::size_t>(i) * n + j]));
      }
    }
  }
  REQUIRE(max_step < 0.1);
}

TEST_CASE("intrinsic label noise only hurts", "[metrics]") {
  const KeyRateReport clean = evaluate_point(NoiseParams{0.05, 0.05, 0.0, 0.0});
  const KeyRateReport noisy = evaluate_point(NoiseParams{0.05, 0.05, 0.03, 0.03});
  REQUIRE(noisy.k_noisy < clean.k_noisy);
  REQUIRE(noisy.k_qpa < clean.k_qpa);
}
