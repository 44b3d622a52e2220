#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "qpa/montecarlo.hpp"

using namespace qpa;
using Catch::Matchers::WithinAbs;

namespace {

double sigma(double e, std::uint64_t n) {
  return std::sqrt(e * (1.0 - e) / static_cast<double>(n));
}

}  // namespace

TEST_CASE("wilson intervals match frozen oracle values", "[mc]") {
  // Frozen from a 30-digit mpmath evaluation of the score interval with
  // z = 1.9599639845400543.
  auto check = [](std::uint64_t k, std::uint64_t n, double value, double lo, double hi) {
    const Estimate e = wilson_interval(k, n);
    REQUIRE_THAT(e.value, WithinAbs(value, 1e-15));
    REQUIRE_THAT(e.lower, WithinAbs(lo, 1e-13));
    REQUIRE_THAT(e.upper, WithinAbs(hi, 1e-13));
  };
  check(50, 100, 0.5, 0.40383153036599562, 0.59616846963400438);
  check(19, 100, 0.19, 0.12514751509768735, 0.27778845379064378);
  check(0, 100, 0.0, 0.0, 0.036993498206985687);
  check(100, 100, 1.0, 0.96300650179301431, 1.0);
  check(1230, 10000, 0.123, 0.11670712450661373, 0.12958241026487642);
  SECTION("degenerate inputs are rejected") {
    REQUIRE_THROWS_AS(wilson_interval(1, 0), std::invalid_argument);
    REQUIRE_THROWS_AS(wilson_interval(5, 4), std::invalid_argument);
  }
  SECTION("interval always contains the point estimate") {
    for (std::uint64_t k : {0ull, 3ull, 77ull, 100ull}) {
      const Estimate e = wilson_interval(k, 100);
      REQUIRE(e.lower <= e.value);
      REQUIRE(e.value <= e.upper);
    }
  }
}

TEST_CASE("random streams are deterministic and index-separated", "[mc]") {
  RandomStream a = RandomStream::derived(42, 0);
  RandomStream b = RandomStream::derived(42, 0);
  RandomStream c = RandomStream::derived(42, 1);
  bool all_equal = true;
  bool any_diff_from_c = false;
  for (int i = 0; i < 1000; ++i) {
    const double va = a.next_double();
    const double vb = b.next_double();
    const double vc = c.next_double();
    all_equal = all_equal && va == vb;
    any_diff_from_c = any_diff_from_c || va != vc;
    REQUIRE(va >= 0.0);
    REQUIRE(va < 1.0);
  }
  REQUIRE(all_equal);
  REQUIRE(any_diff_from_c);
}

TEST_CASE("sampling is reproducible for a fixed seed", "[mc]") {
  const DensityOperator rho = et_mixture(0.23);
  RandomStream s1 = RandomStream::derived(7, 3);
  RandomStream s2 = RandomStream::derived(7, 3);
  const CountRecord r1 = sample_counts(rho, Basis::Z, 20000, s1);
  const CountRecord r2 = sample_counts(rho, Basis::Z, 20000, s2);
  REQUIRE(r1.counts == r2.counts);
  REQUIRE(r1.n_total == 20000);

  const NoiseParams params{0.15, 0.2, 0.0, 0.0};
  McConfig cfg;
  cfg.n_pairs = 5000;
  cfg.seed = 99;
  const McReport a = simulate_experiment(params, cfg);
  const McReport b = simulate_experiment(params, cfg);
  REQUIRE(a.pol_z.counts == b.pol_z.counts);
  REQUIRE(a.et_x.counts == b.et_x.counts);
  REQUIRE(a.post_z.counts == b.post_z.counts);
  REQUIRE(a.qpa_pairs_passed == b.qpa_pairs_passed);
  REQUIRE(a.report.gain == b.report.gain);
}

TEST_CASE("impossible outcomes are never sampled", "[mc]") {
  // pol_mixture(0) has zero weight on the anticorrelated outcomes in both
  // bases; the sampler must produce exactly zero such counts.
  const DensityOperator clean = pol_mixture(0.0);
  for (Basis basis : {Basis::Z, Basis::X}) {
    RandomStream s = RandomStream::derived(1234, basis == Basis::Z ? 0 : 1);
    const CountRecord rec = sample_counts(clean, basis, 100000, s);
    REQUIRE(rec.counts[1] == 0);
    REQUIRE(rec.counts[2] == 0);
    REQUIRE(rec.counts[0] + rec.counts[3] == 100000);
  }
}

TEST_CASE("noiseless experiment estimates are exact", "[mc]") {
  McConfig cfg;
  cfg.n_pairs = 10000;
  cfg.seed = 5;
  const McReport mc = simulate_experiment(NoiseParams{0.0, 0.0, 0.0, 0.0}, cfg);
  REQUIRE(mc.report.k_noisy == 1.5);
  REQUIRE(mc.report.yield == 1.0);
  REQUIRE(mc.report.k_qpa == 0.5);
  REQUIRE(mc.report.gain == -1.0);
  REQUIRE(mc.report.pol.e_z == 0.0);
  REQUIRE(mc.report.post_pol.e_x == 0.0);
}

TEST_CASE("estimates track analytic values within four sigma", "[mc]") {
  const NoiseParams params{0.1, 0.2, 0.0, 0.0};
  const KeyRateReport truth = evaluate_point(params);
  McConfig cfg;
  cfg.n_pairs = 100000;
  cfg.seed = 2026;
  const McReport mc = simulate_experiment(params, cfg);
  auto within = [](double est, double ref, double sd) {
    return sd == 0.0 ? est == ref : std::abs(est - ref) <= 4.0 * sd;
  };
  REQUIRE(within(mc.report.pol.e_z, truth.pol.e_z, sigma(truth.pol.e_z, cfg.n_pairs)));
  REQUIRE(within(mc.report.pol.e_x, truth.pol.e_x, sigma(truth.pol.e_x, cfg.n_pairs)));
  REQUIRE(within(mc.report.et.e_z, truth.et.e_z, sigma(truth.et.e_z, mc.et_z.n_total)));
  REQUIRE(within(mc.report.et.e_x, truth.et.e_x, sigma(truth.et.e_x, mc.et_x.n_total)));
  REQUIRE(within(mc.report.yield, truth.yield, sigma(truth.yield, mc.qpa_pairs_total)));
  REQUIRE(within(mc.report.post_pol.e_z, truth.post_pol.e_z,
                 sigma(truth.post_pol.e_z, mc.post_z.n_total)));
  REQUIRE(within(mc.report.post_pol.e_x, truth.post_pol.e_x,
                 sigma(truth.post_pol.e_x, mc.post_x.n_total)));
}

TEST_CASE("estimation error shrinks through the sample-size suite", "[mc]") {
  // Worst estimator deviation at n = 10^6 must undercut the n = 10^3 one, and
  // most steps of the suite must not increase it.
  for (const NoiseParams params : {NoiseParams{0.1, 0.1, 0.0, 0.0},
                                   NoiseParams{0.2, 0.15, 0.0, 0.0}}) {
    const KeyRateReport truth = evaluate_point(params);
    std::vector<double> worst;
    for (std::uint64_t n : {1000ull, 10000ull, 100000ull, 1000000ull}) {
      McConfig cfg;
      cfg.n_pairs = n;
      cfg.seed = 314159;
      const McReport mc = simulate_experiment(params, cfg);
      double w = 0.0;
      w = std::max(w, std::abs(mc.report.pol.e_z - truth.pol.e_z));
      w = std::max(w, std::abs(mc.report.pol.e_x - truth.pol.e_x));
      w = std::max(w, std::abs(mc.report.et.e_z - truth.et.e_z));
      w = std::max(w, std::abs(mc.report.et.e_x - truth.et.e_x));
      w = std::max(w, std::abs(mc.report.yield - truth.yield));
      w = std::max(w, std::abs(mc.report.post_pol.e_z - truth.post_pol.e_z));
      w = std::max(w, std::abs(mc.report.post_pol.e_x - truth.post_pol.e_x));
      worst.push_back(w);
    }
    REQUIRE(worst.back() < worst.front());
    int nonincreasing = 0;
    for (std::size_t i = 1; i < worst.size(); ++i) {
      if (worst[i] <= worst[i - 1]) ++nonincreasing;
    }
    REQUIRE(nonincreasing >= 2);
  }
}

TEST_CASE("wilson coverage at nominal sample size", "[mc]") {
  // 95% nominal intervals on e_z at q = 0.2 must cover the true value in at
  // least 93% of seeded trials.
  const DensityOperator rho = et_mixture(0.2);
  const double truth = 0.2;
  const int trials = 400;
  int covered = 0;
  for (int t = 0; t < trials; ++t) {
    RandomStream s = RandomStream::derived(777, static_cast<std::uint64_t>(t));
    const CountRecord rec = sample_counts(rho, Basis::Z, 10000, s);
    const Estimate e = estimate_qber(rec);
    if (e.lower <= truth && truth <= e.upper) ++covered;
  }
  REQUIRE(static_cast<double>(covered) / trials >= 0.93);
}

TEST_CASE("franson loss halves counts without biasing estimators", "[mc]") {
  const NoiseParams params{0.1, 0.2, 0.0, 0.0};
  const KeyRateReport truth = evaluate_point(params);
  McConfig cfg;
  cfg.n_pairs = 100000;
  cfg.seed = 31337;
  cfg.apply_franson_loss = true;
  const McReport mc = simulate_experiment(params, cfg);

  // Survivor counts are Binomial(n, 1/2).
  const double n = static_cast<double>(cfg.n_pairs);
  const double half_sd = std::sqrt(n * 0.25);
  REQUIRE(std::abs(static_cast<double>(mc.et_z.n_total) - n / 2.0) <= 4.0 * half_sd);
  REQUIRE(std::abs(static_cast<double>(mc.et_x.n_total) - n / 2.0) <= 4.0 * half_sd);
  REQUIRE(std::abs(static_cast<double>(mc.qpa_pairs_total) - n) <= 4.0 * half_sd * std::sqrt(2.0));

  // Estimators stay centred with and without the flag: within 3 sigma of the
  // analytic values at the realised sample sizes.
  McConfig lossless = cfg;
  lossless.apply_franson_loss = false;
  for (const McReport& run : {mc, simulate_experiment(params, lossless)}) {
    REQUIRE(std::abs(run.report.et.e_z - truth.et.e_z) <=
            3.0 * sigma(truth.et.e_z, run.et_z.n_total));
    REQUIRE(std::abs(run.report.et.e_x - truth.et.e_x) <=
            3.0 * sigma(truth.et.e_x, run.et_x.n_total));
    REQUIRE(std::abs(run.report.yield - truth.yield) <=
            3.0 * sigma(truth.yield, run.qpa_pairs_total));
    REQUIRE(std::abs(run.report.post_pol.e_z - truth.post_pol.e_z) <=
            3.0 * sigma(truth.post_pol.e_z, run.post_z.n_total));
  }

  // Polarisation batches sit before the interferometer and keep every pair.
  REQUIRE(mc.pol_z.n_total == cfg.n_pairs);
  REQUIRE(mc.pol_x.n_total == cfg.n_pairs);
}

TEST_CASE("zero pairs are rejected", "[mc]") {
  McConfig cfg;
  cfg.n_pairs = 0;
  REQUIRE_THROWS_AS(simulate_experiment(NoiseParams{0.1, 0.1, 0.0, 0.0}, cfg),
                    std::invalid_argument);
}
