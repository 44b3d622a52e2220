#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>

#include "qpa/metrics.hpp"

namespace qpa {

// Two-sided 95% normal quantile, frozen so intervals are bit-stable.
inline constexpr double kWilsonZ95 = 1.9599639845400543;

// SplitMix64 finaliser. Used to spread a master seed over independent
// sub-streams without correlations between adjacent indices.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_stream_seed(std::uint64_t master, std::uint64_t stream_index) {
  return splitmix64(master + (stream_index + 1) * 0x9E3779B97F4A7C15ull);
}

// Deterministic uniform source. Doubles are built from the raw mt19937_64
// output, not from std distributions, so sequences are identical across
// standard libraries.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : gen_(seed) {}

  static RandomStream derived(std::uint64_t master, std::uint64_t stream_index) {
    return RandomStream(derive_stream_seed(master, stream_index));
  }

  // Uniform on [0, 1) with 53 random bits.
  double next_double() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  bool bernoulli(double p) { return next_double() < p; }

  // Multinomial category draw; zero-weight categories can never be hit.
  std::size_t categorical(const std::array<double, 4>& probs) {
    const double u = next_double();
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
      acc += probs[i];
      if (u < acc) return i;
    }
    return probs.size() - 1;
  }

 private:
  std::mt19937_64 gen_;
};

// Tally of joint outcomes 00, 01, 10, 11 from n_total measured pairs.
struct CountRecord {
  Basis basis = Basis::Z;
  std::array<std::uint64_t, 4> counts{};
  std::uint64_t n_total = 0;
};

struct McConfig {
  std::uint64_t n_pairs = 10'000;
  std::uint64_t seed = 1;
  bool apply_franson_loss = false;
};

inline CountRecord sample_counts(const DensityOperator& rho, Basis basis, std::uint64_t n,
                                 RandomStream& stream) {
  const auto probs = outcome_probabilities(rho, basis);
  CountRecord rec;
  rec.basis = basis;
  rec.n_total = n;
  for (std::uint64_t i = 0; i < n; ++i) {
    ++rec.counts[stream.categorical(probs)];
  }
  return rec;
}

// Point estimate with a Wilson score interval.
struct Estimate {
  double value = 0.0;
  double lower = 0.0;
  double upper = 1.0;
};

inline Estimate wilson_interval(std::uint64_t successes, std::uint64_t trials,
                                double z = kWilsonZ95) {
  if (trials == 0) throw std::invalid_argument("wilson_interval: no trials");
  if (successes > trials) throw std::invalid_argument("wilson_interval: successes exceed trials");
  const double n = static_cast<double>(trials);
  const double phat = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double centre = (phat + z2 / (2.0 * n)) / denom;
  const double half =
      z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n)) / denom;
  Estimate est;
  est.value = phat;
  // The score interval always contains the point estimate; at the extremes
  // centre +/- half equals phat exactly, so rounding must not exclude it.
  est.lower = std::max(0.0, std::min(centre - half, phat));
  est.upper = std::min(1.0, std::max(centre + half, phat));
  return est;
}

inline Estimate estimate_qber(const CountRecord& rec) {
  return wilson_interval(rec.counts[1] + rec.counts[2], rec.n_total);
}

// Interval estimates accompanying a sampled experiment.
struct McIntervals {
  Estimate pol_z;
  Estimate pol_x;
  Estimate et_z;
  Estimate et_x;
  Estimate yield;
  Estimate post_z;
  Estimate post_x;
};

struct McReport {
  KeyRateReport report;
  McIntervals intervals;
  CountRecord pol_z;
  CountRecord pol_x;
  CountRecord et_z;
  CountRecord et_x;
  CountRecord post_z;
  CountRecord post_x;
  std::uint64_t qpa_pairs_total = 0;   // pairs reaching the QPA stage
  std::uint64_t qpa_pairs_passed = 0;  // pairs surviving postselection
};

namespace detail {

// One measured batch with optional pair loss. Lost pairs consume exactly one
// uniform each, so sequences stay aligned whether or not loss is applied.
inline CountRecord sample_counts_with_loss(const DensityOperator& rho, Basis basis,
                                           std::uint64_t n, bool lossy, RandomStream& stream) {
  const auto probs = outcome_probabilities(rho, basis);
  CountRecord rec;
  rec.basis = basis;
  for (std::uint64_t i = 0; i < n; ++i) {
    if (lossy && !stream.bernoulli(0.5)) continue;
    ++rec.counts[stream.categorical(probs)];
    ++rec.n_total;
  }
  return rec;
}

struct QpaBatch {
  CountRecord rec;
  std::uint64_t total = 0;
  std::uint64_t passed = 0;
};

// Sampled distillation: pass/fail per pair from the two accepting branch
// probabilities, then a measured outcome from the conditional output state.
inline QpaBatch sample_qpa_batch(const QpaOutcome& outcome, Basis basis, std::uint64_t n,
                                 bool lossy, RandomStream& stream) {
  QpaBatch batch;
  batch.rec.basis = basis;
  const std::array<double, 4> probs = outcome.output_defined
                                          ? outcome_probabilities(outcome.output_pol, basis)
                                          : std::array<double, 4>{};
  const double b0 = outcome.branch_probability[0];
  const double b1 = outcome.branch_probability[1];
  for (std::uint64_t i = 0; i < n; ++i) {
    if (lossy && !stream.bernoulli(0.5)) continue;
    ++batch.total;
    const double u = stream.next_double();
    if (u >= b0 + b1) continue;
    ++batch.passed;
    ++batch.rec.counts[stream.categorical(probs)];
    ++batch.rec.n_total;
  }
  return batch;
}

}  // namespace detail

// Simulated run of the whole experiment at one noise point: counting batches
// for both DOFs and both bases, then a sampled distillation round. Streams are
// derived per batch from the master seed, so results do not depend on
// evaluation order. Rates in the returned report are computed from the
// estimated error rates and the estimated yield.
inline McReport simulate_experiment(const NoiseParams& params, const McConfig& cfg) {
  if (cfg.n_pairs == 0) throw std::invalid_argument("simulate_experiment: n_pairs must be > 0");
  const HyperState state = assemble_noisy_hyper(params);
  const QpaOutcome outcome =
      qpa_bell_algebra(BellWeights::from_state(state.pol), BellWeights::from_state(state.et));

  auto stream_for = [&](std::uint64_t idx) { return RandomStream::derived(cfg.seed, idx); };

  McReport mc;
  {
    RandomStream s = stream_for(0);
    mc.pol_z = sample_counts(state.pol, Basis::Z, cfg.n_pairs, s);
  }
  {
    RandomStream s = stream_for(1);
    mc.pol_x = sample_counts(state.pol, Basis::X, cfg.n_pairs, s);
  }
  {
    // Energy-time analysis sits behind the interferometer, so optional
    // Franson postselection loss applies here but not to polarisation.
    RandomStream s = stream_for(2);
    mc.et_z = detail::sample_counts_with_loss(state.et, Basis::Z, cfg.n_pairs,
                                              cfg.apply_franson_loss, s);
  }
  {
    RandomStream s = stream_for(3);
    mc.et_x = detail::sample_counts_with_loss(state.et, Basis::X, cfg.n_pairs,
                                              cfg.apply_franson_loss, s);
  }
  detail::QpaBatch bz;
  detail::QpaBatch bx;
  {
    RandomStream s = stream_for(4);
    bz = detail::sample_qpa_batch(outcome, Basis::Z, cfg.n_pairs, cfg.apply_franson_loss, s);
  }
  {
    RandomStream s = stream_for(5);
    bx = detail::sample_qpa_batch(outcome, Basis::X, cfg.n_pairs, cfg.apply_franson_loss, s);
  }
  mc.post_z = bz.rec;
  mc.post_x = bx.rec;
  mc.qpa_pairs_total = bz.total + bx.total;
  mc.qpa_pairs_passed = bz.passed + bx.passed;

  mc.intervals.pol_z = estimate_qber(mc.pol_z);
  mc.intervals.pol_x = estimate_qber(mc.pol_x);
  mc.intervals.et_z = mc.et_z.n_total > 0 ? estimate_qber(mc.et_z) : Estimate{};
  mc.intervals.et_x = mc.et_x.n_total > 0 ? estimate_qber(mc.et_x) : Estimate{};
  if (mc.qpa_pairs_total > 0) {
    mc.intervals.yield = wilson_interval(mc.qpa_pairs_passed, mc.qpa_pairs_total);
  }

  KeyRateReport& rep = mc.report;
  rep.pol = QberPair{mc.intervals.pol_z.value, mc.intervals.pol_x.value};
  rep.et = QberPair{mc.intervals.et_z.value, mc.intervals.et_x.value};
  rep.yield = mc.intervals.yield.value;
  rep.qpa_defined = mc.post_z.n_total > 0 && mc.post_x.n_total > 0;
  if (rep.qpa_defined) {
    mc.intervals.post_z = estimate_qber(mc.post_z);
    mc.intervals.post_x = estimate_qber(mc.post_x);
    rep.post_pol = QberPair{mc.intervals.post_z.value, mc.intervals.post_x.value};
  }
  rep.k_pol = devetak_winter(rep.pol);
  rep.k_et = devetak_winter(rep.et);
  rep.k_noisy = rep.k_pol + rep.k_et / 2.0;
  rep.k_qpa = rep.qpa_defined ? key_rate_qpa(rep.yield, rep.post_pol) : 0.0;
  rep.gain = gain(rep.k_qpa, rep.k_noisy);
  rep.region = classify_region(rep);
  return mc;
}

}  // namespace qpa
