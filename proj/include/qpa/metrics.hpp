#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

#include "qpa/protocol.hpp"

namespace qpa {

// Error rates of a qubit-pair ensemble in the two key bases.
struct QberPair {
  double e_z = 0.0;
  double e_x = 0.0;
};

// Probability that a joint measurement in the given basis anticorrelates.
inline double qber(const DensityOperator& rho, Basis basis) {
  const auto probs = outcome_probabilities(rho, basis);
  return probs[1] + probs[2];
}

inline QberPair qber_pair(const DensityOperator& rho) {
  return QberPair{qber(rho, Basis::Z), qber(rho, Basis::X)};
}

inline double binary_entropy(double x) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw std::invalid_argument("binary_entropy: argument must lie in [0, 1]");
  }
  if (x == 0.0 || x == 1.0) return 0.0;
  return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

// Asymptotic one-way key fraction for given bit and phase error rates, clamped
// at zero: a negative fraction just means no key.
inline double devetak_winter(const QberPair& e) {
  const double k = 1.0 - binary_entropy(e.e_z) - binary_entropy(e.e_x);
  return std::max(0.0, k);
}

// Both DOFs keyed directly; the energy-time half-rate reflects that only one
// of its two bases yields key bits in this scheme.
inline double key_rate_noisy(const QberPair& pol, const QberPair& et) {
  return devetak_winter(pol) + devetak_winter(et) / 2.0;
}

// Distilled key per source pair: acceptance probability times the post-QPA
// polarisation fraction, halved because energy-time is consumed. Zero when no
// pairs ever pass.
inline double key_rate_qpa(double yield, const QberPair& post) {
  if (yield < kYieldFloor) return 0.0;
  return yield * devetak_winter(post) / 2.0;
}

inline double key_rate_qpa(const QpaOutcome& outcome) {
  if (!outcome.output_defined) return 0.0;
  return key_rate_qpa(outcome.yield, qber_pair(outcome.output_pol));
}

inline double gain(double k_qpa, double k_noisy) { return k_qpa - k_noisy; }

namespace detail {

// Root of f on [lo, hi] by bisection; f(lo) and f(hi) must straddle zero.
template <typename F>
double bisect(F f, double lo, double hi) {
  double flo = f(lo);
  if (flo == 0.0) return lo;
  for (int iter = 0; iter < 200 && hi - lo > 1e-15; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double fmid = f(mid);
    if (fmid == 0.0) return mid;
    if ((flo > 0.0) == (fmid > 0.0)) {
      lo = mid;
      flo = fmid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

// Largest p with a positive polarisation key fraction: the root of
// 1 - 2 h2(p) on (0, 1/2).
inline double threshold_pol() {
  static const double value =
      detail::bisect([](double p) { return 1.0 - 2.0 * binary_entropy(p); }, 1e-9, 0.5 - 1e-9);
  return value;
}

// Largest q with a positive energy-time key fraction: the root of
// 1 - h2(q) - h2(q/2) on (0, 1/2).
inline double threshold_et() {
  static const double value = detail::bisect(
      [](double q) { return 1.0 - binary_entropy(q) - binary_entropy(q / 2.0); }, 1e-9,
      0.5 - 1e-9);
  return value;
}

// Noise-plane regions: NONE where distillation does not pay, I where neither
// DOF alone yields key, II where only polarisation does, III where only
// energy-time does, IV where both do.
enum class Region { None, I, II, III, IV };

inline std::string_view region_name(Region r) {
  switch (r) {
    case Region::None: return "NONE";
    case Region::I: return "I";
    case Region::II: return "II";
    case Region::III: return "III";
    case Region::IV: return "IV";
  }
  throw std::invalid_argument("region_name: invalid region");
}

inline Region region_from_name(std::string_view name) {
  if (name == "NONE") return Region::None;
  if (name == "I") return Region::I;
  if (name == "II") return Region::II;
  if (name == "III") return Region::III;
  if (name == "IV") return Region::IV;
  throw std::invalid_argument("region_from_name: unknown region label " + std::string(name));
}

// Everything the sweep records about one noise point.
struct KeyRateReport {
  QberPair pol;
  QberPair et;
  QberPair post_pol;   // zeros when the QPA output is undefined
  double yield = 0.0;
  bool qpa_defined = false;
  double k_pol = 0.0;
  double k_et = 0.0;
  double k_noisy = 0.0;
  double k_qpa = 0.0;
  double gain = 0.0;
  Region region = Region::None;
};

// Rates are clamped, so "zero" is an exact comparison up to kEqTol; a point on
// a threshold line counts as zero-rate.
inline Region classify_region(const KeyRateReport& report) {
  if (report.gain <= 0.0) return Region::None;
  const bool pol_works = report.k_pol > kEqTol;
  const bool et_works = report.k_et > kEqTol;
  if (pol_works && et_works) return Region::IV;
  if (pol_works) return Region::II;
  if (et_works) return Region::III;
  return Region::I;
}

// Full analytic pipeline for one noise point: assemble the noisy state, read
// off pre-QPA error rates, run the distillation round in the Bell picture, and
// score both strategies.
inline KeyRateReport evaluate_point(const NoiseParams& params) {
  const HyperState state = assemble_noisy_hyper(params);

  KeyRateReport report;
  report.pol = qber_pair(state.pol);
  report.et = qber_pair(state.et);

  const QpaOutcome outcome =
      qpa_bell_algebra(BellWeights::from_state(state.pol), BellWeights::from_state(state.et));
  report.yield = outcome.yield;
  report.qpa_defined = outcome.output_defined;
  if (outcome.output_defined) {
    report.post_pol = qber_pair(outcome.output_pol);
  }

  report.k_pol = devetak_winter(report.pol);
  report.k_et = devetak_winter(report.et);
  report.k_noisy = report.k_pol + report.k_et / 2.0;
  report.k_qpa = key_rate_qpa(outcome);
  report.gain = gain(report.k_qpa, report.k_noisy);
  report.region = classify_region(report);
  return report;
}

}  // namespace qpa
