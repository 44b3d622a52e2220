#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>

#include "qpa/states.hpp"

namespace qpa {

// Yields below this are treated as "no pairs ever pass": the conditional
// output state is undefined there.
inline constexpr double kYieldFloor = 1e-12;

// Probability weights of a Bell-diagonal two-qubit state, indexed
// bit + 2*phase (phi+, psi+, phi-, psi-).
struct BellWeights {
  std::array<double, 4> w{1.0, 0.0, 0.0, 0.0};

  double operator[](BellLabel label) const { return w[static_cast<std::size_t>(label.index())]; }
  double& operator[](BellLabel label) { return w[static_cast<std::size_t>(label.index())]; }

  void validate() const {
    double sum = 0.0;
    for (double x : w) {
      if (x < -kEqTol) throw std::invalid_argument("BellWeights: negative weight");
      sum += x;
    }
    if (std::abs(sum - 1.0) > kEqTol) {
      throw std::invalid_argument("BellWeights: weights must sum to 1");
    }
  }

  // Requires the state to actually be Bell-diagonal; coherences between Bell
  // states would otherwise be dropped silently.
  static BellWeights from_state(const DensityOperator& rho) {
    if (!is_bell_diagonal(rho)) {
      throw std::invalid_argument("BellWeights: state is not Bell-diagonal");
    }
    BellWeights out;
    out.w = bell_diagonal(rho);
    out.validate();
    return out;
  }

  DensityOperator to_state() const {
    validate();
    ComplexMatrix m(4, 4);
    for (int idx = 0; idx < 4; ++idx) {
      m = m + bell_state(BellLabel::from_index(idx)).projector() *
                  complexd{w[static_cast<std::size_t>(idx)]};
    }
    return DensityOperator(std::move(m));
  }
};

// Result of the distillation round: acceptance probability, the two accepting
// detector branches (both energy-time qubits 0, both 1), and the conditional
// polarisation output. output_pol is a placeholder when nothing ever passes.
struct QpaOutcome {
  double yield = 0.0;
  std::array<double, 2> branch_probability{0.0, 0.0};
  bool output_defined = false;
  DensityOperator output_pol = DensityOperator::maximally_mixed(4);
};

// CNOT on each photon separately: polarisation controls, energy-time is the
// target. Qubit order (pol_A, pol_B, et_A, et_B) makes this a permutation that
// XORs bit 3 into bit 1 and bit 2 into bit 0.
inline ComplexMatrix bilateral_cnot_unitary() {
  ComplexMatrix u(16, 16);
  for (std::size_t in = 0; in < 16; ++in) {
    const std::size_t pol_a = (in >> 3) & 1;
    const std::size_t pol_b = (in >> 2) & 1;
    std::size_t out = in;
    out ^= (pol_a << 1);
    out ^= (pol_b << 0);
    u(out, in) = 1.0;
  }
  return u;
}

inline DensityOperator bilateral_cnot(const HyperState& state) {
  return apply_unitary(state.joint_state(), bilateral_cnot_unitary());
}

// Keep only runs where the two energy-time measurements agree, renormalise,
// and trace out the measured DOF.
inline QpaOutcome postselect(const DensityOperator& rho) {
  if (rho.dim() != 16) {
    throw std::invalid_argument("postselect: expected a 16-dim state");
  }
  // Projectors onto et = 00 and et = 11, acting only on the inner factor.
  ComplexMatrix p00(4, 4);
  p00(0, 0) = 1.0;
  ComplexMatrix p11(4, 4);
  p11(3, 3) = 1.0;
  const ComplexMatrix id4 = ComplexMatrix::identity(4);
  const ComplexMatrix pi0 = kron(id4, p00);
  const ComplexMatrix pi1 = kron(id4, p11);

  QpaOutcome out;
  out.branch_probability[0] = born_probability(rho, pi0);
  out.branch_probability[1] = born_probability(rho, pi1);
  out.yield = out.branch_probability[0] + out.branch_probability[1];
  if (out.yield < kYieldFloor) {
    out.yield = out.yield < 0.0 ? 0.0 : out.yield;
    return out;
  }

  const ComplexMatrix pi = pi0 + pi1;
  ComplexMatrix kept = pi * rho.matrix() * pi;
  kept = kept * complexd{1.0 / out.yield};
  out.output_pol = partial_trace(DensityOperator(std::move(kept)), DofPair::Polarisation);
  out.output_defined = true;
  return out;
}

// Same protocol in the Bell-label picture. The bilateral CNOT maps the label
// pair ((b1, f1), (b2, f2)) to ((b1, f1^f2), (b1^b2, f2)); the energy-time
// measurements agree exactly when b1 = b2, and each accepted component lands
// on the et state |00><00| or |11><11| with equal probability.
inline QpaOutcome qpa_bell_algebra(const BellWeights& pol, const BellWeights& et) {
  pol.validate();
  et.validate();

  QpaOutcome out;
  BellWeights output;
  output.w = {0.0, 0.0, 0.0, 0.0};
  for (int pol_idx = 0; pol_idx < 4; ++pol_idx) {
    const BellLabel lp = BellLabel::from_index(pol_idx);
    for (int et_idx = 0; et_idx < 4; ++et_idx) {
      const BellLabel le = BellLabel::from_index(et_idx);
      if (lp.bit != le.bit) continue;  // measured et bits disagree, rejected
      const double weight = pol[lp] * et[le];
      output[BellLabel{lp.bit, lp.phase ^ le.phase}] += weight;
      out.yield += weight;
    }
  }
  out.branch_probability = {out.yield / 2.0, out.yield / 2.0};
  if (out.yield < kYieldFloor) {
    return out;
  }
  for (double& x : output.w) x /= out.yield;
  out.output_pol = output.to_state();
  out.output_defined = true;
  return out;
}

}  // namespace qpa
