#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <utility>

#include "qpa/quantum.hpp"

namespace qpa {

// Channel noise knobs. p and q are the polarisation and energy-time error
// weights; v_pol and v_et add an isotropic Bell-label error on top.
struct NoiseParams {
  double p = 0.0;
  double q = 0.0;
  double v_pol = 0.0;
  double v_et = 0.0;

  void validate() const {
    auto in_unit = [](double x) { return x >= 0.0 && x <= 1.0; };
    if (!in_unit(p) || !in_unit(q) || !in_unit(v_pol) || !in_unit(v_et)) {
      throw std::invalid_argument("NoiseParams: all weights must lie in [0, 1]");
    }
  }
};

// Two-photon state carrying both degrees of freedom. The 16-dim joint state is
// materialised only on demand; as long as it is absent the state is the tensor
// product of the two 4-dim factors.
struct HyperState {
  DensityOperator pol;
  DensityOperator et;
  std::optional<DensityOperator> joint;

  HyperState(DensityOperator pol_state, DensityOperator et_state)
      : pol(std::move(pol_state)), et(std::move(et_state)) {
    if (pol.dim() != 4 || et.dim() != 4) {
      throw std::invalid_argument("HyperState: factors must be two-qubit states");
    }
  }

  DensityOperator joint_state() const {
    return joint.has_value() ? *joint : tensor(pol, et);
  }

  HyperState with_joint() const {
    HyperState out = *this;
    out.joint = joint_state();
    return out;
  }
};

// Ideal source: phi+ in polarisation and phi+ in energy-time.
inline HyperState hyper_phi_plus() {
  DensityOperator phi = DensityOperator::pure(bell_state(kPhiPlus));
  return HyperState(phi, phi);
}

// Balanced average over a +theta / -theta single-photon Y rotation on photon A.
// Models a randomly flipped waveplate in one arm.
inline DensityOperator waveplate_noise_channel(const DensityOperator& rho, double theta) {
  if (rho.dim() != 4) {
    throw std::invalid_argument("waveplate_noise_channel: expected a two-qubit state");
  }
  if (!(theta >= 0.0 && theta <= std::numbers::pi)) {
    throw std::invalid_argument("waveplate_noise_channel: theta must lie in [0, pi]");
  }
  const ComplexMatrix up = kron(ry(theta), ComplexMatrix::identity(2));
  const ComplexMatrix um = kron(ry(-theta), ComplexMatrix::identity(2));
  ComplexMatrix mixed =
      (up * rho.matrix() * up.adjoint() + um * rho.matrix() * um.adjoint()) * complexd{0.5};
  return DensityOperator(std::move(mixed));
}

// (1 - p) phi+ + p psi-. The polarisation error channel flips the bit and the
// phase together.
inline DensityOperator pol_mixture(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("pol_mixture: p must lie in [0, 1]");
  ComplexMatrix m = bell_state(kPhiPlus).projector() * complexd{1.0 - p} +
                    bell_state(kPsiMinus).projector() * complexd{p};
  return DensityOperator(std::move(m));
}

// (1 - q) phi+ + (q/2) psi+ + (q/2) psi-. A too-wide coincidence window admits
// bit-flipped pairs with no phase preference.
inline DensityOperator et_mixture(double q) {
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("et_mixture: q must lie in [0, 1]");
  ComplexMatrix m = bell_state(kPhiPlus).projector() * complexd{1.0 - q} +
                    bell_state(kPsiPlus).projector() * complexd{q / 2.0} +
                    bell_state(kPsiMinus).projector() * complexd{q / 2.0};
  return DensityOperator(std::move(m));
}

// Isotropic Bell-label error: with weight v the state is steered equally onto
// the three other Bell states, via one-sided X, Z and XZ Kraus terms.
inline DensityOperator isotropic_bell_noise(const DensityOperator& rho, double v) {
  if (rho.dim() != 4) {
    throw std::invalid_argument("isotropic_bell_noise: expected a two-qubit state");
  }
  if (!(v >= 0.0 && v <= 1.0)) {
    throw std::invalid_argument("isotropic_bell_noise: v must lie in [0, 1]");
  }
  if (v == 0.0) return rho;
  const ComplexMatrix id2 = ComplexMatrix::identity(2);
  const ComplexMatrix kx = kron(pauli_x(), id2);
  const ComplexMatrix kz = kron(pauli_z(), id2);
  const ComplexMatrix kxz = kron(pauli_x() * pauli_z(), id2);
  const ComplexMatrix& m = rho.matrix();
  ComplexMatrix mixed = m * complexd{1.0 - v} +
                        (kx * m * kx.adjoint() + kz * m * kz.adjoint() +
                         kxz * m * kxz.adjoint()) *
                            complexd{v / 3.0};
  return DensityOperator(std::move(mixed));
}

// Noisy source state: independent Bell mixtures per DOF, each optionally
// degraded by the isotropic label error. The joint factor stays lazy.
inline HyperState assemble_noisy_hyper(const NoiseParams& params) {
  params.validate();
  DensityOperator pol = isotropic_bell_noise(pol_mixture(params.p), params.v_pol);
  DensityOperator et = isotropic_bell_noise(et_mixture(params.q), params.v_et);
  return HyperState(std::move(pol), std::move(et));
}

}  // namespace qpa
