#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

#include "qpa/linalg.hpp"

namespace qpa {

// Measurement bases for a qubit pair: Z is the computational basis (H/V for
// polarisation, early/late for energy-time), X the +/- superposition basis.
enum class Basis { Z, X };

// Subsystem selector for the 16-dim two-photon state. Qubit order throughout
// is (pol_A, pol_B, et_A, et_B); basis index = pol_A*8 + pol_B*4 + et_A*2 + et_B.
enum class DofPair { Polarisation, EnergyTime };

// Bell-state label (bit, phase):
//   bit = 0 correlated in Z, bit = 1 anticorrelated;
//   phase = 0 plus sign, phase = 1 minus sign.
// |bell(bit, phase)> = (|0, bit> + (-1)^phase |1, 1^bit>) / sqrt(2),
// so the sign sits on the component whose first qubit is |1>.
struct BellLabel {
  int bit = 0;
  int phase = 0;

  // Position in the conventional weight ordering phi+, psi+, phi-, psi-.
  int index() const { return bit + 2 * phase; }

  static BellLabel from_index(int idx) {
    if (idx < 0 || idx > 3) throw std::invalid_argument("BellLabel: index out of range");
    return BellLabel{idx & 1, idx >> 1};
  }

  bool operator==(const BellLabel&) const = default;
};

inline constexpr BellLabel kPhiPlus{0, 0};
inline constexpr BellLabel kPsiPlus{1, 0};
inline constexpr BellLabel kPhiMinus{0, 1};
inline constexpr BellLabel kPsiMinus{1, 1};

// Pure state on 1, 2 or 4 qubits. Normalisation is enforced at construction.
class StateVector {
 public:
  explicit StateVector(std::vector<complexd> amplitudes)
      : amps_(std::move(amplitudes)) {
    const std::size_t d = amps_.size();
    if (d != 2 && d != 4 && d != 16) {
      throw std::invalid_argument("StateVector: dimension must be 2, 4 or 16");
    }
    double n2 = 0.0;
    for (const auto& a : amps_) n2 += std::norm(a);
    if (std::abs(n2 - 1.0) > kEqTol) {
      throw std::invalid_argument("StateVector: squared norm deviates from 1");
    }
  }

  std::size_t dim() const { return amps_.size(); }
  const complexd& amplitude(std::size_t i) const { return amps_.at(i); }
  const std::vector<complexd>& amplitudes() const { return amps_; }

  complexd inner(const StateVector& other) const {
    if (dim() != other.dim()) throw std::invalid_argument("StateVector: dimension mismatch");
    complexd s{};
    for (std::size_t i = 0; i < amps_.size(); ++i) s += std::conj(amps_[i]) * other.amps_[i];
    return s;
  }

  // |psi><psi|
  ComplexMatrix projector() const {
    const std::size_t d = dim();
    ComplexMatrix m(d, d);
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        m(i, j) = amps_[i] * std::conj(amps_[j]);
      }
    }
    return m;
  }

 private:
  std::vector<complexd> amps_;
};

inline StateVector bell_state(BellLabel label) {
  const double r = 1.0 / std::numbers::sqrt2;
  std::vector<complexd> amps(4);
  amps[static_cast<std::size_t>(label.bit)] = r;            // |0, bit>
  const std::size_t hi = 2 + static_cast<std::size_t>(1 - label.bit);  // |1, 1^bit>
  amps[hi] = label.phase == 0 ? r : -r;
  return StateVector(std::move(amps));
}

// Mixed state on dimension 2, 4 or 16. Construction validates Hermiticity,
// unit trace and positive semidefiniteness, so a DensityOperator in hand is
// always physical.
class DensityOperator {
 public:
  explicit DensityOperator(ComplexMatrix m) : m_(std::move(m)) {
    const std::size_t d = m_.rows();
    if (!m_.is_square() || (d != 2 && d != 4 && d != 16)) {
      throw std::invalid_argument("DensityOperator: dimension must be 2, 4 or 16");
    }
    if (!m_.is_hermitian(kEqTol)) {
      throw std::invalid_argument("DensityOperator: matrix not Hermitian");
    }
    if (std::abs(m_.trace() - complexd{1.0}) > kEqTol) {
      throw std::invalid_argument("DensityOperator: trace deviates from 1");
    }
    if (m_.min_eigenvalue() < -kSpectralTol) {
      throw std::invalid_argument("DensityOperator: matrix not positive semidefinite");
    }
  }

  static DensityOperator pure(const StateVector& psi) {
    return DensityOperator(psi.projector());
  }

  static DensityOperator maximally_mixed(std::size_t dim) {
    ComplexMatrix m = ComplexMatrix::identity(dim) * complexd{1.0 / static_cast<double>(dim)};
    return DensityOperator(std::move(m));
  }

  std::size_t dim() const { return m_.rows(); }
  const ComplexMatrix& matrix() const { return m_; }

  std::vector<double> eigenvalues() const { return m_.hermitian_eigenvalues(); }

  bool approx_equal(const DensityOperator& other, double tol = kEqTol) const {
    return m_.approx_equal(other.m_, tol);
  }

 private:
  ComplexMatrix m_;
};

inline StateVector tensor(const StateVector& a, const StateVector& b) {
  const std::size_t d = a.dim() * b.dim();
  if (d > 16) throw std::invalid_argument("tensor: product dimension exceeds 16");
  std::vector<complexd> amps(d);
  for (std::size_t i = 0; i < a.dim(); ++i) {
    for (std::size_t j = 0; j < b.dim(); ++j) {
      amps[i * b.dim() + j] = a.amplitude(i) * b.amplitude(j);
    }
  }
  return StateVector(std::move(amps));
}

inline DensityOperator tensor(const DensityOperator& a, const DensityOperator& b) {
  if (a.dim() * b.dim() > 16) {
    throw std::invalid_argument("tensor: product dimension exceeds 16");
  }
  return DensityOperator(kron(a.matrix(), b.matrix()));
}

inline DensityOperator apply_unitary(const DensityOperator& rho, const ComplexMatrix& u) {
  if (u.rows() != rho.dim() || u.cols() != rho.dim()) {
    throw std::invalid_argument("apply_unitary: dimension mismatch");
  }
  if (!u.is_unitary(kSpectralTol)) {
    throw std::invalid_argument("apply_unitary: matrix not unitary");
  }
  return DensityOperator(u * rho.matrix() * u.adjoint());
}

// Rotation about the Y axis; real-valued, so it maps real states to real states.
inline ComplexMatrix ry(double theta) {
  const double c = std::cos(theta / 2.0);
  const double s = std::sin(theta / 2.0);
  return ComplexMatrix{{c, -s}, {s, c}};
}

inline ComplexMatrix hadamard() {
  const double r = 1.0 / std::numbers::sqrt2;
  return ComplexMatrix{{r, r}, {r, -r}};
}

inline ComplexMatrix pauli_x() { return ComplexMatrix{{0.0, 1.0}, {1.0, 0.0}}; }
inline ComplexMatrix pauli_z() { return ComplexMatrix{{1.0, 0.0}, {0.0, -1.0}}; }

// tr(P rho) for an orthogonal projector P. The result is clamped to [0, 1];
// anything further out than the spectral slack indicates a broken input.
inline double born_probability(const DensityOperator& rho, const ComplexMatrix& projector) {
  if (projector.rows() != rho.dim() || projector.cols() != rho.dim()) {
    throw std::invalid_argument("born_probability: dimension mismatch");
  }
  if (!projector.is_projector(kSpectralTol)) {
    throw std::invalid_argument("born_probability: operator is not a projector");
  }
  const double p = (projector * rho.matrix()).trace().real();
  if (p < -kSpectralTol || p > 1.0 + kSpectralTol) {
    throw std::invalid_argument("born_probability: probability outside [0, 1]");
  }
  return std::min(1.0, std::max(0.0, p));
}

// Trace out one DOF pair of a 16-dim state, keeping the other. With qubit
// order (pol_A, pol_B, et_A, et_B) the polarisation pair is the row-major
// "outer" factor and energy-time the "inner" one.
inline DensityOperator partial_trace(const DensityOperator& rho, DofPair keep) {
  if (rho.dim() != 16) {
    throw std::invalid_argument("partial_trace: expected a 16-dim state");
  }
  ComplexMatrix out(4, 4);
  const ComplexMatrix& m = rho.matrix();
  switch (keep) {
    case DofPair::Polarisation:
      for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = 0; j < 4; ++j) {
          complexd s{};
          for (std::size_t k = 0; k < 4; ++k) s += m(i * 4 + k, j * 4 + k);
          out(i, j) = s;
        }
      }
      break;
    case DofPair::EnergyTime:
      for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = 0; j < 4; ++j) {
          complexd s{};
          for (std::size_t k = 0; k < 4; ++k) s += m(k * 4 + i, k * 4 + j);
          out(i, j) = s;
        }
      }
      break;
    default:
      throw std::invalid_argument("partial_trace: invalid subsystem selector");
  }
  return DensityOperator(std::move(out));
}

// Rank-1 projectors for the four outcomes of a joint two-qubit measurement,
// ordered 00, 01, 10, 11. X-basis outcome 0 means the + eigenstate.
inline std::array<ComplexMatrix, 4> outcome_projectors(Basis basis) {
  std::array<ComplexMatrix, 4> out;
  const ComplexMatrix h2 = kron(hadamard(), hadamard());
  for (std::size_t o = 0; o < 4; ++o) {
    ComplexMatrix p(4, 4);
    p(o, o) = 1.0;
    out[o] = basis == Basis::Z ? p : h2 * p * h2.adjoint();
  }
  return out;
}

inline std::array<double, 4> outcome_probabilities(const DensityOperator& rho, Basis basis) {
  if (rho.dim() != 4) {
    throw std::invalid_argument("outcome_probabilities: expected a two-qubit state");
  }
  const auto projectors = outcome_projectors(basis);
  std::array<double, 4> probs{};
  for (std::size_t o = 0; o < 4; ++o) probs[o] = born_probability(rho, projectors[o]);
  return probs;
}

// Unitary whose columns are the Bell states in index order phi+, psi+, phi-, psi-.
inline ComplexMatrix bell_basis_matrix() {
  ComplexMatrix b(4, 4);
  for (int idx = 0; idx < 4; ++idx) {
    const StateVector v = bell_state(BellLabel::from_index(idx));
    for (std::size_t r = 0; r < 4; ++r) b(r, static_cast<std::size_t>(idx)) = v.amplitude(r);
  }
  return b;
}

// Diagonal of a two-qubit state in the Bell basis, ordered phi+, psi+, phi-, psi-.
inline std::array<double, 4> bell_diagonal(const DensityOperator& rho) {
  if (rho.dim() != 4) throw std::invalid_argument("bell_diagonal: expected a two-qubit state");
  std::array<double, 4> w{};
  for (int idx = 0; idx < 4; ++idx) {
    w[static_cast<std::size_t>(idx)] =
        born_probability(rho, bell_state(BellLabel::from_index(idx)).projector());
  }
  return w;
}

inline bool is_bell_diagonal(const DensityOperator& rho, double tol = kSpectralTol) {
  if (rho.dim() != 4) return false;
  const ComplexMatrix b = bell_basis_matrix();
  const ComplexMatrix in_bell = b.adjoint() * rho.matrix() * b;
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      if (i != j && std::abs(in_bell(i, j)) > tol) return false;
    }
  }
  return true;
}

}  // namespace qpa
