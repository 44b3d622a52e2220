// Minimal library walkthrough: build a noisy two-photon state, run one
// distillation round, and compare the two keying strategies at a single
// noise point.

#include <cstdio>

#include "qpa/qpa.hpp"

int main() {
  const qpa::NoiseParams params{0.1, 0.1, 0.0, 0.0};

  const qpa::HyperState state = qpa::assemble_noisy_hyper(params);
  std::printf("pre-QPA polarisation QBER:  z=%.4f x=%.4f\n",
              qpa::qber(state.pol, qpa::Basis::Z), qpa::qber(state.pol, qpa::Basis::X));
  std::printf("pre-QPA energy-time QBER:   z=%.4f x=%.4f\n",
              qpa::qber(state.et, qpa::Basis::Z), qpa::qber(state.et, qpa::Basis::X));

  // Matrix route: tensor the DOFs, apply the bilateral CNOT, postselect.
  const qpa::QpaOutcome outcome = qpa::postselect(qpa::bilateral_cnot(state));
  std::printf("yield: %.4f\n", outcome.yield);
  if (outcome.output_defined) {
    std::printf("post-QPA polarisation QBER: z=%.4f x=%.4f\n",
                qpa::qber(outcome.output_pol, qpa::Basis::Z),
                qpa::qber(outcome.output_pol, qpa::Basis::X));
  }

  const qpa::KeyRateReport report = qpa::evaluate_point(params);
  std::printf("k_noisy=%.6f  k_qpa=%.6f  gain=%+.6f  region=%s\n", report.k_noisy,
              report.k_qpa, report.gain, std::string(qpa::region_name(report.region)).c_str());
  return 0;
}
