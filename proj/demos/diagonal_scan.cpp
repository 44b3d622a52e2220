// Scan the equal-noise diagonal p = q and print where distillation starts to
// beat direct keying.

#include <cstdio>

#include "qpa/qpa.hpp"

int main() {
  std::printf("%8s %12s %12s %12s %8s\n", "p=q", "k_noisy", "k_qpa", "gain", "region");
  bool crossed = false;
  for (int i = 0; i <= 40; ++i) {
    const double x = 0.01 * i;
    const qpa::KeyRateReport r = qpa::evaluate_point(qpa::NoiseParams{x, x, 0.0, 0.0});
    std::printf("%8.2f %12.6f %12.6f %+12.6f %8s\n", x, r.k_noisy, r.k_qpa, r.gain,
                std::string(qpa::region_name(r.region)).c_str());
    if (!crossed && r.gain > 0.0) {
      crossed = true;
    }
  }
  std::printf("\nper-DOF thresholds: pol %.6f, energy-time %.6f\n", qpa::threshold_pol(),
              qpa::threshold_et());
  return 0;
}
