// Scan the probe detuning with the experimental parameter set and print
// where the pair-correlation and the transmitted intensity peak, next to
// the dressed-state resonances they should line up with. The window covers
// the lower dressed branch only.

#include <cstdio>
#include <numbers>

#include "cqed/cqed.hpp"

int main() {
  using namespace cqed;
  const double two_pi = 2 * std::numbers::pi;  // MHz -> rad/us

  SystemParams p;
  p.g = two_pi * 11.5;
  p.kappa = two_pi * 1.3;
  p.gamma = two_pi * 3.0;
  p.delta_c = 0.0;
  p.delta_a = two_pi * 8.5;  // atom 8.5 MHz below the cavity
  p.eta = SystemParams::eta_for_empty_cavity_photons(0.01, p.kappa);

  ScanOptions opt;
  opt.window = 0.170;
  const ScanResult r = scan_detuning(p, linspace(-two_pi * 25, 0.0, 251), opt);

  std::size_t i_c2 = 0, i_n = 0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (r.c2_zero[i] > r.c2_zero[i_c2]) i_c2 = i;
    if (r.mean_n[i] > r.mean_n[i_n]) i_n = i;
  }
  std::printf("C2(0) peak      : %7.2f MHz  (g2(0) = %.1f)\n", r.axis[i_c2] / two_pi, r.g2_zero[i_c2]);
  std::printf("|2,-> resonance : %7.2f MHz\n", two_photon_resonance(p, Branch::lower) / two_pi);
  std::printf("<n> peak        : %7.2f MHz\n", r.axis[i_n] / two_pi);
  std::printf("|1,-> resonance : %7.2f MHz\n", normal_mode_resonance(p, Branch::lower) / two_pi);

  const auto [lower, upper] = dressed_levels(p.with_laser_detuning(r.axis[i_c2]), 2);
  std::printf("|2,-> lifetime  : %7.1f ns\n", 1e3 / lower.linewidth);
  (void)upper;
  return 0;
}
