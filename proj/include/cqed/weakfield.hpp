#pragma once

// Weak-drive steady state of the driven Jaynes-Cummings system, solved
// analytically to second order in the drive amplitude.
//
// For eta -> 0 the steady state is, to leading order in each manifold, the
// pure state
//   |psi> = |g,0> + A1 |g,1> + B1 |e,0> + A2 |g,2> + B2 |e,1> + O(eta^3)
// that makes H_eff |psi> vanish in the one- and two-excitation manifolds,
// with H_eff = -(dc + i kappa) a'a - (da + i gamma) s+s- + g(a's- + a s+)
// + eta(a + a'). The drive feeds manifold n from manifold n-1 only
// (back-action on lower manifolds enters at higher order), so each manifold
// is a 2x2 linear solve:
//
//   n = 1:  [ dc + i kappa     -g        ] [A1]   [eta]
//           [ -g           da + i gamma  ] [B1] = [ 0 ]
//
//   n = 2:  [ 2(dc + i kappa)      -sqrt2 g            ] [A2]   [sqrt2 eta A1]
//           [ -sqrt2 g   dc + da + i(kappa + gamma)   ] [B2] = [  eta B1    ]
//
// Observables at their leading order: <a'a> = |A1|^2 = P(g,1),
// <a'^2 a^2> = 2|A2|^2 = 2 P(g,2), hence C2(0) = 2 P(g,2) - P(g,1)^2 and
// g2(0) = 2|A2|^2 / |A1|^4, which is independent of eta.
//
// The empty cavity (g = 0) gives A1 = -i eta/(kappa - i dc) and
// A2 = A1^2/sqrt2, i.e. the coherent-state Fock amplitudes.

#include <cmath>
#include <complex>
#include <string>

#include "cqed/error.hpp"
#include "cqed/hilbert.hpp"

namespace cqed {

struct WeakFieldSolution {
  Complex amp_g1{};
  Complex amp_e0{};
  Complex amp_g2{};
  Complex amp_e1{};
  /// Set when P(g,1) exceeds the range where the expansion is trusted.
  bool drive_too_strong = false;

  double p_g1() const { return std::norm(amp_g1); }
  double p_g2() const { return std::norm(amp_g2); }
  double mean_n() const { return p_g1(); }
  double mean_n_squared() const { return p_g1() * p_g1(); }
  double g2_zero() const {
    if (!(p_g1() > 0)) throw InvalidArgument("weak field g2(0): no photons at first order");
    return 2.0 * p_g2() / (p_g1() * p_g1());
  }
};

inline constexpr double kWeakFieldMaxPg1 = 0.05;

namespace detail {

// Solves [[a, b], [c, d]] x = r.
inline std::pair<Complex, Complex> solve2(Complex a, Complex b, Complex c, Complex d, Complex r0, Complex r1,
                                          const char* manifold) {
  const Complex det = a * d - b * c;
  const double scale = std::abs(a) * std::abs(d) + std::abs(b) * std::abs(c);
  if (std::abs(det) <= 1e-14 * scale || det == Complex{})
    throw NumericalError(std::string("solve_weak_field: singular ") + manifold + "-excitation manifold (dark resonance)");
  return {(d * r0 - b * r1) / det, (a * r1 - c * r0) / det};
}

}  // namespace detail

inline WeakFieldSolution solve_weak_field(const SystemParams& p) {
  p.validate();
  const Complex dk{p.delta_c, p.kappa};
  const Complex dg{p.delta_a, p.gamma};
  const double s2 = std::sqrt(2.0);

  WeakFieldSolution sol;
  std::tie(sol.amp_g1, sol.amp_e0) = detail::solve2(dk, -p.g, -p.g, dg, p.eta, 0.0, "one");
  std::tie(sol.amp_g2, sol.amp_e1) =
      detail::solve2(2.0 * dk, -s2 * p.g, -s2 * p.g, dk + dg, s2 * p.eta * sol.amp_g1, p.eta * sol.amp_e0, "two");
  sol.drive_too_strong = sol.p_g1() > kWeakFieldMaxPg1;
  return sol;
}

/// 2 P(g,2) - P(g,1)^2.
inline double weakfield_c2_zero(const WeakFieldSolution& sol) {
  return 2.0 * sol.p_g2() - sol.p_g1() * sol.p_g1();
}

/// The truncated pure state |g,0> + first- and second-order amplitudes,
/// normalized, on the given space.
inline CVector weakfield_state(const WeakFieldSolution& sol, const HilbertSpace& space) {
  CVector psi = CVector::Zero(space.dim());
  psi(space.index(0, 0)) = 1.0;
  psi(space.index(1, 0)) = sol.amp_g1;
  psi(space.index(0, 1)) = sol.amp_e0;
  psi(space.index(2, 0)) = sol.amp_g2;
  psi(space.index(1, 1)) = sol.amp_e1;
  return psi / psi.norm();
}

}  // namespace cqed
