#pragma once

// Truncated atom (x) field Hilbert space, elementary operators, the driven
// Jaynes-Cummings Hamiltonian and its dressed-state ladder.
//
// Basis ordering is field-major, atom-minor: index(n, s) = 2*n + s with
// s = 0 for |g> and s = 1 for |e>. Every module relies on this ordering.
//
// Frequencies are angular and unit-agnostic; callers pick one unit system
// (the CLI uses rad/us) and keep to it.

#include <cmath>
#include <complex>
#include <utility>

#include <Eigen/Dense>

#include "cqed/error.hpp"

namespace cqed {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline constexpr Complex kI{0.0, 1.0};

class HilbertSpace {
public:
  explicit HilbertSpace(int n_max = 6) : n_max_(n_max) {
    detail::require(n_max >= 2, "HilbertSpace: n_max must be >= 2 to represent two-photon states");
  }

  int n_max() const { return n_max_; }
  int dim() const { return 2 * (n_max_ + 1); }

  /// Flat index of |n> (x) |s>, s = 0 ground, s = 1 excited.
  int index(int n, int s) const { return 2 * n + s; }

  friend bool operator==(const HilbertSpace&, const HilbertSpace&) = default;

private:
  int n_max_;
};

/// Complex matrix acting on a given truncated space.
class QOperator {
public:
  QOperator(HilbertSpace space, CMatrix m) : space_(space), m_(std::move(m)) {
    detail::require(m_.rows() == space_.dim() && m_.cols() == space_.dim(),
                    "QOperator: matrix side does not match space dimension");
  }

  const CMatrix& matrix() const { return m_; }
  const HilbertSpace& space() const { return space_; }

  QOperator adjoint() const { return {space_, m_.adjoint()}; }

  friend QOperator operator*(const QOperator& a, const QOperator& b) {
    detail::require(a.space_ == b.space_, "QOperator: space mismatch");
    return {a.space_, a.m_ * b.m_};
  }
  friend QOperator operator+(const QOperator& a, const QOperator& b) {
    detail::require(a.space_ == b.space_, "QOperator: space mismatch");
    return {a.space_, a.m_ + b.m_};
  }
  friend QOperator operator-(const QOperator& a, const QOperator& b) {
    detail::require(a.space_ == b.space_, "QOperator: space mismatch");
    return {a.space_, a.m_ - b.m_};
  }
  friend QOperator operator*(Complex c, const QOperator& a) { return {a.space_, c * a.m_}; }

private:
  HilbertSpace space_;
  CMatrix m_;
};

struct Operators {
  QOperator a;
  QOperator a_dag;
  QOperator sigma_minus;
  QOperator sigma_plus;
  QOperator number;
  QOperator identity;
};

inline Operators build_operators(const HilbertSpace& space) {
  const int d = space.dim();
  CMatrix a = CMatrix::Zero(d, d);
  CMatrix sm = CMatrix::Zero(d, d);
  for (int n = 0; n <= space.n_max(); ++n) {
    for (int s = 0; s < 2; ++s) {
      if (n > 0) a(space.index(n - 1, s), space.index(n, s)) = std::sqrt(static_cast<double>(n));
    }
    sm(space.index(n, 0), space.index(n, 1)) = 1.0;
  }
  QOperator a_op{space, a};
  QOperator sm_op{space, sm};
  return Operators{a_op,
                   a_op.adjoint(),
                   sm_op,
                   sm_op.adjoint(),
                   a_op.adjoint() * a_op,
                   QOperator{space, CMatrix::Identity(d, d)}};
}

/// Physical parameters in angular-frequency units. kappa and gamma are
/// half-widths (field and dipole decay rates).
struct SystemParams {
  double g = 0.0;
  double kappa = 1.0;
  double gamma = 0.0;
  double delta_c = 0.0;  ///< omega_L - omega_cav
  double delta_a = 0.0;  ///< omega_L - omega_a
  double eta = 0.0;      ///< coherent drive amplitude

  void validate() const {
    detail::require(std::isfinite(g) && std::isfinite(kappa) && std::isfinite(gamma) &&
                        std::isfinite(delta_c) && std::isfinite(delta_a) && std::isfinite(eta),
                    "SystemParams: non-finite value");
    detail::require(g >= 0 && kappa >= 0 && gamma >= 0 && eta >= 0,
                    "SystemParams: g, kappa, gamma and eta must be non-negative");
  }

  /// omega_a - omega_cav, expressed through the two laser detunings.
  double atom_cavity_detuning() const { return delta_c - delta_a; }

  /// Moves the laser to a new cavity detuning keeping omega_a - omega_cav fixed.
  SystemParams with_laser_detuning(double new_delta_c) const {
    SystemParams p = *this;
    const double delta = atom_cavity_detuning();
    p.delta_c = new_delta_c;
    p.delta_a = new_delta_c - delta;
    return p;
  }

  SystemParams with_eta(double new_eta) const {
    SystemParams p = *this;
    p.eta = new_eta;
    return p;
  }

  /// Photon number the drive would build up in the empty cavity on resonance.
  double empty_cavity_photons() const { return kappa > 0 ? (eta * eta) / (kappa * kappa) : INFINITY; }

  static double eta_for_empty_cavity_photons(double n_empty, double kappa) {
    detail::require(n_empty >= 0 && kappa > 0, "eta_for_empty_cavity_photons: need n_empty >= 0, kappa > 0");
    return kappa * std::sqrt(n_empty);
  }

  friend bool operator==(const SystemParams&, const SystemParams&) = default;
};

/// H = -dc a'a - da s+s- + g(a's- + a s+) + eta(a + a'), frame rotating at omega_L.
inline CMatrix hamiltonian(const SystemParams& p, const Operators& ops) {
  return -p.delta_c * ops.number.matrix() -
         p.delta_a * (ops.sigma_plus * ops.sigma_minus).matrix() +
         p.g * (ops.a_dag * ops.sigma_minus + ops.a * ops.sigma_plus).matrix() +
         p.eta * (ops.a + ops.a_dag).matrix();
}

/// H - i(kappa a'a + gamma s+s-): generator of the no-jump evolution.
inline CMatrix effective_hamiltonian(const SystemParams& p, const Operators& ops) {
  return hamiltonian(p, ops) -
         kI * (p.kappa * ops.number.matrix() + p.gamma * (ops.sigma_plus * ops.sigma_minus).matrix());
}

enum class Branch { lower, upper };

struct DressedLevel {
  int n = 0;
  Branch branch = Branch::lower;
  double energy = 0.0;         ///< eigenfrequency relative to n*omega_L
  double cavity_weight = 0.0;  ///< |<g,n|n,+-|>|^2
  double linewidth = 0.0;      ///< population decay rate
};

/// Exact 2x2 diagonalization of the n-excitation block spanned by
/// {|g,n>, |e,n-1>}. The linewidth is the decay rate of the level's
/// population, 2*kappa*<a'a> + 2*gamma*<s+s->.
inline std::pair<DressedLevel, DressedLevel> dressed_levels(const SystemParams& p, int n) {
  detail::require(n >= 1, "dressed_levels: n must be >= 1");
  detail::require(p.g > 0, "dressed_levels: g must be > 0");
  const double nn = n;
  const double h_gg = -nn * p.delta_c;
  const double h_ee = -(nn - 1.0) * p.delta_c - p.delta_a;
  const double coupling = std::sqrt(nn) * p.g;
  const double mean = 0.5 * (h_gg + h_ee);
  const double half_split = 0.5 * (h_gg - h_ee);
  const double root = std::hypot(half_split, coupling);

  auto make = [&](Branch b) {
    const double e = b == Branch::lower ? mean - root : mean + root;
    // Eigenvector (c, s) of [[h_gg, V], [V, h_ee]]: c*(h_gg - e) + s*V = 0.
    // Pick the better-conditioned row to avoid 0/0 at large splittings.
    double c, s;
    if (std::abs(h_gg - e) > std::abs(h_ee - e)) {
      c = coupling;
      s = e - h_gg;
    } else {
      c = e - h_ee;
      s = coupling;
    }
    const double norm2 = c * c + s * s;
    const double cw = c * c / norm2;
    const double aw = 1.0 - cw;
    DressedLevel lvl;
    lvl.n = n;
    lvl.branch = b;
    lvl.energy = e;
    lvl.cavity_weight = cw;
    lvl.linewidth = 2.0 * p.kappa * (nn * cw + (nn - 1.0) * aw) + 2.0 * p.gamma * aw;
    return lvl;
  };
  return {make(Branch::lower), make(Branch::upper)};
}

/// Throws when a dressed level of excitation n is not representable in space.
inline void check_level_fits(int n, const HilbertSpace& space) {
  detail::require(n <= space.n_max(), "dressed level excitation number exceeds the space truncation");
}

/// Laser-cavity detuning at which two laser photons are resonant with |2,branch>,
/// holding omega_a - omega_cav fixed. In the laser frame the level energy is
/// -2*dc + delta/2 -+ sqrt(2 g^2 + delta^2/4), which vanishes on resonance.
inline double two_photon_resonance(const SystemParams& p, Branch branch) {
  const double delta = p.atom_cavity_detuning();
  const double root = std::sqrt(2.0 * p.g * p.g + 0.25 * delta * delta);
  const double sign = branch == Branch::lower ? -1.0 : 1.0;
  return 0.5 * (0.5 * delta + sign * root);
}

/// Same construction for the single-excitation normal modes |1,branch>.
inline double normal_mode_resonance(const SystemParams& p, Branch branch) {
  const double delta = p.atom_cavity_detuning();
  const double root = std::sqrt(p.g * p.g + 0.25 * delta * delta);
  const double sign = branch == Branch::lower ? -1.0 : 1.0;
  return 0.5 * delta + sign * root;
}

}  // namespace cqed
