#pragma once

// Reference implementations used only by the tests. They share no code with
// the library beyond the Eigen matrix types: operators are written out
// element by element, the master equation is integrated in Schrodinger form
// with classical RK4, and coincidences are counted pair by pair.

#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using cd = std::complex<double>;
using Mat = Eigen::MatrixXcd;

struct Params {
  double g, kappa, gamma, dc, da, eta;
};

inline int idx(int n, int s) { return 2 * n + s; }

/// Annihilation operator on the truncated field times identity on the atom.
inline Mat field_a(int n_max) {
  const int d = 2 * (n_max + 1);
  Mat a = Mat::Zero(d, d);
  for (int n = 1; n <= n_max; ++n)
    for (int s = 0; s < 2; ++s) a(idx(n - 1, s), idx(n, s)) = std::sqrt(static_cast<double>(n));
  return a;
}

inline Mat atom_lower(int n_max) {
  const int d = 2 * (n_max + 1);
  Mat sm = Mat::Zero(d, d);
  for (int n = 0; n <= n_max; ++n) sm(idx(n, 0), idx(n, 1)) = 1.0;
  return sm;
}

/// Hamiltonian assembled from its matrix elements in the |n, s> basis.
inline Mat hamiltonian(const Params& p, int n_max) {
  const int d = 2 * (n_max + 1);
  Mat h = Mat::Zero(d, d);
  for (int n = 0; n <= n_max; ++n) {
    h(idx(n, 0), idx(n, 0)) = -p.dc * n;
    h(idx(n, 1), idx(n, 1)) = -p.dc * n - p.da;
    if (n >= 1) {
      // <g,n| g a' s- |e,n-1> = g sqrt(n)
      h(idx(n, 0), idx(n - 1, 1)) = p.g * std::sqrt(double(n));
      h(idx(n - 1, 1), idx(n, 0)) = p.g * std::sqrt(double(n));
      for (int s = 0; s < 2; ++s) {
        h(idx(n, s), idx(n - 1, s)) = p.eta * std::sqrt(double(n));
        h(idx(n - 1, s), idx(n, s)) = p.eta * std::sqrt(double(n));
      }
    }
  }
  return h;
}

inline Mat lindblad_rhs(const Mat& h, const Mat& a, const Mat& sm, double kappa, double gamma, const Mat& rho) {
  const cd i{0.0, 1.0};
  auto dissipator = [&](const Mat& c, double rate) -> Mat {
    const Mat cdc = c.adjoint() * c;
    return rate * (c * rho * c.adjoint() - 0.5 * (cdc * rho + rho * cdc));
  };
  return -i * (h * rho - rho * h) + dissipator(a, 2 * kappa) + dissipator(sm, 2 * gamma);
}

/// Fixed-step RK4 of the master equation.
inline Mat rk4_evolve(const Params& p, int n_max, Mat rho, double t, int steps) {
  const Mat h = hamiltonian(p, n_max);
  const Mat a = field_a(n_max);
  const Mat sm = atom_lower(n_max);
  const double dt = t / steps;
  for (int k = 0; k < steps; ++k) {
    const Mat k1 = lindblad_rhs(h, a, sm, p.kappa, p.gamma, rho);
    const Mat k2 = lindblad_rhs(h, a, sm, p.kappa, p.gamma, rho + 0.5 * dt * k1);
    const Mat k3 = lindblad_rhs(h, a, sm, p.kappa, p.gamma, rho + 0.5 * dt * k2);
    const Mat k4 = lindblad_rhs(h, a, sm, p.kappa, p.gamma, rho + dt * k3);
    rho += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return rho;
}

inline Mat ground(int n_max) {
  const int d = 2 * (n_max + 1);
  Mat rho = Mat::Zero(d, d);
  rho(0, 0) = 1.0;
  return rho;
}

/// Steady state by relaxing the ground state for `t`.
inline Mat relaxed_state(const Params& p, int n_max, double t, int steps) {
  return rk4_evolve(p, n_max, ground(n_max), t, steps);
}

inline double mean_n(const Mat& rho, int n_max) {
  double s = 0;
  for (int n = 0; n <= n_max; ++n)
    for (int q = 0; q < 2; ++q) s += n * rho(idx(n, q), idx(n, q)).real();
  return s;
}

inline double factorial_moment2(const Mat& rho, int n_max) {
  double s = 0;
  for (int n = 2; n <= n_max; ++n)
    for (int q = 0; q < 2; ++q) s += double(n) * (n - 1) * rho(idx(n, q), idx(n, q)).real();
  return s;
}

/// First-order cavity amplitude in the weak-drive limit, written out from
/// the 2x2 linear system by Cramer's rule.
inline cd weak_amp_g1(const Params& p) {
  const cd dk{p.dc, p.kappa}, dg{p.da, p.gamma};
  return p.eta * dg / (dk * dg - p.g * p.g);
}

/// Pair counts n_k of (t2 - t1) in bins of width w centered at k w, for
/// k = -half..half, clicks restricted to a common segment.
inline std::vector<std::int64_t> brute_force_coincidences(const std::vector<double>& ch1, const std::vector<double>& ch2,
                                                          const std::vector<std::pair<double, double>>& segments,
                                                          double w, int half) {
  std::vector<std::int64_t> fwd(2 * half + 1, 0);
  auto segment_of = [&](double t) {
    for (std::size_t s = 0; s < segments.size(); ++s)
      if (t >= segments[s].first && t <= segments[s].second) return static_cast<long>(s);
    return -1L;
  };
  for (double t1 : ch1)
    for (double t2 : ch2) {
      if (segment_of(t1) != segment_of(t2)) continue;
      const long k = std::lround(std::floor((t2 - t1) / w + 0.5));
      if (k < -half || k > half) continue;
      ++fwd[k + half];
    }
  std::vector<std::int64_t> both(fwd.size());
  for (std::size_t i = 0; i < fwd.size(); ++i) both[i] = fwd[i] + fwd[fwd.size() - 1 - i];
  return both;
}

/// Plain DFT magnitude of samples y(x) at frequency f.
inline double dft_magnitude(const std::vector<double>& x, const std::vector<double>& y, double f) {
  cd acc{};
  for (std::size_t k = 0; k < x.size(); ++k) acc += y[k] * std::exp(cd{0.0, -2.0 * M_PI * f * x[k]});
  return std::abs(acc);
}

}  // namespace oracle
