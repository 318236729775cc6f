#pragma once

// Equal-time and two-time photon correlations of the cavity field.

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "cqed/dynamics.hpp"
#include "cqed/error.hpp"
#include "cqed/hilbert.hpp"

namespace cqed {

namespace detail {

struct FieldMoments {
  double n = 0.0;   // <a'a>
  double g2 = 0.0;  // <a'a'aa>
};

inline FieldMoments field_moments(const CMatrix& rho) {
  const int d = static_cast<int>(rho.rows());
  detail::require(d % 2 == 0 && d >= 6, "field_moments: matrix is not an atom (x) field operator");
  FieldMoments m;
  // Both moments are diagonal in the Fock basis.
  for (int i = 0; i < d; ++i) {
    const double n = i / 2;
    const double p = rho(i, i).real();
    m.n += n * p;
    m.g2 += n * (n - 1.0) * p;
  }
  return m;
}

}  // namespace detail

/// <a'a> of a state on the truncated space.
inline double mean_photon_number(const DensityState& rho) { return detail::field_moments(rho.matrix()).n; }

/// <a'^2 a^2> - <a'a>^2; defined for every state, vacuum included.
inline double c2_zero(const DensityState& rho) {
  const auto m = detail::field_moments(rho.matrix());
  return m.g2 - m.n * m.n;
}

/// <a'^2 a^2> / <a'a>^2.
inline double g2_zero(const DensityState& rho) {
  const auto m = detail::field_moments(rho.matrix());
  if (!(m.n > 0)) throw InvalidArgument("g2_zero: <a'a> = 0, the normalized correlation is undefined");
  return m.g2 / (m.n * m.n);
}

struct CorrelationTrace {
  std::vector<double> delays;  ///< tau >= 0, ascending
  std::vector<double> g2;
  std::vector<double> c2;
  double mean_n = 0.0;

  std::size_t size() const { return delays.size(); }
};

/// Two-time correlation from the quantum regression theorem:
/// G2(tau) = tr[a'a exp(L tau)(a rho a')].
inline CorrelationTrace g2_tau(const Liouvillian& l, const DensityState& rho_ss, const std::vector<double>& delays) {
  detail::require(!delays.empty(), "g2_tau: empty delay grid");
  detail::require(delays.front() >= 0, "g2_tau: delays must be >= 0");
  detail::require(std::is_sorted(delays.begin(), delays.end()), "g2_tau: delays must be sorted");

  const auto& ops = l.operators();
  const double n_ss = mean_photon_number(rho_ss);
  if (!(n_ss > 0)) throw InvalidArgument("g2_tau: steady state has no photons");

  CorrelationTrace out;
  out.mean_n = n_ss;
  out.delays = delays;
  out.g2.reserve(delays.size());
  out.c2.reserve(delays.size());

  const CVector number_row = vectorize(ops.number.matrix().transpose());
  CVector seed = vectorize(ops.a.matrix() * rho_ss.matrix() * ops.a_dag.matrix());
  PropagatorCache cache(l);
  double t = 0.0;
  for (double tau : delays) {
    const double step = tau - t;
    if (step > 0) {
      try {
        seed = cache.get(step).apply_vec(seed);
      } catch (const NumericalError& e) {
        throw NumericalError(std::string("g2_tau: propagation failed at tau=") + std::to_string(tau) + ": " + e.what());
      }
      t = tau;
    }
    // tr(N X) = sum_ij N_ji X_ij = vec(N^T) . vec(X)
    const double big_g = number_row.transpose().dot(seed).real();
    out.g2.push_back(big_g / (n_ss * n_ss));
    out.c2.push_back(big_g - n_ss * n_ss);
  }
  return out;
}

/// Uniform grid 0, step, ..., covering [0, tau_max].
inline std::vector<double> uniform_delays(double tau_max, double step) {
  detail::require(step > 0 && tau_max >= 0, "uniform_delays: need step > 0 and tau_max >= 0");
  const auto n = static_cast<std::size_t>(std::llround(tau_max / step));
  std::vector<double> out(n + 1);
  for (std::size_t i = 0; i <= n; ++i) out[i] = static_cast<double>(i) * step;
  return out;
}

/// Linear interpolation of a sampled curve at x inside the grid.
inline double interpolate(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
  detail::require(xs.size() == ys.size() && !xs.empty(), "interpolate: bad grid");
  if (x <= xs.front()) return ys.front();
  if (x >= xs.back()) return ys.back();
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - xs.begin());
  const double f = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
  return ys[i - 1] + f * (ys[i] - ys[i - 1]);
}

/// Trapezoid integral of the sampled curve from xs.front() to upper.
inline double integrate_to(const std::vector<double>& xs, const std::vector<double>& ys, double upper) {
  double acc = 0.0;
  for (std::size_t i = 1; i < xs.size() && xs[i - 1] < upper; ++i) {
    const double x1 = std::min(xs[i], upper);
    const double y1 = xs[i] <= upper ? ys[i] : interpolate(xs, ys, upper);
    acc += 0.5 * (ys[i - 1] + y1) * (x1 - xs[i - 1]);
  }
  return acc;
}

/// Integral of C2(tau) over tau in [-window/2, window/2]; the result carries
/// units of time (photon number squared times delay). Multiply by the squared
/// detected photon flux per intracavity photon to obtain an excess
/// coincidence rate.
struct WindowedC2 {
  double value = 0.0;
  double window = 0.0;
  static constexpr const char* convention = "integral of C2(tau) over |tau| <= window/2, units photon^2 x time";
};

inline WindowedC2 windowed_c2(const CorrelationTrace& trace, double window) {
  detail::require(window > 0, "windowed_c2: window must be > 0");
  detail::require(trace.size() >= 2 && trace.delays.front() == 0.0, "windowed_c2: trace must start at tau = 0");
  if (window / 2 > trace.delays.back()) throw InvalidArgument("windowed_c2: window exceeds the trace range");
  return {2.0 * integrate_to(trace.delays, trace.c2, window / 2), window};
}

/// Boxcar average of g2(tau) over [center - width/2, center + width/2], using
/// g2(-tau) = g2(tau).
inline double boxcar_average(const std::vector<double>& delays, const std::vector<double>& values, double center,
                             double width) {
  detail::require(width > 0, "boxcar_average: width must be > 0");
  const double lo = center - width / 2;
  const double hi = center + width / 2;
  detail::require(std::max(std::abs(lo), std::abs(hi)) <= delays.back(), "boxcar_average: window exceeds trace");
  auto integral = [&](double x) {  // signed integral from 0 to x of the even extension
    const double v = integrate_to(delays, values, std::abs(x));
    return x < 0 ? -v : v;
  };
  return (integral(hi) - integral(lo)) / width;
}

/// Half width at half maximum of a peak at tau = 0, by linear interpolation
/// of the first downward crossing. Returns NaN when no crossing exists.
inline double half_width_half_max(const std::vector<double>& delays, const std::vector<double>& values) {
  detail::require(delays.size() == values.size() && delays.size() >= 2, "half_width_half_max: bad grid");
  const double half = values.front() / 2;
  for (std::size_t i = 1; i < delays.size(); ++i) {
    if (values[i] < half) {
      const double f = (values[i - 1] - half) / (values[i - 1] - values[i]);
      return delays[i - 1] + f * (delays[i] - delays[i - 1]);
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace cqed
