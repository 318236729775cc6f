#pragma once

// Parameter scans over the laser detuning and the drive strength.

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "cqed/correlations.hpp"
#include "cqed/dynamics.hpp"
#include "cqed/parallel.hpp"
#include "cqed/version.hpp"

namespace cqed {

struct ScanOptions {
  int n_max = 6;
  std::optional<double> window;  ///< also compute the windowed C2 for this window
  double trace_step = 0.0;       ///< delay step for windowed/trace evaluation; 0 selects window/200
  std::optional<double> trace_tau_max;  ///< keep full traces up to this delay
  int jobs = 1;
};

struct ScanFailure {
  std::size_t index = 0;
  std::string message;
};

struct ScanResult {
  std::vector<double> axis;
  std::vector<double> mean_n;
  std::vector<double> mean_n_squared;
  std::vector<double> g2_zero;
  std::vector<double> c2_zero;
  std::vector<double> windowed_c2;
  std::vector<double> top_fock_population;
  std::vector<CorrelationTrace> traces;  ///< filled when ScanOptions::trace_tau_max is set
  SystemParams params;
  ScanOptions options;
  std::vector<ScanFailure> failures;
  std::string version = kVersion;

  std::size_t size() const { return axis.size(); }
};

/// Truncation is flagged when the top Fock level holds more than this.
inline constexpr double kTruncationTolerance = 1e-10;

/// Steady-state observables along the laser-cavity detuning axis. The drive
/// amplitude is held fixed and the laser moves with omega_a - omega_cav fixed.
inline ScanResult scan_detuning(const SystemParams& base, const std::vector<double>& axis, const ScanOptions& opt = {}) {
  base.validate();
  detail::require(!axis.empty(), "scan_detuning: empty axis");
  detail::require(std::is_sorted(axis.begin(), axis.end()), "scan_detuning: axis must be sorted");
  const HilbertSpace space(opt.n_max);
  const std::size_t n = axis.size();
  const double nan = std::numeric_limits<double>::quiet_NaN();

  ScanResult r;
  r.axis = axis;
  r.params = base;
  r.options = opt;
  r.mean_n.assign(n, nan);
  r.mean_n_squared.assign(n, nan);
  r.g2_zero.assign(n, nan);
  r.c2_zero.assign(n, nan);
  r.windowed_c2.assign(n, nan);
  r.top_fock_population.assign(n, nan);
  if (opt.trace_tau_max) r.traces.resize(n);
  std::vector<std::string> errors(n);

  double tau_needed = 0.0;
  if (opt.window) tau_needed = *opt.window / 2;
  if (opt.trace_tau_max) tau_needed = std::max(tau_needed, *opt.trace_tau_max);
  double step = opt.trace_step;
  if (step <= 0) step = opt.window ? *opt.window / 200 : tau_needed / 200;

  parallel_for(n, opt.jobs, [&](std::size_t i) {
    try {
      const SystemParams p = base.with_laser_detuning(axis[i]);
      const Liouvillian l(p, space);
      const DensityState rho = steady_state(l);
      const double mn = mean_photon_number(rho);
      r.mean_n[i] = mn;
      r.mean_n_squared[i] = mn * mn;
      r.c2_zero[i] = c2_zero(rho);
      r.g2_zero[i] = mn > 0 ? g2_zero(rho) : nan;
      r.top_fock_population[i] = rho.top_fock_population(space);
      if (tau_needed > 0 && mn > 0) {
        const auto tr = g2_tau(l, rho, uniform_delays(tau_needed, step));
        if (opt.window) r.windowed_c2[i] = windowed_c2(tr, *opt.window).value;
        if (opt.trace_tau_max) r.traces[i] = tr;
      }
    } catch (const Error& e) {
      errors[i] = e.what();
    }
  });
  for (std::size_t i = 0; i < n; ++i)
    if (!errors[i].empty()) r.failures.push_back({i, errors[i]});
  return r;
}

/// Evenly spaced axis with `points` samples from lo to hi inclusive.
inline std::vector<double> linspace(double lo, double hi, std::size_t points) {
  detail::require(points >= 2, "linspace: need at least two points");
  std::vector<double> out(points);
  for (std::size_t i = 0; i < points; ++i)
    out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
  return out;
}

struct DriveScanRow {
  double eta = 0.0;
  double n_empty = 0.0;
  double mean_n = 0.0;
  double g2_zero = 0.0;
  double c2_zero = 0.0;
  double p_g1 = 0.0;
};

struct DriveScan {
  std::vector<DriveScanRow> rows;
  double slope = 0.0;  ///< d log|C2(0)| / d log n_empty
  std::vector<std::string> warnings;
};

/// Ordinary least-squares slope of y against x.
inline double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  detail::require(x.size() == y.size() && x.size() >= 2, "fit_slope: need at least two points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(y.size());
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) sxy += (x[i] - mx) * (y[i] - my), sxx += (x[i] - mx) * (x[i] - mx);
  detail::require(sxx > 0, "fit_slope: degenerate abscissa");
  return sxy / sxx;
}

inline DriveScan scan_drive(const SystemParams& base, const std::vector<double>& eta_values, int n_max = 6,
                            int jobs = 1) {
  base.validate();
  detail::require(!eta_values.empty(), "scan_drive: no drive values");
  const HilbertSpace space(n_max);
  DriveScan out;
  out.rows.resize(eta_values.size());
  parallel_for(eta_values.size(), jobs, [&](std::size_t i) {
    const SystemParams p = base.with_eta(eta_values[i]);
    const DensityState rho = steady_state(Liouvillian(p, space));
    DriveScanRow row;
    row.eta = eta_values[i];
    row.n_empty = p.empty_cavity_photons();
    row.mean_n = mean_photon_number(rho);
    row.g2_zero = row.mean_n > 0 ? g2_zero(rho) : std::numeric_limits<double>::quiet_NaN();
    row.c2_zero = c2_zero(rho);
    row.p_g1 = rho.matrix()(space.index(1, 0), space.index(1, 0)).real();
    out.rows[i] = row;
  });

  std::vector<double> lx, ly;
  for (const auto& row : out.rows) {
    if (row.p_g1 > 0.05)
      out.warnings.push_back("eta=" + std::to_string(row.eta) + ": P(g,1)=" + std::to_string(row.p_g1) +
                             " exceeds the weak-drive range");
    if (row.n_empty > 0 && row.c2_zero != 0) {
      lx.push_back(std::log(row.n_empty));
      ly.push_back(std::log(std::abs(row.c2_zero)));
    }
  }
  out.slope = lx.size() >= 2 ? fit_slope(lx, ly) : std::numeric_limits<double>::quiet_NaN();
  return out;
}

}  // namespace cqed
