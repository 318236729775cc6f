#pragma once

// Hanbury Brown-Twiss coincidence analysis of a two-channel click stream:
// windowed start-multistop histogram, long-delay baseline, and normalization
// to g2(tau) and excess coincidences C2(tau).
//
// Conventions:
//  * bins have width `window` and are centered on k*window, so tau = 0 is a
//    bin center;
//  * tau = t2 - t1 for a channel-1 click at t1 and a channel-2 click at t2;
//    the exchanged ordering (channel 2 as trigger) is added at -tau, which
//    makes the histogram symmetric and counts every pair twice in total;
//  * pairs whose clicks lie in different segments are never counted, and
//    each bin carries the exposure fraction sum_s max(0, L_s - |tau|) / sum_s L_s
//    so that accidentals are flat after division by it.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "cqed/correlations.hpp"
#include "cqed/error.hpp"
#include "cqed/parallel.hpp"
#include "cqed/trajectories.hpp"

namespace cqed {

struct CoincidenceHistogram {
  double window = 0.0;
  int half_bins = 0;                 ///< bins k = -half_bins..half_bins
  std::vector<std::int64_t> counts;  ///< both orderings combined
  std::vector<double> variance;      ///< Poisson variance of counts
  std::vector<double> exposure;      ///< pair-exposure fraction per bin
  std::int64_t n_starts = 0;
  double total_time = 0.0;
  std::optional<double> baseline;    ///< mean accidental counts per bin
  double baseline_err = 0.0;

  std::size_t size() const { return counts.size(); }
  double center(std::size_t i) const { return (static_cast<double>(i) - half_bins) * window; }
  std::vector<double> centers() const {
    std::vector<double> c(size());
    for (std::size_t i = 0; i < size(); ++i) c[i] = center(i);
    return c;
  }
  /// Lower and upper edges of all bins, size() + 1 values.
  std::vector<double> bin_edges() const {
    std::vector<double> e(size() + 1);
    for (std::size_t i = 0; i <= size(); ++i) e[i] = (static_cast<double>(i) - half_bins - 0.5) * window;
    return e;
  }
  std::size_t zero_bin() const { return static_cast<std::size_t>(half_bins); }
};

namespace detail {

inline void require_sorted(const std::vector<double>& ch, const char* name) {
  for (std::size_t i = 1; i < ch.size(); ++i)
    if (ch[i] < ch[i - 1])
      throw InvalidArgument(std::string("correlate: ") + name + " is not sorted (index " + std::to_string(i) + ")");
}

}  // namespace detail

inline CoincidenceHistogram correlate(const ClickStream& stream, double window, double tau_max, int jobs = 1) {
  detail::require(window > 0, "correlate: window must be > 0");
  detail::require(tau_max >= 10 * window, "correlate: tau_max must be at least 10 windows");
  detail::require_sorted(stream.channel1, "channel 1");
  detail::require_sorted(stream.channel2, "channel 2");

  CoincidenceHistogram h;
  h.window = window;
  h.half_bins = static_cast<int>(std::floor(tau_max / window + 1e-9));
  const std::size_t nb = 2 * static_cast<std::size_t>(h.half_bins) + 1;
  const double reach = (h.half_bins + 0.5) * window;

  std::vector<Segment> segs = stream.segments;
  if (segs.empty()) segs.push_back({0.0, stream.duration});

  // One work item per segment; each fills its own one-sided histogram.
  std::vector<std::vector<std::int64_t>> partial(segs.size());
  parallel_for(segs.size(), jobs, [&](std::size_t si) {
    const auto& seg = segs[si];
    auto& fwd = partial[si];
    fwd.assign(nb, 0);
    const auto lo1 = std::lower_bound(stream.channel1.begin(), stream.channel1.end(), seg.start);
    const auto hi1 = std::upper_bound(lo1, stream.channel1.end(), seg.end);
    const auto lo2 = std::lower_bound(stream.channel2.begin(), stream.channel2.end(), seg.start);
    const auto hi2 = std::upper_bound(lo2, stream.channel2.end(), seg.end);
    auto first = lo2;
    for (auto it = lo1; it != hi1; ++it) {
      const double t1 = *it;
      while (first != hi2 && *first < t1 - reach) ++first;
      for (auto j = first; j != hi2 && *j < t1 + reach; ++j) {
        const auto k = static_cast<long>(std::floor((*j - t1) / window + 0.5));
        if (k < -h.half_bins || k > h.half_bins) continue;
        ++fwd[static_cast<std::size_t>(k + h.half_bins)];
      }
    }
  });

  std::vector<std::int64_t> fwd(nb, 0);
  for (const auto& p : partial)
    for (std::size_t i = 0; i < nb; ++i) fwd[i] += p[i];

  h.counts.resize(nb);
  h.variance.resize(nb);
  for (std::size_t i = 0; i < nb; ++i) {
    const std::size_t mirror = nb - 1 - i;
    h.counts[i] = fwd[i] + fwd[mirror];
    // In the zero bin each pair is counted twice, doubling the variance per count.
    h.variance[i] = i == mirror ? 4.0 * static_cast<double>(fwd[i]) : static_cast<double>(h.counts[i]);
  }

  double total = 0.0;
  for (const auto& s : segs) total += s.length();
  h.total_time = total;
  h.exposure.resize(nb);
  for (std::size_t i = 0; i < nb; ++i) {
    const double tau = std::abs(h.center(i));
    double e = 0.0;
    for (const auto& s : segs) e += std::max(0.0, s.length() - tau);
    h.exposure[i] = total > 0 ? e / total : 0.0;
  }
  h.n_starts = static_cast<std::int64_t>(stream.channel1.size() + stream.channel2.size());
  return h;
}

struct Baseline {
  double value = 0.0;
  double error = 0.0;
  std::size_t bins_used = 0;
};

/// Mean exposure-corrected counts over bins with |tau| > 10/kappa; stores the
/// result in the histogram.
inline Baseline baseline(CoincidenceHistogram& hist, double kappa) {
  detail::require(kappa > 0, "baseline: kappa must be > 0");
  const double cut = 10.0 / kappa;
  double sum = 0.0, var = 0.0;
  std::size_t n = 0, neg = 0, pos = 0;
  for (std::size_t i = 0; i < hist.size(); ++i) {
    const double tau = hist.center(i);
    if (std::abs(tau) <= cut || hist.exposure[i] <= 0) continue;
    sum += static_cast<double>(hist.counts[i]) / hist.exposure[i];
    var += hist.variance[i] / (hist.exposure[i] * hist.exposure[i]);
    ++n;
    (tau < 0 ? neg : pos)++;
  }
  if (neg < 2 || pos < 2)
    throw InvalidArgument("baseline: insufficient long-delay bins beyond 10/kappa (extend tau_max)");
  Baseline b{sum / static_cast<double>(n), std::sqrt(var) / static_cast<double>(n), n};
  hist.baseline = b.value;
  hist.baseline_err = b.error;
  return b;
}

struct NormalizedCorrelation {
  std::vector<double> tau;
  std::vector<double> expected_accidentals;
  std::vector<double> g2, g2_err;
  std::vector<double> c2_excess, c2_err;
};

inline NormalizedCorrelation normalize(const CoincidenceHistogram& hist) {
  if (!hist.baseline) throw InvalidArgument("normalize: baseline has not been computed");
  const double b = *hist.baseline;
  if (!(b > 0)) throw InvalidArgument("normalize: zero baseline, only raw counts are available");
  const double sb = hist.baseline_err;
  NormalizedCorrelation out;
  for (std::size_t i = 0; i < hist.size(); ++i) {
    const double e = hist.exposure[i];
    const double c = static_cast<double>(hist.counts[i]);
    const double acc = e * b;
    out.tau.push_back(hist.center(i));
    out.expected_accidentals.push_back(acc);
    out.g2.push_back(acc > 0 ? c / acc : 0.0);
    out.g2_err.push_back(acc > 0 ? std::sqrt(hist.variance[i] / (acc * acc) + std::pow(c * sb / (b * acc), 2)) : 0.0);
    out.c2_excess.push_back(c - acc);
    out.c2_err.push_back(std::sqrt(hist.variance[i] + e * e * sb * sb));
  }
  return out;
}

/// Regression C2(tau) averaged over each histogram bin. Bins reaching past
/// the end of the trace get NaN.
inline std::vector<double> binned_model(const CorrelationTrace& trace, const CoincidenceHistogram& hist) {
  detail::require(trace.size() >= 2, "binned_model: trace too short");
  std::vector<double> out(hist.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < hist.size(); ++i) {
    const double c = hist.center(i);
    if (std::abs(c) + hist.window / 2 <= trace.delays.back())
      out[i] = boxcar_average(trace.delays, trace.c2, c, hist.window);
  }
  return out;
}

/// One calibration constant between dimensionless C2 and excess coincidence
/// counts. It lumps mirror transmission, losses, detection efficiency and
/// exposure time into a single number.
struct ScaleFit {
  double factor = 0.0;
  double error = 0.0;
  double chi2_per_dof = 0.0;
  std::size_t points = 0;
};

/// Weighted least squares for data = factor * model, without offset.
/// Points with a non-finite model value or a non-positive sigma are skipped.
inline ScaleFit fit_scale(const std::vector<double>& model, const std::vector<double>& data,
                          const std::vector<double>& sigma) {
  detail::require(model.size() == data.size() && data.size() == sigma.size(), "fit_scale: size mismatch");
  double smm = 0.0, smd = 0.0;
  ScaleFit f;
  for (std::size_t i = 0; i < model.size(); ++i) {
    if (!std::isfinite(model[i]) || !std::isfinite(data[i]) || !(sigma[i] > 0)) continue;
    const double w = 1.0 / (sigma[i] * sigma[i]);
    smm += w * model[i] * model[i];
    smd += w * model[i] * data[i];
    ++f.points;
  }
  if (f.points < 2 || !(smm > 0)) throw InvalidArgument("fit_scale: fewer than two usable bins");
  f.factor = smd / smm;
  f.error = 1.0 / std::sqrt(smm);
  double chi2 = 0.0;
  for (std::size_t i = 0; i < model.size(); ++i) {
    if (!std::isfinite(model[i]) || !std::isfinite(data[i]) || !(sigma[i] > 0)) continue;
    chi2 += std::pow((data[i] - f.factor * model[i]) / sigma[i], 2);
  }
  f.chi2_per_dof = chi2 / static_cast<double>(f.points - 1);
  return f;
}

/// |sum_k y_k exp(-2 pi i f_m x_k)| for f_m = m / span, m = 0..n_freqs-1,
/// where span is the extent of the uniform grid (n points times spacing).
inline std::vector<double> discrete_spectrum(const std::vector<double>& xs, const std::vector<double>& ys,
                                             std::size_t n_freqs) {
  detail::require(xs.size() == ys.size() && xs.size() >= 2, "discrete_spectrum: bad grid");
  const double span = (xs.back() - xs.front()) * static_cast<double>(xs.size()) / static_cast<double>(xs.size() - 1);
  std::vector<double> out(n_freqs);
  for (std::size_t m = 0; m < n_freqs; ++m) {
    std::complex<double> acc{};
    const double f = static_cast<double>(m) / span;
    for (std::size_t k = 0; k < xs.size(); ++k) acc += ys[k] * std::polar(1.0, -2.0 * std::numbers::pi * f * xs[k]);
    out[m] = std::abs(acc);
  }
  return out;
}

}  // namespace cqed
