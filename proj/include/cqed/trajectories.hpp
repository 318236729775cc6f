#pragma once

// Monte Carlo wave-function unraveling of the driven, damped Jaynes-Cummings
// system. Jump operators are sqrt(2 kappa) a (cavity output, detectable) and
// sqrt(2 gamma) s- (spontaneous emission, never detected). Detected photons
// pass a 50/50 splitter onto two virtual detectors.
//
// Time is divided into slices of length dt on which the coupling is constant.
// Without micromotion there is one slice type; with micromotion the period is
// split into M = 2^m slices and g(t) = g0 (1 + eps sin(2 pi t / period + phi))
// is sampled at slice midpoints, phi quantized to the slice grid.
//
// Waiting times use the norm-threshold method: the unnormalized no-jump state
// decays monotonically, and a jump happens when |psi|^2 falls to a uniform
// random threshold. Products of 2^k consecutive slice propagators are
// tabulated, so locating the slice that contains the next jump costs O(log)
// matrix-vector products; the jump time inside that slice is refined by
// Illinois regula falsi on log |psi|^2.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "cqed/error.hpp"
#include "cqed/hilbert.hpp"
#include "cqed/parallel.hpp"

namespace cqed {

enum class PhasePolicy { fixed, random_per_trajectory };

struct Micromotion {
  double depth = 0.1;   ///< relative modulation of g
  double period = 0.0;  ///< modulation period, same time unit as 1/frequency
  PhasePolicy phase_policy = PhasePolicy::random_per_trajectory;
  double phase = 0.0;   ///< used with PhasePolicy::fixed, radians
};

struct TrajectoryConfig {
  SystemParams params;
  int n_max = 6;
  double duration = 0.0;  ///< recorded time per trajectory
  double dt = 0.0;        ///< slice length (upper bound when micromotion is on)
  std::uint64_t seed = 0;
  double detection_efficiency = 1.0;
  std::optional<Micromotion> micromotion;
  /// Discarded prefix per trajectory; negative selects 10/kappa.
  double thermalization = -1.0;

  double thermalization_time() const { return thermalization >= 0 ? thermalization : 10.0 / params.kappa; }

  double peak_coupling() const { return params.g * (1.0 + (micromotion ? std::abs(micromotion->depth) : 0.0)); }

  void validate() const {
    params.validate();
    detail::require(params.kappa > 0, "TrajectoryConfig: kappa must be > 0");
    detail::require(n_max >= 2, "TrajectoryConfig: n_max must be >= 2");
    detail::require(duration > 0 && std::isfinite(duration), "TrajectoryConfig: duration must be > 0");
    detail::require(dt > 0, "TrajectoryConfig: dt must be > 0");
    const double stiffness = dt * (2 * params.kappa + 2 * params.gamma + peak_coupling());
    detail::require(stiffness < 0.05, "TrajectoryConfig: dt too large, dt*(2kappa+2gamma+g) = " +
                                          std::to_string(stiffness) + " (must be < 0.05)");
    detail::require(detection_efficiency >= 0 && detection_efficiency <= 1,
                    "TrajectoryConfig: detection_efficiency must lie in [0,1]");
    if (micromotion) {
      detail::require(micromotion->period > 0, "TrajectoryConfig: micromotion period must be > 0");
      detail::require(std::abs(micromotion->depth) < 1, "TrajectoryConfig: micromotion depth must be < 1");
    }
  }
};

struct Segment {
  double start = 0.0;
  double end = 0.0;
  double length() const { return end - start; }
};

/// Time-tagged detections on two channels. Pairs of clicks from different
/// segments are never correlated with each other.
struct ClickStream {
  std::vector<double> channel1;
  std::vector<double> channel2;
  double duration = 0.0;
  std::vector<Segment> segments;
  std::optional<TrajectoryConfig> meta;

  std::size_t total_clicks() const { return channel1.size() + channel2.size(); }

  /// Throws unless timestamps are strictly increasing and inside [0, duration].
  void validate() const {
    auto check = [&](const std::vector<double>& ch, const char* name) {
      for (std::size_t i = 0; i < ch.size(); ++i) {
        if (!(ch[i] >= 0 && ch[i] <= duration))
          throw InvalidArgument(std::string("ClickStream: ") + name + " timestamp outside [0, duration]");
        if (i > 0 && !(ch[i] > ch[i - 1]))
          throw InvalidArgument(std::string("ClickStream: ") + name + " timestamps not strictly increasing at index " +
                                std::to_string(i));
      }
    };
    check(channel1, "channel 1");
    check(channel2, "channel 2");
    for (std::size_t i = 0; i < segments.size(); ++i) {
      detail::require(segments[i].end >= segments[i].start, "ClickStream: segment with negative length");
      if (i > 0) detail::require(segments[i].start >= segments[i - 1].end, "ClickStream: overlapping segments");
    }
  }
};

namespace detail {

inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Uniform in (0, 1].
inline double uniform_open0(std::mt19937_64& rng) { return 1.0 - uniform01(rng); }

inline std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), 0x5eedu};
  return std::mt19937_64(seq);
}

/// exp(-i H s) psi by a Taylor series, subdividing when |H| s is not small.
inline CVector expm_apply(const CMatrix& h, double s, const CVector& psi, double h_norm) {
  const int pieces = std::max(1, static_cast<int>(std::ceil(h_norm * s / 0.25)));
  const double ds = s / pieces;
  CVector out = psi;
  for (int p = 0; p < pieces; ++p) {
    CVector term = out;
    CVector acc = out;
    for (int k = 1; k < 30; ++k) {
      term = (-kI * ds / static_cast<double>(k)) * (h * term);
      acc += term;
      if (term.norm() <= 1e-17 * acc.norm()) break;
    }
    out = acc;
  }
  return out;
}

}  // namespace detail

/// Tabulated no-jump propagators for a (possibly periodic) piecewise-constant
/// effective Hamiltonian.
class NoJumpPropagator {
public:
  NoJumpPropagator(const TrajectoryConfig& cfg, const HilbertSpace& space, double horizon)
      : ops_(build_operators(space)) {
    if (cfg.micromotion) {
      // Smallest power-of-two slicing of the period with slice length <= dt.
      const double ratio = cfg.micromotion->period / cfg.dt;
      int m = std::max(0, static_cast<int>(std::ceil(std::log2(ratio))));
      detail::require(m <= 20, "TrajectoryConfig: micromotion period needs more than 2^20 slices");
      slices_ = std::int64_t{1} << m;
      dt_ = cfg.micromotion->period / static_cast<double>(slices_);
    } else {
      slices_ = 1;
      dt_ = cfg.dt;
    }

    heff_.reserve(static_cast<std::size_t>(slices_));
    for (std::int64_t j = 0; j < slices_; ++j) {
      SystemParams p = cfg.params;
      if (cfg.micromotion) {
        const double x = 2.0 * std::numbers::pi * (static_cast<double>(j) + 0.5) / static_cast<double>(slices_);
        p.g = cfg.params.g * (1.0 + cfg.micromotion->depth * std::sin(x));
      }
      heff_.push_back(effective_hamiltonian(p, ops_));
    }
    h_norm_ = 0.0;
    for (const auto& h : heff_) h_norm_ = std::max(h_norm_, h.cwiseAbs().rowwise().sum().maxCoeff());

    levels_ = 1;
    const double max_slices = std::max(1.0, horizon / dt_);
    while (std::ldexp(1.0, levels_ - 1) < max_slices && levels_ < 62) ++levels_;
    table_.resize(static_cast<std::size_t>(levels_));
    table_[0].reserve(static_cast<std::size_t>(slices_));
    for (const auto& h : heff_) {
      const CMatrix arg = (-kI * dt_) * h;
      table_[0].push_back(arg.exp());
    }
    for (int k = 1; k < levels_; ++k) {
      const std::int64_t block = std::int64_t{1} << k;
      auto& prev = table_[static_cast<std::size_t>(k - 1)];
      auto& cur = table_[static_cast<std::size_t>(k)];
      if (block <= slices_) {
        for (std::int64_t j = 0; j < slices_ / block; ++j)
          cur.push_back(prev[static_cast<std::size_t>(2 * j + 1)] * prev[static_cast<std::size_t>(2 * j)]);
      } else {
        cur.push_back(prev[0] * prev[0]);
      }
    }
  }

  double slice_length() const { return dt_; }
  std::int64_t slices_per_period() const { return slices_; }
  const Operators& operators() const { return ops_; }
  const CMatrix& slice_hamiltonian(std::int64_t phase_index) const {
    return heff_[static_cast<std::size_t>(phase_index % slices_)];
  }
  double hamiltonian_norm() const { return h_norm_; }
  int levels() const { return levels_; }

  /// Largest tabulated block of 2^k slices that may start at cyclic position
  /// `phase_index` without exceeding `remaining` slices; returns k.
  int largest_block(std::int64_t phase_index, std::int64_t remaining) const {
    int k = levels_ - 1;
    while (k > 0) {
      const std::int64_t block = std::int64_t{1} << k;
      const bool aligned = block <= slices_ ? (phase_index % block == 0) : (phase_index % slices_ == 0);
      if (aligned && block <= remaining) break;
      --k;
    }
    return k;
  }

  const CMatrix& block(int k, std::int64_t phase_index) const {
    const std::int64_t b = std::int64_t{1} << k;
    const auto& lvl = table_[static_cast<std::size_t>(k)];
    if (b <= slices_) return lvl[static_cast<std::size_t>((phase_index % slices_) / b)];
    return lvl[0];
  }

private:
  Operators ops_;
  std::int64_t slices_ = 1;
  double dt_ = 0.0;
  std::vector<CMatrix> heff_;
  double h_norm_ = 0.0;
  int levels_ = 1;
  std::vector<std::vector<CMatrix>> table_;
};

/// Clicks recorded by one trajectory, times relative to the end of the
/// thermalization prefix.
struct TrajectoryRecord {
  std::vector<double> channel1;
  std::vector<double> channel2;
  std::int64_t cavity_jumps = 0;
  std::int64_t atom_jumps = 0;
};

/// Rate of norm loss of the no-jump evolution, -d|psi|^2/dt = 2 Im<psi|H_eff|psi>,
/// against the total jump rate sum_k |C_k psi|^2 for a normalized psi.
struct NormBookkeeping {
  double norm_decay_rate = 0.0;
  double jump_rate = 0.0;
};

inline NormBookkeeping norm_bookkeeping(const SystemParams& p, const Operators& ops, const CVector& psi) {
  const CVector n = psi / psi.norm();
  const CMatrix heff = effective_hamiltonian(p, ops);
  NormBookkeeping out;
  out.norm_decay_rate = -2.0 * n.dot(heff * n).imag();
  out.jump_rate = 2.0 * p.kappa * (ops.a.matrix() * n).squaredNorm() +
                  2.0 * p.gamma * (ops.sigma_minus.matrix() * n).squaredNorm();
  return out;
}

inline TrajectoryRecord run_single_trajectory(const TrajectoryConfig& cfg, const NoJumpPropagator& prop,
                                              std::uint64_t traj_id) {
  const auto& ops = prop.operators();
  const double dt = prop.slice_length();
  const double t_therm = cfg.thermalization_time();
  const std::int64_t total_slices = static_cast<std::int64_t>(std::llround((t_therm + cfg.duration) / dt));
  const std::int64_t period = prop.slices_per_period();

  auto rng = detail::stream_rng(cfg.seed, traj_id);
  std::int64_t phase0 = 0;
  if (cfg.micromotion) {
    if (cfg.micromotion->phase_policy == PhasePolicy::fixed) {
      const double turns = cfg.micromotion->phase / (2.0 * std::numbers::pi);
      phase0 = static_cast<std::int64_t>(std::llround((turns - std::floor(turns)) * static_cast<double>(period))) % period;
    } else {
      phase0 = static_cast<std::int64_t>(detail::uniform01(rng) * static_cast<double>(period)) % period;
    }
  }

  const CMatrix& a = ops.a.matrix();
  const CMatrix& sm = ops.sigma_minus.matrix();
  const double two_kappa = 2.0 * cfg.params.kappa;
  const double two_gamma = 2.0 * cfg.params.gamma;

  TrajectoryRecord rec;
  CVector psi = CVector::Zero(ops.a.space().dim());
  psi(0) = 1.0;
  double threshold = detail::uniform_open0(rng);

  auto fail = [&](double t, const std::string& why) {
    throw NumericalError("trajectory " + std::to_string(traj_id) + " at t=" + std::to_string(t) + ": " + why);
  };

  auto do_jump = [&](double t) {
    const CVector ja = a * psi;
    const CVector js = sm * psi;
    const double wc = two_kappa * ja.squaredNorm();
    const double wa = two_gamma * js.squaredNorm();
    if (!(wc + wa > 0)) fail(t, "norm decayed without an available jump");
    const bool cavity = detail::uniform01(rng) * (wc + wa) < wc;
    if (cavity) {
      psi = ja / ja.norm();
      ++rec.cavity_jumps;
      const bool detected = detail::uniform01(rng) < cfg.detection_efficiency;
      const bool first = detail::uniform01(rng) < 0.5;
      if (detected && t >= t_therm) (first ? rec.channel1 : rec.channel2).push_back(t - t_therm);
    } else {
      psi = js / js.norm();
      ++rec.atom_jumps;
    }
    threshold = detail::uniform_open0(rng);
  };

  // Advances from `offset` inside slice s to its end, handling any jumps.
  auto finish_slice = [&](std::int64_t s, double offset) {
    const CMatrix& h = prop.slice_hamiltonian(phase0 + s);
    const double hn = prop.hamiltonian_norm();
    while (true) {
      const double rest = dt - offset;
      CVector end = detail::expm_apply(h, rest, psi, hn);
      if (end.squaredNorm() > threshold) {
        psi = end;
        return;
      }
      // log|psi(t)|^2 is close to linear inside one slice: Illinois regula falsi
      // on f(t) = log|psi(t)|^2 - log(threshold), bracketed by [0, rest].
      const double log_thr = std::log(threshold);
      double lo = 0.0, hi = rest;
      double f_lo = std::log(psi.squaredNorm()) - log_thr;
      double f_hi = std::log(std::max(end.squaredNorm(), 1e-300)) - log_thr;
      int side = 0;
      for (int it = 0; it < 60 && hi - lo > 1e-3 * dt; ++it) {
        const double mid = std::clamp(lo + (hi - lo) * f_lo / (f_lo - f_hi), lo + 1e-4 * (hi - lo), hi - 1e-4 * (hi - lo));
        const double f_mid = std::log(std::max(detail::expm_apply(h, mid, psi, hn).squaredNorm(), 1e-300)) - log_thr;
        if (f_mid > 0) {
          lo = mid, f_lo = f_mid;
          if (side == -1) f_hi /= 2;
          side = -1;
        } else {
          hi = mid, f_hi = f_mid;
          if (side == 1) f_lo /= 2;
          side = 1;
        }
        if (std::abs(f_mid) < 1e-12) {
          hi = mid;
          break;
        }
      }
      psi = detail::expm_apply(h, hi, psi, hn);
      offset += hi;
      do_jump(static_cast<double>(s) * dt + offset);
    }
  };

  // `window` bounds the number of slices known to contain the next jump.
  constexpr std::int64_t kUnbounded = INT64_MAX;
  std::int64_t window = kUnbounded;
  std::int64_t s = 0;
  while (s < total_slices) {
    if (window == 1) {
      finish_slice(s, 0.0);
      ++s;
      window = kUnbounded;
      continue;
    }
    const std::int64_t pos = (phase0 + s) % period;
    const int k = prop.largest_block(pos, std::min(total_slices - s, window - 1));
    const std::int64_t len = std::int64_t{1} << k;
    CVector cand = prop.block(k, pos) * psi;
    const double nrm = cand.squaredNorm();
    if (!std::isfinite(nrm)) fail(static_cast<double>(s) * dt, "non-finite norm in no-jump evolution");
    if (nrm > threshold) {
      psi = std::move(cand);
      s += len;
      if (window != kUnbounded) window -= len;
    } else {
      window = len;
    }
  }
  return rec;
}

/// Runs n_traj independent trajectories (per-trajectory seeds derived from
/// cfg.seed) and concatenates their records in trajectory order.
inline ClickStream run_trajectories(const TrajectoryConfig& cfg, int n_traj, int jobs = 1) {
  cfg.validate();
  detail::require(n_traj >= 1, "run_trajectories: need at least one trajectory");
  const HilbertSpace space(cfg.n_max);
  const double t_total = cfg.thermalization_time() + cfg.duration;
  NoJumpPropagator prop(cfg, space, t_total);

  std::vector<TrajectoryRecord> records(static_cast<std::size_t>(n_traj));
  if (cfg.params.eta > 0) {
    parallel_for(static_cast<std::size_t>(n_traj), jobs, [&](std::size_t i) {
      records[i] = run_single_trajectory(cfg, prop, static_cast<std::uint64_t>(i));
    });
  }

  // Recorded length is quantized to whole slices.
  const double dt = prop.slice_length();
  const auto total_slices = std::llround((cfg.thermalization_time() + cfg.duration) / dt);
  const double recorded = static_cast<double>(total_slices) * dt - cfg.thermalization_time();

  ClickStream out;
  out.meta = cfg;
  out.duration = recorded * n_traj;
  for (int i = 0; i < n_traj; ++i) {
    const double off = recorded * i;
    out.segments.push_back({off, off + recorded});
    for (double t : records[static_cast<std::size_t>(i)].channel1) out.channel1.push_back(off + t);
    for (double t : records[static_cast<std::size_t>(i)].channel2) out.channel2.push_back(off + t);
  }
  return out;
}

struct RateEstimate {
  double rate1 = 0.0, rate1_err = 0.0;
  double rate2 = 0.0, rate2_err = 0.0;
  double total = 0.0, total_err = 0.0;
};

inline RateEstimate estimate_rates(const ClickStream& stream) {
  detail::require(stream.duration > 0, "estimate_rates: duration must be > 0");
  const double t = stream.duration;
  const auto n1 = static_cast<double>(stream.channel1.size());
  const auto n2 = static_cast<double>(stream.channel2.size());
  return {n1 / t, std::sqrt(n1) / t, n2 / t, std::sqrt(n2) / t, (n1 + n2) / t, std::sqrt(n1 + n2) / t};
}

/// Keeps each click independently with probability keep.
inline ClickStream thin(const ClickStream& in, double keep, std::uint64_t seed) {
  detail::require(keep >= 0 && keep <= 1, "thin: keep probability must lie in [0,1]");
  auto rng = detail::stream_rng(seed, 0xabcdef);
  ClickStream out = in;
  out.channel1.clear();
  out.channel2.clear();
  for (double t : in.channel1)
    if (detail::uniform01(rng) < keep) out.channel1.push_back(t);
  for (double t : in.channel2)
    if (detail::uniform01(rng) < keep) out.channel2.push_back(t);
  return out;
}

}  // namespace cqed
