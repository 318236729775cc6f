#pragma once

// File formats. Internal quantities use one consistent unit system; files are
// written in SI: times in seconds, frequencies as nu = omega / 2 pi in Hz.
//
// Click stream, text: '#'-prefixed header lines, then one record per line
//   <channel> <seconds>          seconds printed with 12 decimals
// Channels 1 and 2 are detectors; channel 0 marks the start of a new segment
// (independent trajectory). A segment ends where the next begins, the last at
// the duration given by the "# duration_seconds" header.
//
// Click stream, binary (little endian):
//   8 bytes  magic "CQEDCLK1"
//   f64      duration in seconds
//   records  u8 channel, f64 seconds   (9 bytes each, same channel meaning)

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cqed/analysis.hpp"
#include "cqed/correlations.hpp"
#include "cqed/error.hpp"
#include "cqed/scan.hpp"
#include "cqed/trajectories.hpp"

namespace cqed {

/// Maps the internal unit system to SI. Frequencies are angular in
/// 1/time_unit.
struct UnitSystem {
  double seconds_per_time_unit = 1.0;

  double to_seconds(double t) const { return t * seconds_per_time_unit; }
  double from_seconds(double s) const { return s / seconds_per_time_unit; }
  double to_hz(double omega) const { return omega / (2.0 * std::numbers::pi * seconds_per_time_unit); }

  /// rad/us internally, the convention used by the command-line tool.
  static UnitSystem microseconds() { return {1e-6}; }
};

inline std::string format_double(double v, int digits = 12) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*e", digits, v == 0.0 ? 0.0 : v);
  return buf;
}

inline std::string format_fixed(double v, int digits = 12) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

inline void write_params_header(std::ostream& os, const SystemParams& p, const UnitSystem& u) {
  os << "# g_hz = " << format_double(u.to_hz(p.g)) << '\n'
     << "# kappa_hz = " << format_double(u.to_hz(p.kappa)) << '\n'
     << "# gamma_hz = " << format_double(u.to_hz(p.gamma)) << '\n'
     << "# delta_c_hz = " << format_double(u.to_hz(p.delta_c)) << '\n'
     << "# delta_a_hz = " << format_double(u.to_hz(p.delta_a)) << '\n'
     << "# eta_hz = " << format_double(u.to_hz(p.eta)) << '\n'
     << "# note = frequencies are nu = omega/2pi; kappa and gamma are half-widths\n";
}

inline void write_trace_csv(std::ostream& os, const CorrelationTrace& tr, const SystemParams& p, const UnitSystem& u) {
  write_params_header(os, p, u);
  os << "# mean_n = " << format_double(tr.mean_n) << '\n';
  os << "tau_seconds,g2,c2\n";
  for (std::size_t i = 0; i < tr.size(); ++i)
    os << format_double(u.to_seconds(tr.delays[i])) << ',' << format_double(tr.g2[i]) << ','
       << format_double(tr.c2[i]) << '\n';
}

/// Reads the tau_seconds,g2,c2 table written by write_trace_csv.
inline CorrelationTrace read_trace_csv(std::istream& is, const UnitSystem& u) {
  CorrelationTrace tr;
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  auto bad = [&](const std::string& why) {
    throw ParseError("trace line " + std::to_string(lineno) + ": " + why + " ('" + line + "')");
  };
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line.rfind("# mean_n = ", 0) == 0) tr.mean_n = std::strtod(line.c_str() + 11, nullptr);
      continue;
    }
    if (!header) {
      if (line != "tau_seconds,g2,c2") bad("expected header tau_seconds,g2,c2");
      header = true;
      continue;
    }
    double v[3];
    const char* p = line.c_str();
    for (int k = 0; k < 3; ++k) {
      char* end = nullptr;
      v[k] = std::strtod(p, &end);
      if (end == p || (k < 2 && *end != ',') || (k == 2 && *end != '\0')) bad("malformed number");
      p = end + 1;
    }
    if (!tr.delays.empty() && !(u.from_seconds(v[0]) > tr.delays.back())) bad("delays must increase");
    tr.delays.push_back(u.from_seconds(v[0]));
    tr.g2.push_back(v[1]);
    tr.c2.push_back(v[2]);
  }
  if (tr.size() < 2) throw ParseError("trace: fewer than two rows");
  return tr;
}

inline void write_scan_csv(std::ostream& os, const ScanResult& r, const UnitSystem& u) {
  write_params_header(os, r.params, u);
  os << "delta_c_hz,mean_n,mean_n_squared,g2_zero,c2_zero,windowed_c2,top_fock_population,status\n";
  std::vector<std::string> status(r.size(), "ok");
  for (const auto& f : r.failures) status[f.index] = "failed";
  for (std::size_t i = 0; i < r.size(); ++i) {
    // windowed C2 is an integral over delay: convert its time unit to seconds.
    os << format_double(u.to_hz(r.axis[i])) << ',' << format_double(r.mean_n[i]) << ','
       << format_double(r.mean_n_squared[i]) << ',' << format_double(r.g2_zero[i]) << ','
       << format_double(r.c2_zero[i]) << ',' << format_double(u.to_seconds(r.windowed_c2[i])) << ','
       << format_double(r.top_fock_population[i]) << ',' << status[i] << '\n';
  }
}

/// Sidecar metadata: everything needed to re-run the scan.
inline nlohmann::ordered_json scan_metadata(const ScanResult& r, const UnitSystem& u) {
  nlohmann::ordered_json j;
  j["version"] = r.version;
  j["frequency_unit"] = "Hz (nu = omega/2pi)";
  j["params"] = {{"g", u.to_hz(r.params.g)},
                 {"kappa", u.to_hz(r.params.kappa)},
                 {"gamma", u.to_hz(r.params.gamma)},
                 {"atom_cavity_detuning", u.to_hz(r.params.atom_cavity_detuning())},
                 {"eta", u.to_hz(r.params.eta)},
                 {"n_empty", r.params.empty_cavity_photons()}};
  j["grid"] = {{"points", r.size()},
               {"delta_c_first", r.axis.empty() ? 0.0 : u.to_hz(r.axis.front())},
               {"delta_c_last", r.axis.empty() ? 0.0 : u.to_hz(r.axis.back())}};
  j["n_max"] = r.options.n_max;
  if (r.options.window) j["window_seconds"] = u.to_seconds(*r.options.window);
  j["windowed_c2_convention"] = WindowedC2::convention;
  auto fails = nlohmann::ordered_json::array();
  for (const auto& f : r.failures) fails.push_back({{"index", f.index}, {"message", f.message}});
  j["failures"] = fails;
  std::size_t truncated = 0;
  for (double t : r.top_fock_population)
    if (t > kTruncationTolerance) ++truncated;
  j["points_over_truncation_tolerance"] = truncated;
  return j;
}

inline void write_histogram_csv(std::ostream& os, const CoincidenceHistogram& h, const UnitSystem& u,
                                const ScaleFit* fit = nullptr) {
  os << "# window_seconds = " << format_double(u.to_seconds(h.window)) << '\n'
     << "# n_starts = " << h.n_starts << '\n'
     << "# total_time_seconds = " << format_double(u.to_seconds(h.total_time)) << '\n';
  if (fit)
    os << "# scale_factor = " << format_double(fit->factor) << " +- " << format_double(fit->error) << '\n'
       << "# scale_fit_chi2_per_dof = " << format_double(fit->chi2_per_dof) << '\n'
       << "# scale_fit_bins = " << fit->points << '\n';
  std::optional<NormalizedCorrelation> norm;
  if (h.baseline && *h.baseline > 0) {
    norm = normalize(h);
    os << "# baseline_counts_per_bin = " << format_double(*h.baseline) << " +- " << format_double(h.baseline_err)
       << '\n';
  } else {
    os << "# baseline unavailable: only raw counts are reported\n";
  }
  os << "tau_seconds,counts,baseline,g2,g2_err,c2_excess,c2_err\n";
  for (std::size_t i = 0; i < h.size(); ++i) {
    os << format_double(u.to_seconds(h.center(i))) << ',' << h.counts[i];
    if (norm)
      os << ',' << format_double(norm->expected_accidentals[i]) << ',' << format_double(norm->g2[i]) << ','
         << format_double(norm->g2_err[i]) << ',' << format_double(norm->c2_excess[i]) << ','
         << format_double(norm->c2_err[i]);
    else
      os << ",nan,nan,nan,nan,nan";
    os << '\n';
  }
}

namespace detail {

struct StreamRecord {
  int channel;
  double t;
};

inline bool record_before(const StreamRecord& a, const StreamRecord& b) {
  return a.t < b.t || (a.t == b.t && a.channel < b.channel);
}

// Segment markers first, then clicks, all in time order.
inline std::vector<StreamRecord> stream_records(const ClickStream& s) {
  std::vector<StreamRecord> recs;
  recs.reserve(s.total_clicks() + s.segments.size());
  for (const auto& seg : s.segments) recs.push_back({0, seg.start});
  for (double t : s.channel1) recs.push_back({1, t});
  for (double t : s.channel2) recs.push_back({2, t});
  std::stable_sort(recs.begin(), recs.end(), record_before);
  return recs;
}

inline ClickStream assemble_stream(const std::vector<StreamRecord>& recs, double duration) {
  ClickStream s;
  s.duration = duration;
  std::vector<double> starts;
  for (const auto& r : recs) {
    if (r.channel == 0)
      starts.push_back(r.t);
    else
      (r.channel == 1 ? s.channel1 : s.channel2).push_back(r.t);
  }
  for (std::size_t i = 0; i < starts.size(); ++i)
    s.segments.push_back({starts[i], i + 1 < starts.size() ? starts[i + 1] : duration});
  if (s.segments.empty()) s.segments.push_back({0.0, duration});
  return s;
}

}  // namespace detail

inline void write_stream_text(std::ostream& os, const ClickStream& s, const UnitSystem& u) {
  os << "# cqed click stream v1\n"
     << "# columns: channel seconds (channel 0 = segment start)\n"
     << "# duration_seconds " << format_fixed(u.to_seconds(s.duration)) << '\n';
  for (const auto& r : detail::stream_records(s)) os << r.channel << ' ' << format_fixed(u.to_seconds(r.t)) << '\n';
}

inline ClickStream read_stream_text(std::istream& is, const UnitSystem& u) {
  std::vector<detail::StreamRecord> recs;
  std::string line;
  std::size_t lineno = 0;
  double duration = -1.0;
  auto bad = [&](const std::string& why) {
    throw ParseError("click stream line " + std::to_string(lineno) + ": " + why + " ('" + line + "')");
  };
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream hs(line.substr(1));
      std::string key;
      hs >> key;
      if (key == "duration_seconds") {
        if (!(hs >> duration) || !(duration >= 0)) bad("malformed duration");
      }
      continue;
    }
    std::istringstream ls(line);
    int ch = -1;
    double secs = 0.0;
    std::string extra;
    if (!(ls >> ch)) bad("malformed channel id");
    if (!(ls >> secs) || !std::isfinite(secs)) bad("malformed timestamp");
    if (ls >> extra) bad("unexpected trailing field");
    if (ch < 0 || ch > 2) bad("channel id must be 0, 1 or 2");
    if (secs < 0) bad("negative timestamp");
    recs.push_back({ch, u.from_seconds(secs)});
  }
  double last = 0.0;
  for (const auto& r : recs) last = std::max(last, r.t);
  const double dur = duration >= 0 ? u.from_seconds(duration) : last;
  std::stable_sort(recs.begin(), recs.end(), detail::record_before);
  ClickStream s = detail::assemble_stream(recs, dur);
  s.validate();
  return s;
}

namespace detail {

inline constexpr std::array<char, 8> kStreamMagic{'C', 'Q', 'E', 'D', 'C', 'L', 'K', '1'};

inline void put_f64(std::ostream& os, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
  os.write(buf, 8);
}

inline bool get_f64(std::istream& is, double& v) {
  unsigned char buf[8];
  if (!is.read(reinterpret_cast<char*>(buf), 8)) return false;
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  v = std::bit_cast<double>(bits);
  return true;
}

}  // namespace detail

inline void write_stream_binary(std::ostream& os, const ClickStream& s, const UnitSystem& u) {
  os.write(detail::kStreamMagic.data(), detail::kStreamMagic.size());
  detail::put_f64(os, u.to_seconds(s.duration));
  for (const auto& r : detail::stream_records(s)) {
    os.put(static_cast<char>(r.channel));
    detail::put_f64(os, u.to_seconds(r.t));
  }
}

inline ClickStream read_stream_binary(std::istream& is, const UnitSystem& u) {
  std::array<char, 8> magic{};
  if (!is.read(magic.data(), magic.size()) || magic != detail::kStreamMagic)
    throw ParseError("binary click stream: bad magic at offset 0");
  double duration = 0.0;
  if (!detail::get_f64(is, duration) || !(duration >= 0)) throw ParseError("binary click stream: bad duration at offset 8");
  std::vector<detail::StreamRecord> recs;
  std::uint64_t offset = 16;
  while (true) {
    const int c = is.get();
    if (c == std::char_traits<char>::eof()) break;
    double secs = 0.0;
    if (!detail::get_f64(is, secs))
      throw ParseError("binary click stream: truncated record at offset " + std::to_string(offset));
    if (c > 2) throw ParseError("binary click stream: invalid channel " + std::to_string(c) + " at offset " + std::to_string(offset));
    if (!std::isfinite(secs) || secs < 0)
      throw ParseError("binary click stream: invalid timestamp at offset " + std::to_string(offset + 1));
    recs.push_back({c, u.from_seconds(secs)});
    offset += 9;
  }
  std::stable_sort(recs.begin(), recs.end(), detail::record_before);
  ClickStream s = detail::assemble_stream(recs, u.from_seconds(duration));
  s.validate();
  return s;
}

}  // namespace cqed
