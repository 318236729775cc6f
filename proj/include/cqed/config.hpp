#pragma once

// Run configuration for the command-line tool.
//
// Configs are JSON objects. Units are mandatory and explicit:
//   "units": {"frequency": "MHz" | "rad/us", "time": "ns" | "us" | "s"}
// "MHz" means nu = omega / 2 pi. Internally everything is converted to rad/us
// and us. Unknown keys anywhere in the document are rejected.

#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "cqed/error.hpp"
#include "cqed/hilbert.hpp"
#include "cqed/trajectories.hpp"

namespace cqed {

using Json = nlohmann::json;

enum class FrequencyUnit { mhz, rad_per_us };
enum class TimeUnit { ns, us, s };

/// Centralized unit conversion into the internal rad/us, us system.
struct ConfigUnits {
  FrequencyUnit frequency = FrequencyUnit::mhz;
  TimeUnit time = TimeUnit::ns;

  double angular(double v) const {
    return frequency == FrequencyUnit::mhz ? 2.0 * std::numbers::pi * v : v;
  }
  double micros(double v) const {
    switch (time) {
      case TimeUnit::ns: return v * 1e-3;
      case TimeUnit::us: return v;
      case TimeUnit::s: return v * 1e6;
    }
    return v;
  }
};

struct SpectrumSettings {
  double delta_c_min = 0.0;
  double delta_c_max = 0.0;
  int points = 0;
  std::optional<double> window;
};

struct CorrelateSettings {
  std::vector<double> delta_c;
  double tau_max = 0.0;
  double tau_step = 0.0;
  std::optional<double> window;
};

struct TrajectorySettings {
  double delta_c = 0.0;
  double duration = 0.0;
  double dt = 0.0;
  int n_traj = 1;
  double detection_efficiency = 1.0;
  std::optional<Micromotion> micromotion;
};

struct AnalyzeSettings {
  double window = 0.0;
  double tau_max = 0.0;
};

struct RunConfig {
  std::string name = "run";
  ConfigUnits units;
  SystemParams system;  ///< delta_c = delta_a = laser at cavity resonance; scans move the laser
  int n_max = 6;
  std::uint64_t seed = 1;
  std::optional<SpectrumSettings> spectrum;
  std::optional<CorrelateSettings> correlate;
  std::optional<TrajectorySettings> trajectories;
  std::optional<AnalyzeSettings> analyze;

  TrajectoryConfig trajectory_config() const {
    if (!trajectories) throw InvalidArgument("config has no \"trajectories\" section");
    TrajectoryConfig c;
    c.params = system.with_laser_detuning(trajectories->delta_c);
    c.n_max = n_max;
    c.duration = trajectories->duration;
    c.dt = trajectories->dt;
    c.seed = seed;
    c.detection_efficiency = trajectories->detection_efficiency;
    c.micromotion = trajectories->micromotion;
    return c;
  }
};

namespace detail {

inline void reject_unknown(const Json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ParseError(where + ": expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key())) throw ParseError(where + ": unknown key \"" + it.key() + "\"");
}

inline double number(const Json& obj, const std::string& key, const std::string& where) {
  if (!obj.contains(key)) throw ParseError(where + ": missing \"" + key + "\"");
  if (!obj.at(key).is_number()) throw ParseError(where + "." + key + ": expected a number");
  return obj.at(key).get<double>();
}

inline std::optional<double> opt_number(const Json& obj, const std::string& key, const std::string& where) {
  if (!obj.contains(key)) return std::nullopt;
  return number(obj, key, where);
}

}  // namespace detail

inline RunConfig parse_config(const Json& j) {
  using detail::number;
  using detail::opt_number;
  detail::reject_unknown(j, {"name", "units", "system", "n_max", "seed", "spectrum", "correlate", "trajectories", "analyze"},
                         "config");
  RunConfig c;
  if (j.contains("name")) c.name = j.at("name").get<std::string>();

  if (!j.contains("units")) throw ParseError("config: \"units\" is mandatory (frequency and time)");
  const Json& u = j.at("units");
  detail::reject_unknown(u, {"frequency", "time"}, "units");
  if (!u.contains("frequency") || !u.contains("time"))
    throw ParseError("units: both \"frequency\" and \"time\" must be given");
  const auto fu = u.at("frequency").get<std::string>();
  if (fu == "MHz")
    c.units.frequency = FrequencyUnit::mhz;
  else if (fu == "rad/us")
    c.units.frequency = FrequencyUnit::rad_per_us;
  else
    throw ParseError("units.frequency: expected \"MHz\" (nu = omega/2pi) or \"rad/us\", got \"" + fu + "\"");
  const auto tu = u.at("time").get<std::string>();
  if (tu == "ns")
    c.units.time = TimeUnit::ns;
  else if (tu == "us")
    c.units.time = TimeUnit::us;
  else if (tu == "s")
    c.units.time = TimeUnit::s;
  else
    throw ParseError("units.time: expected \"ns\", \"us\" or \"s\", got \"" + tu + "\"");
  const auto& U = c.units;

  if (!j.contains("system")) throw ParseError("config: missing \"system\"");
  const Json& s = j.at("system");
  detail::reject_unknown(s, {"g", "kappa", "gamma", "atom_cavity_detuning", "eta", "n_empty"}, "system");
  c.system.g = U.angular(number(s, "g", "system"));
  c.system.kappa = U.angular(number(s, "kappa", "system"));
  c.system.gamma = U.angular(number(s, "gamma", "system"));
  const double delta = U.angular(opt_number(s, "atom_cavity_detuning", "system").value_or(0.0));
  c.system.delta_c = 0.0;
  c.system.delta_a = -delta;
  const bool has_eta = s.contains("eta"), has_n = s.contains("n_empty");
  if (has_eta == has_n) throw ParseError("system: give exactly one of \"eta\" or \"n_empty\"");
  if (has_eta)
    c.system.eta = U.angular(number(s, "eta", "system"));
  else {
    const double n_empty = number(s, "n_empty", "system");
    if (n_empty < 0) throw ParseError("system.n_empty must be >= 0");
    if (!(c.system.kappa > 0)) throw ParseError("system: n_empty needs kappa > 0");
    c.system.eta = SystemParams::eta_for_empty_cavity_photons(n_empty, c.system.kappa);
  }
  try {
    c.system.validate();
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("system: ") + e.what());
  }

  if (j.contains("n_max")) c.n_max = j.at("n_max").get<int>();
  if (c.n_max < 2) throw ParseError("n_max must be >= 2");
  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();

  if (j.contains("spectrum")) {
    const Json& o = j.at("spectrum");
    detail::reject_unknown(o, {"delta_c_min", "delta_c_max", "points", "window"}, "spectrum");
    SpectrumSettings sp;
    sp.delta_c_min = U.angular(number(o, "delta_c_min", "spectrum"));
    sp.delta_c_max = U.angular(number(o, "delta_c_max", "spectrum"));
    sp.points = static_cast<int>(number(o, "points", "spectrum"));
    if (sp.points < 2 || sp.delta_c_max <= sp.delta_c_min) throw ParseError("spectrum: need points >= 2 and min < max");
    if (auto w = opt_number(o, "window", "spectrum")) sp.window = U.micros(*w);
    c.spectrum = sp;
  }
  if (j.contains("correlate")) {
    const Json& o = j.at("correlate");
    detail::reject_unknown(o, {"delta_c", "tau_max", "tau_step", "window"}, "correlate");
    CorrelateSettings cs;
    if (!o.contains("delta_c") || !o.at("delta_c").is_array() || o.at("delta_c").empty())
      throw ParseError("correlate.delta_c: expected a non-empty array");
    for (const auto& v : o.at("delta_c")) cs.delta_c.push_back(U.angular(v.get<double>()));
    cs.tau_max = U.micros(number(o, "tau_max", "correlate"));
    cs.tau_step = U.micros(number(o, "tau_step", "correlate"));
    if (!(cs.tau_step > 0) || !(cs.tau_max > cs.tau_step)) throw ParseError("correlate: need 0 < tau_step < tau_max");
    if (auto w = opt_number(o, "window", "correlate")) cs.window = U.micros(*w);
    c.correlate = cs;
  }
  if (j.contains("trajectories")) {
    const Json& o = j.at("trajectories");
    detail::reject_unknown(o, {"delta_c", "duration", "dt", "n_traj", "detection_efficiency", "micromotion"},
                           "trajectories");
    TrajectorySettings ts;
    ts.delta_c = U.angular(number(o, "delta_c", "trajectories"));
    ts.duration = U.micros(number(o, "duration", "trajectories"));
    ts.dt = U.micros(number(o, "dt", "trajectories"));
    ts.n_traj = static_cast<int>(opt_number(o, "n_traj", "trajectories").value_or(1));
    ts.detection_efficiency = opt_number(o, "detection_efficiency", "trajectories").value_or(1.0);
    if (o.contains("micromotion")) {
      const Json& m = o.at("micromotion");
      detail::reject_unknown(m, {"depth", "period", "phase_policy", "phase"}, "trajectories.micromotion");
      Micromotion mm;
      mm.depth = opt_number(m, "depth", "micromotion").value_or(0.1);
      mm.period = U.micros(number(m, "period", "micromotion"));
      const auto policy = m.value("phase_policy", std::string("random"));
      if (policy == "random")
        mm.phase_policy = PhasePolicy::random_per_trajectory;
      else if (policy == "fixed")
        mm.phase_policy = PhasePolicy::fixed;
      else
        throw ParseError("micromotion.phase_policy: expected \"fixed\" or \"random\"");
      mm.phase = opt_number(m, "phase", "micromotion").value_or(0.0);
      ts.micromotion = mm;
    }
    c.trajectories = ts;
  }
  if (j.contains("analyze")) {
    const Json& o = j.at("analyze");
    detail::reject_unknown(o, {"window", "tau_max"}, "analyze");
    c.analyze = AnalyzeSettings{U.micros(number(o, "window", "analyze")), U.micros(number(o, "tau_max", "analyze"))};
  }
  return c;
}

/// Built-in parameter sets.
///  fig2          (gamma, g) = (3, 10) kappa, resonant atom and cavity, 0.01 empty-cavity photons
///  fig3a..fig3d  (g, kappa, gamma)/2pi = (11.5, 1.3, 3) MHz, omega_a - omega_cav = -2pi x 8.5 MHz,
///                laser detunings dc/2pi = 0, -3, -10, -18 MHz
///  fig4          same system, scan of dc across |1,-> and |2,->
///  empty-cavity  g = 0 reference
inline Json preset_json(const std::string& name) {
  const Json experimental_system = {{"g", 11.5}, {"kappa", 1.3}, {"gamma", 3.0}, {"atom_cavity_detuning", -8.5}};
  const Json units = {{"frequency", "MHz"}, {"time", "ns"}};
  if (name == "fig2") {
    // kappa/2pi = 1 MHz sets the scale; only ratios matter.
    return {{"name", "fig2"},
            {"units", units},
            {"system", {{"g", 10.0}, {"kappa", 1.0}, {"gamma", 3.0}, {"atom_cavity_detuning", 0.0}, {"n_empty", 0.01}}},
            {"n_max", 6},
            {"spectrum", {{"delta_c_min", -20.0}, {"delta_c_max", 20.0}, {"points", 201}}}};
  }
  if (name == "fig4") {
    Json sys = experimental_system;
    sys["n_empty"] = 0.01;
    return {{"name", "fig4"},
            {"units", units},
            {"system", sys},
            {"n_max", 6},
            {"spectrum", {{"delta_c_min", -25.0}, {"delta_c_max", 0.0}, {"points", 251}, {"window", 170.0}}}};
  }
  static const std::map<std::string, double> fig3 = {{"fig3a", 0.0}, {"fig3b", -3.0}, {"fig3c", -10.0}, {"fig3d", -18.0}};
  if (auto it = fig3.find(name); it != fig3.end()) {
    Json sys = experimental_system;
    sys["n_empty"] = 1.0;
    Json traj = {{"delta_c", it->second},
                 {"duration", 1.0e7},
                 {"dt", 0.3},
                 {"n_traj", 20},
                 {"detection_efficiency", 0.05}};
    // Trap oscillation of the atom modulates g; its imprint is strong on the cavity resonance only.
    if (name == "fig3a" || name == "fig3b")
      traj["micromotion"] = {{"depth", 0.1}, {"period", 2200.0}, {"phase_policy", "random"}};
    return {{"name", name},
            {"units", units},
            {"system", sys},
            {"n_max", 6},
            {"seed", 1},
            {"correlate", {{"delta_c", {it->second}}, {"tau_max", 3000.0}, {"tau_step", 1.0}, {"window", 170.0}}},
            {"trajectories", traj},
            {"analyze", {{"window", 170.0}, {"tau_max", 3000.0}}}};
  }
  if (name == "empty-cavity") {
    return {{"name", "empty-cavity"},
            {"units", units},
            {"system", {{"g", 0.0}, {"kappa", 1.3}, {"gamma", 3.0}, {"atom_cavity_detuning", 0.0}, {"n_empty", 0.01}}},
            {"n_max", 6},
            {"spectrum", {{"delta_c_min", -10.0}, {"delta_c_max", 10.0}, {"points", 41}}}};
  }
  throw InvalidArgument("unknown preset \"" + name + "\" (known: fig2, fig3a, fig3b, fig3c, fig3d, fig4, empty-cavity)");
}

inline std::vector<std::string> preset_names() {
  return {"fig2", "fig3a", "fig3b", "fig3c", "fig3d", "fig4", "empty-cavity"};
}

}  // namespace cqed
