// cqed: spectrum scans, correlation traces, click-stream generation and
// coincidence analysis for a driven atom-cavity system.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "cqed/cqed.hpp"
#include "cqed/config.hpp"

namespace fs = std::filesystem;
using namespace cqed;

namespace {

struct CommonOptions {
  std::string config_path;
  std::string preset;
  std::string out_dir = ".";
  int jobs = 1;
  std::optional<std::uint64_t> seed;
};

RunConfig load_config(const CommonOptions& o) {
  Json j;
  if (!o.preset.empty()) j = preset_json(o.preset);
  if (!o.config_path.empty()) {
    std::ifstream in(o.config_path);
    if (!in) throw ParseError("cannot open config file " + o.config_path);
    Json file;
    try {
      file = Json::parse(in);
    } catch (const Json::parse_error& e) {
      throw ParseError(o.config_path + ": " + e.what());
    }
    if (j.is_null())
      j = file;
    else
      j.merge_patch(file);
  }
  if (j.is_null()) throw InvalidArgument("give --preset NAME and/or --config PATH");
  RunConfig c = parse_config(j);
  if (o.seed) c.seed = *o.seed;
  return c;
}

fs::path output_path(const CommonOptions& o, const std::string& file) {
  fs::create_directories(o.out_dir);
  return fs::path(o.out_dir) / file;
}

void write_file(const fs::path& p, const std::string& content, bool binary = false) {
  std::ofstream out(p, binary ? std::ios::binary : std::ios::out);
  if (!out) throw Error("cannot write " + p.string());
  out << content;
  std::cerr << "wrote " << p.string() << '\n';
}

int cmd_spectrum(const CommonOptions& o) {
  const RunConfig c = load_config(o);
  if (!c.spectrum) throw InvalidArgument("config has no \"spectrum\" section");
  const auto& sp = *c.spectrum;
  ScanOptions opt;
  opt.n_max = c.n_max;
  opt.window = sp.window;
  opt.jobs = o.jobs;
  const auto axis = linspace(sp.delta_c_min, sp.delta_c_max, static_cast<std::size_t>(sp.points));
  const ScanResult r = scan_detuning(c.system, axis, opt);
  const auto units = UnitSystem::microseconds();

  std::ostringstream csv;
  write_scan_csv(csv, r, units);
  write_file(output_path(o, c.name + "_spectrum.csv"), csv.str());
  auto meta = scan_metadata(r, units);
  meta["seed"] = c.seed;
  write_file(output_path(o, c.name + "_spectrum.json"), meta.dump(2) + "\n");
  for (const auto& f : r.failures) std::cerr << "point " << f.index << " failed: " << f.message << '\n';
  return r.failures.empty() ? 0 : 2;
}

int cmd_correlate(const CommonOptions& o) {
  const RunConfig c = load_config(o);
  if (!c.correlate) throw InvalidArgument("config has no \"correlate\" section");
  const auto& cs = *c.correlate;
  const HilbertSpace space(c.n_max);
  const auto units = UnitSystem::microseconds();
  std::vector<std::string> outputs(cs.delta_c.size());
  parallel_for(cs.delta_c.size(), o.jobs, [&](std::size_t i) {
    const SystemParams p = c.system.with_laser_detuning(cs.delta_c[i]);
    const Liouvillian l(p, space);
    const DensityState rho = steady_state(l);
    const auto tr = g2_tau(l, rho, uniform_delays(cs.tau_max, cs.tau_step));
    std::ostringstream os;
    write_trace_csv(os, tr, p, units);
    if (cs.window) {
      // Appended as a trailing comment so the column layout stays fixed.
      os << "# windowed_c2_seconds(" << format_double(units.to_seconds(*cs.window))
         << ") = " << format_double(units.to_seconds(windowed_c2(tr, *cs.window).value)) << '\n';
    }
    outputs[i] = os.str();
  });
  for (std::size_t i = 0; i < outputs.size(); ++i)
    write_file(output_path(o, c.name + "_trace_" + std::to_string(i) + ".csv"), outputs[i]);
  return 0;
}

int cmd_trajectories(const CommonOptions& o) {
  const RunConfig c = load_config(o);
  const TrajectoryConfig tc = c.trajectory_config();
  const ClickStream s = run_trajectories(tc, c.trajectories->n_traj, o.jobs);
  const auto units = UnitSystem::microseconds();
  std::ostringstream txt;
  write_params_header(txt, tc.params, units);
  write_stream_text(txt, s, units);
  write_file(output_path(o, c.name + "_clicks.txt"), txt.str());
  std::ostringstream bin(std::ios::binary);
  write_stream_binary(bin, s, units);
  write_file(output_path(o, c.name + "_clicks.bin"), bin.str(), true);
  const auto rates = estimate_rates(s);
  std::cerr << "clicks: " << s.channel1.size() << " + " << s.channel2.size() << ", total rate "
            << rates.total / units.seconds_per_time_unit << " /s\n";
  return 0;
}

/// kappa for the baseline cut: config first, else the stream's own header.
std::optional<double> kappa_from_stream_header(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.rfind("# kappa_hz = ", 0) == 0) return 2.0 * std::numbers::pi * std::stod(line.substr(13)) * 1e-6;
    if (!line.empty() && line[0] != '#') break;
  }
  return std::nullopt;
}

int cmd_analyze(const CommonOptions& o, const std::string& stream_path, std::optional<double> window_ns,
                std::optional<double> tau_max_ns, const std::string& theory_path) {
  std::ifstream in(stream_path, std::ios::binary);
  if (!in) throw ParseError("cannot open stream file " + stream_path);
  const std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto units = UnitSystem::microseconds();
  std::istringstream is(content);
  const bool binary = content.rfind("CQEDCLK1", 0) == 0;
  ClickStream s;
  try {
    s = binary ? read_stream_binary(is, units) : read_stream_text(is, units);
  } catch (const Error& e) {
    throw ParseError(stream_path + ": " + e.what());
  }

  std::optional<RunConfig> c;
  if (!o.config_path.empty() || !o.preset.empty()) c = load_config(o);
  double window = 0.0, tau_max = 0.0;
  if (c && c->analyze) window = c->analyze->window, tau_max = c->analyze->tau_max;
  if (window_ns) window = *window_ns * 1e-3;
  if (tau_max_ns) tau_max = *tau_max_ns * 1e-3;
  if (!(window > 0) || !(tau_max > 0)) throw InvalidArgument("analyze: give --window-ns/--tau-max-ns or an analyze section");

  std::optional<double> kappa;
  if (c) kappa = c->system.kappa;
  if (!kappa && !binary) kappa = kappa_from_stream_header(content);
  if (!kappa) throw InvalidArgument("analyze: kappa unknown; pass --preset or --config with the system parameters");

  CoincidenceHistogram h = correlate(s, window, tau_max, o.jobs);
  try {
    baseline(h, *kappa);
  } catch (const InvalidArgument& e) {
    std::cerr << "warning: " << e.what() << '\n';
  }
  std::optional<ScaleFit> fit;
  if (!theory_path.empty()) {
    if (!h.baseline) throw InvalidArgument("analyze: --theory needs a baseline to form the excess counts");
    std::ifstream tin(theory_path);
    if (!tin) throw ParseError("cannot open trace file " + theory_path);
    CorrelationTrace tr;
    try {
      tr = read_trace_csv(tin, units);
    } catch (const Error& e) {
      throw ParseError(theory_path + ": " + e.what());
    }
    const NormalizedCorrelation nc = normalize(h);
    fit = fit_scale(binned_model(tr, h), nc.c2_excess, nc.c2_err);
    std::cerr << "scale factor: " << fit->factor << " +- " << fit->error << " (chi2/dof " << fit->chi2_per_dof
              << ", " << fit->points << " bins)\n";
  }
  std::ostringstream csv;
  write_histogram_csv(csv, h, units, fit ? &*fit : nullptr);
  const std::string stem = fs::path(stream_path).stem().string();
  write_file(output_path(o, stem + "_histogram.csv"), csv.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Driven atom-cavity photon statistics: spectra, correlations, click streams"};
  app.require_subcommand(1);
  CommonOptions o;
  std::uint64_t seed_value = 0;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "JSON run configuration");
    sub->add_option("--preset", o.preset, "built-in parameter set")
        ->check(CLI::IsMember(preset_names()));
    sub->add_option("--out", o.out_dir, "output directory");
    sub->add_option("--jobs", o.jobs, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed_value, "RNG seed (overrides config)");
  };

  auto* spectrum = app.add_subcommand("spectrum", "steady-state g2(0), C2(0), <a'a> versus laser detuning");
  add_common(spectrum);
  auto* corr = app.add_subcommand("correlate", "two-time correlation traces g2(tau), C2(tau)");
  add_common(corr);
  auto* traj = app.add_subcommand("trajectories", "quantum-trajectory click streams for two detectors");
  add_common(traj);
  auto* analyze = app.add_subcommand("analyze", "coincidence histogram of a click stream");
  add_common(analyze);
  std::string stream_path;
  std::optional<double> window_ns, tau_max_ns;
  analyze->add_option("stream", stream_path, "click stream file (text or binary)")->required();
  analyze->add_option("--window-ns", window_ns, "coincidence window in ns");
  analyze->add_option("--tau-max-ns", tau_max_ns, "maximum delay in ns");
  std::string theory_path;
  analyze->add_option("--theory", theory_path, "trace CSV from 'correlate'; fits one scale factor to the excess counts");

  CLI11_PARSE(app, argc, argv);
  for (auto* sub : {spectrum, corr, traj, analyze})
    if (sub->parsed() && sub->count("--seed")) o.seed = seed_value;

  try {
    if (spectrum->parsed()) return cmd_spectrum(o);
    if (corr->parsed()) return cmd_correlate(o);
    if (traj->parsed()) return cmd_trajectories(o);
    if (analyze->parsed()) return cmd_analyze(o, stream_path, window_ns, tau_max_ns, theory_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
