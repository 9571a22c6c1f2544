#include "cqfb/presets.hpp"

#include <json.hpp>

#include "cqfb/config.hpp"
#include "cqfb/dsp.hpp"
#include "cqfb/ensemble.hpp"
#include "cqfb/errors.hpp"
#include "cqfb/fit.hpp"
#include "cqfb/io.hpp"
#include "cqfb/units.hpp"

namespace cqfb {

namespace {

using json = nlohmann::json;

const char* kFig2a = R"(# Open-loop Rabi oscillation under weak measurement
mode = open_loop
rabi_mhz = 1
drive_amplitude_mhz = 1
gamma_1_mhz = 0.05
gamma_phi_mhz = 0.1
eta = 1
initial_z = 1
duration_us = 10
n_trajectories = 1000
name = fig2a
)";

const char* kFig2b = R"(# Single realization under strong measurement
mode = open_loop
rabi_mhz = 1
drive_amplitude_mhz = 20
duration_us = 10
n_trajectories = 1
name = fig2b
)";

const char* kFig3 = R"(# Lyapunov feedback tracking of a 2.5 MHz Rabi reference
mode = feedback
rabi_mhz = 2.5
drive_amplitude_mhz = 1
k1 = 5e6
k2 = 1e8
duration_us = 10
n_trajectories = 1000
psd_segment = 4096
)";

const char* kEq9 = R"(# Deterministic closed-loop error model
mode = error_ode_only
k1 = 5e6
k2 = 1e8
error_initial = 1
duration_us = 0.1
sample_ns = 0.1
name = eq9
)";

json fit_json(const DecayingCosineFit& f) {
  return {{"fitted_frequency", f.frequency},
          {"fitted_frequency_mhz", f.frequency * 1e-6},
          {"decay_rate", f.decay_rate},
          {"amplitude", f.amplitude},
          {"phase", f.phase},
          {"offset", f.offset},
          {"r_squared", f.r_squared},
          {"converged", f.converged},
          {"flagged", f.flagged},
          {"note", f.note}};
}

json diagnostics_json(const RunDiagnostics& d) {
  return {{"steps", d.steps},
          {"projections", d.projections},
          {"projection_fraction", d.projection_fraction()},
          {"damping_clamps", d.damping_clamps},
          {"saturations", d.saturations},
          {"regularizations", d.regularizations}};
}

json run_header(const ExperimentConfig& cfg) {
  json regimes = json::array();
  for (const auto& c : validate_regimes(cfg.physical, cfg.thresholds).checks) {
    regimes.push_back({{"check", c.name},
                       {"ratio", c.ratio},
                       {"threshold", c.threshold},
                       {"status", c.status == CheckStatus::pass ? "pass" : "warn"}});
  }
  return {{"name", cfg.name},
          {"drive_amplitude_mhz", angular_to_mhz(cfg.drive.amplitude)},
          {"rabi_mhz", angular_to_mhz(cfg.rabi_target)},
          {"regimes", regimes}};
}

struct Names {
  std::filesystem::path dir;
  std::string stem;
  std::filesystem::path file(const std::string& suffix) const { return dir / (stem + suffix); }
};

ExperimentConfig with_name(ExperimentConfig cfg, std::string name) {
  cfg.name = std::move(name);
  return cfg;
}

// One ensemble (or trajectory) run: CSV outputs plus its summary entry.
json execute(const ExperimentConfig& cfg, RunResult& result, EnsembleStats* keep = nullptr) {
  const Names names{cfg.output_dir, cfg.name};
  json entry = run_header(cfg);

  if (cfg.mode == RunMode::error_ode_only) {
    const auto trace = run_error_ode(cfg);
    const auto path = names.file(".csv");
    write_error_trace_csv(path, trace, cfg);
    result.files.push_back(path);
    entry["mode"] = "error_ode_only";
    entry["zero_time_ns"] = trace.zero_time < 0 ? json(nullptr) : json(trace.zero_time * 1e9);
    entry["analytic_zero_time_ns"] = closed_loop_zero_time(cfg.error_initial, cfg.controller) * 1e9;
    return entry;
  }

  entry["mode"] = cfg.mode == RunMode::feedback ? "feedback" : "open_loop";
  EnsembleStats stats;
  if (cfg.n_trajectories == 1) {
    const auto traj = run_trajectory(cfg, trajectory_seed(cfg.base_seed, 0));
    const auto path = names.file(".csv");
    write_trajectory_csv(path, traj, cfg);
    result.files.push_back(path);
    const Trajectory one[] = {traj};
    stats = average(one);
  } else {
    stats = run_ensemble(cfg, cfg.n_trajectories, cfg.base_seed, cfg.workers);
    const auto path = names.file(".csv");
    write_ensemble_csv(path, stats, cfg);
    result.files.push_back(path);
  }
  entry["n_trajectories"] = stats.n_trajectories;
  entry["diagnostics"] = diagnostics_json(stats.diagnostics);
  entry["fit_z"] = fit_json(fit_decaying_cosine(stats.z_series()));
  entry["fitted_frequency"] = entry["fit_z"]["fitted_frequency"];
  entry["fitted_frequency_mhz"] = entry["fit_z"]["fitted_frequency_mhz"];
  entry["decay_rate"] = entry["fit_z"]["decay_rate"];

  if (stats.n_trajectories > 1 && cfg.rabi_target > 0.0) {
    const auto spectrum = psd(stats.record_series(), cfg.psd_segment, cfg.psd_overlap);
    const auto spath = names.file("_psd.csv");
    write_spectra_csv(spath, {"psd"}, {spectrum}, cfg);
    result.files.push_back(spath);
    const auto peak = find_peak(spectrum, spectrum.resolution, rabi_band_limit(cfg));
    entry["record_psd_peak_mhz"] = peak.frequency * 1e-6;
    entry["record_psd_fwhm_mhz"] = peak.fwhm * 1e-6;
  }
  if (keep) *keep = std::move(stats);
  return entry;
}

void write_summary(const ExperimentConfig& cfg, json runs, RunResult& result) {
  json summary = {{"runs", std::move(runs)}};
  result.summary_json = summary.dump(2);
  const auto path = std::filesystem::path(cfg.output_dir) / (cfg.name + "_summary.json");
  write_text(path, result.summary_json + '\n');
  result.files.push_back(path);
}

}  // namespace

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"fig2a", "fig2b", "fig3a", "fig3b", "eq9"};
  return names;
}

std::string preset_text(const std::string& name) {
  if (name == "fig2a") return kFig2a;
  if (name == "fig2b") return kFig2b;
  if (name == "fig3a") return std::string(kFig3) + "name = fig3a\n";
  if (name == "fig3b") return std::string(kFig3) + "name = fig3b\n";
  if (name == "eq9") return kEq9;
  throw ConfigError("unknown preset '" + name + "' (expected fig2a, fig2b, fig3a, fig3b or eq9)");
}

ExperimentConfig apply_overrides(ExperimentConfig cfg, const RunOverrides& o) {
  if (o.out_dir) cfg.output_dir = o.out_dir->string();
  if (o.seed) cfg.base_seed = *o.seed;
  if (o.trajectories) cfg.n_trajectories = *o.trajectories;
  if (o.workers) cfg.workers = *o.workers;
  return resolve(cfg);
}

RunResult run_config(const ExperimentConfig& cfg) {
  RunResult result;
  json runs = json::array();
  runs.push_back(execute(cfg, result));
  write_summary(cfg, std::move(runs), result);
  return result;
}

RunResult run_preset(const std::string& name, const RunOverrides& o) {
  const ExperimentConfig base = apply_overrides(parse_config(preset_text(name)), o);
  if (name == "fig2b" || name == "fig3a" || name == "eq9") return run_config(base);

  RunResult result;
  json runs = json::array();
  if (name == "fig2a") {
    for (double amp : {1.0, 8.0}) {
      ExperimentConfig cfg = with_name(base, amp == 1.0 ? "fig2a_ed1" : "fig2a_ed8");
      cfg.drive.amplitude = mhz_to_angular(amp);
      runs.push_back(execute(resolve(cfg), result));
    }
    write_summary(base, std::move(runs), result);
    return result;
  }

  // fig3b: feedback against open loop with identical physical parameters.
  EnsembleStats feedback, open;
  ExperimentConfig fb_cfg = with_name(base, "fig3b_feedback");
  ExperimentConfig ol_cfg = with_name(base, "fig3b_open_loop");
  ol_cfg.mode = RunMode::open_loop;
  ol_cfg = resolve(ol_cfg);
  runs.push_back(execute(fb_cfg, result, &feedback));
  runs.push_back(execute(ol_cfg, result, &open));

  const Spectrum fb_psd = psd(feedback.record_series(), base.psd_segment, base.psd_overlap);
  const Spectrum ol_psd = psd(open.record_series(), base.psd_segment, base.psd_overlap);
  const auto path = std::filesystem::path(base.output_dir) / "fig3b_psd.csv";
  write_spectra_csv(path, {"psd_feedback", "psd_open_loop"}, {fb_psd, ol_psd}, base);
  result.files.push_back(path);

  const auto fb_peak = find_peak(fb_psd, fb_psd.resolution, rabi_band_limit(base));
  const auto ol_peak = find_peak(ol_psd, ol_psd.resolution, rabi_band_limit(base));
  json cmp = {{"feedback_peak_mhz", fb_peak.frequency * 1e-6},
              {"feedback_fwhm_mhz", fb_peak.fwhm * 1e-6},
              {"open_loop_peak_mhz", ol_peak.frequency * 1e-6},
              {"open_loop_fwhm_mhz", ol_peak.fwhm * 1e-6},
              {"resolution_mhz", fb_psd.resolution * 1e-6}};

  const double cutoff = lockin_cutoff_hz(base);
  const auto fb_lock = lock_in_extract(feedback.record_series(), base.rabi_target, base.lockin_delay, cutoff);
  const auto ol_lock = lock_in_extract(open.record_series(), base.rabi_target, base.lockin_delay, cutoff);
  std::vector<double> t;
  for (std::size_t i = 0; i < fb_lock.size(); ++i) t.push_back(fb_lock.time(i) * 1e9);
  std::string text = "# cqfb simulate output\n# lock-in demodulated averaged records\n";
  text += "time_ns,lockin_feedback,lockin_open_loop\n";
  for (std::size_t i = 0; i < t.size(); ++i) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", t[i], fb_lock.values[i], ol_lock.values[i]);
    text += buf;
  }
  const auto lpath = std::filesystem::path(base.output_dir) / "fig3b_lockin.csv";
  write_text(lpath, text);
  result.files.push_back(lpath);

  json summary_runs = std::move(runs);
  summary_runs.push_back({{"name", "fig3b_comparison"}, {"spectra", cmp}});
  write_summary(base, std::move(summary_runs), result);
  return result;
}

}  // namespace cqfb
