#include "cqfb/experiment.hpp"

#include <cmath>

#include "cqfb/errors.hpp"
#include "cqfb/units.hpp"

namespace cqfb {

namespace {

bool is_multiple(double big, double small) {
  const double ratio = big / small;
  return ratio >= 1.0 - 1e-9 && std::abs(ratio - std::round(ratio)) <= 1e-6 * ratio;
}

}  // namespace

std::size_t decimation(const ExperimentConfig& cfg) {
  return static_cast<std::size_t>(std::llround(cfg.sample_interval / cfg.dt));
}

std::size_t sample_count(const ExperimentConfig& cfg) {
  return static_cast<std::size_t>(std::llround(cfg.duration / cfg.sample_interval));
}

double open_loop_amplitude(const ExperimentConfig& cfg) {
  return rabi_amplitude_for_target(cfg.rabi_target, derive_dispersive(cfg.physical));
}

double lockin_cutoff_hz(const ExperimentConfig& cfg) {
  if (cfg.lockin_cutoff > 0.0) return cfg.lockin_cutoff;
  return cfg.rabi_target / (kTwoPi * 10.0);
}

double rabi_band_limit(const ExperimentConfig& cfg) { return 4.0 * cfg.rabi_target / kTwoPi; }

ExperimentConfig resolve(ExperimentConfig cfg) {
  check_physical(cfg.physical);
  DerivedParams d;
  try {
    d = derive_dispersive(cfg.physical);
  } catch (const DomainError&) {
    throw ConfigError("omega_q_mhz out of range: requires omega_q != omega_c (nonzero detuning)");
  }
  if (cfg.physical.g == 0.0) throw ConfigError("g_mhz out of range: requires g != 0");

  if (!(cfg.dt > 0.0)) throw ConfigError("dt_ns out of range: requires dt > 0");
  if (!(cfg.duration > 0.0)) throw ConfigError("duration_us out of range: requires duration > 0");
  if (!(cfg.sample_interval > 0.0) || !is_multiple(cfg.sample_interval, cfg.dt)) {
    throw ConfigError("sample_ns out of range: requires dt to divide the sample interval");
  }
  if (cfg.physical.kappa * cfg.dt > kMaxKappaDt * (1.0 + 1e-12)) {
    throw ConfigError("dt_ns out of range: requires kappa*dt <= 0.1");
  }
  if (cfg.drive.mode == DriveMode::pulsed &&
      !(cfg.drive.pulse_on > 0.0 && cfg.drive.pulse_on <= cfg.drive.period)) {
    throw ConfigError("pulse_on_ns out of range: requires 0 < pulse_on <= period");
  }
  if (cfg.drive.amplitude < 0.0) {
    throw ConfigError("drive_amplitude_mhz out of range: requires amplitude >= 0");
  }
  if (cfg.rabi_target < 0.0) throw ConfigError("rabi_mhz out of range: requires rabi >= 0");
  if (cfg.mode != RunMode::error_ode_only && cfg.rabi_target > 0.0 &&
      cfg.duration < 10.0 * kTwoPi / cfg.rabi_target * (1.0 - 1e-9)) {
    throw ConfigError("duration_us out of range: requires duration >= 10 Rabi periods");
  }
  if (cfg.n_trajectories < 1) {
    throw ConfigError("n_trajectories out of range: requires n_trajectories >= 1");
  }
  if (cfg.initial.norm() > 1.0 + 1e-12) {
    throw ConfigError("initial_x/y/z out of range: requires a state inside the Bloch ball");
  }
  if (!(cfg.psd_overlap >= 0.0 && cfg.psd_overlap < 1.0)) {
    throw ConfigError("psd_overlap out of range: requires 0 <= overlap < 1");
  }
  if (cfg.psd_segment == 1 || cfg.psd_segment > sample_count(cfg)) {
    throw ConfigError("psd_segment out of range: requires 2 <= psd_segment <= number of samples (or 0)");
  }
  if (cfg.lockin_delay < 0.0) throw ConfigError("lockin_delay_ns out of range: requires delay >= 0");

  cfg.controller.omega_R0 = cfg.rabi_target;
  if (cfg.controller.sample_period == 0.0) cfg.controller.sample_period = cfg.dt;
  if (!is_multiple(cfg.controller.sample_period, cfg.dt)) {
    throw ConfigError("controller_period_ns out of range: requires a multiple of dt");
  }
  cfg.controller.u_max = cfg.u_max_factor * std::abs(rabi_amplitude_for_target(cfg.rabi_target, d));
  if (cfg.mode == RunMode::feedback) {
    if (!(cfg.rabi_target > 0.0)) {
      throw ConfigError("rabi_mhz out of range: feedback requires a reference frequency > 0");
    }
    check_controller(cfg.controller);
  }
  if (cfg.mode == RunMode::error_ode_only) {
    if (!(cfg.controller.k1 > 0.0)) throw ConfigError("k1 out of range: requires k1 > 0");
    if (!(cfg.controller.k2 > 0.0)) throw ConfigError("k2 out of range: requires k2 > 0");
  }
  if (cfg.mode != RunMode::error_ode_only && cfg.rabi_target > 0.0) {
    const double cutoff = lockin_cutoff_hz(cfg);
    if (cutoff >= 0.5 / cfg.sample_interval) {
      throw ConfigError("lockin_cutoff_mhz out of range: requires cutoff below Nyquist");
    }
  }
  return cfg;
}

}  // namespace cqfb
