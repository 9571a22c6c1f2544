#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "cqfb/cavity.hpp"
#include "cqfb/controller.hpp"
#include "cqfb/params.hpp"
#include "cqfb/qubit.hpp"

namespace cqfb {

enum class RunMode { open_loop, feedback, error_ode_only };

/// Which signal the feedback loop compares against the reference.
///   estimate: <sigma_z> of the conditional state (the online filter).
///   record:   low-passed homodyne current divided by the record gain.
/// <sigma_y>, <sigma_z> always come from the filter.
enum class FeedbackSignal { estimate, record };

/// Complete description of one run. Angular units and seconds throughout;
/// the config parser converts from MHz / ns / us.
struct ExperimentConfig {
  PhysicalParams physical;
  RegimeThresholds thresholds;
  DriveSchedule drive;

  RunMode mode = RunMode::open_loop;
  /// Open-loop Rabi rate and feedback reference Omega_R0.
  double rabi_target = 0.0;
  ControllerConfig controller;  // omega_R0 and u_max are filled by resolve()
  double u_max_factor = 50.0;   // u_max in units of the open-loop amplitude
  std::size_t latency_samples = 1;
  FeedbackSignal feedback_signal = FeedbackSignal::estimate;
  double record_cutoff = 25e6;  // Hz, record-mode smoothing

  Backaction backaction = Backaction::matched;
  bool include_gamma_d = true;
  BlochState initial{0.0, 0.0, 1.0};

  double duration = 10e-6;
  double dt = 1e-10;
  double sample_interval = 1e-9;

  std::size_t n_trajectories = 1000;
  std::uint64_t base_seed = 1;
  unsigned workers = 0;  // 0: hardware concurrency

  double error_initial = 1.0;  // error_ode_only mode

  double lockin_delay = 0.0;
  double lockin_cutoff = 0.0;  // Hz, 0: rabi frequency / 10
  std::size_t psd_segment = 0;  // samples, 0: whole record
  double psd_overlap = 0.5;

  std::string output_dir = "out";
  std::string name = "run";
};

/// Validates every invariant and fills the derived controller fields.
/// Throws ConfigError naming the violated invariant.
ExperimentConfig resolve(ExperimentConfig cfg);

/// Integration steps per exported sample.
std::size_t decimation(const ExperimentConfig& cfg);
std::size_t sample_count(const ExperimentConfig& cfg);

/// Open-loop drive amplitude epsilon_r for cfg.rabi_target.
double open_loop_amplitude(const ExperimentConfig& cfg);

double lockin_cutoff_hz(const ExperimentConfig& cfg);
// Upper edge of the record-spectrum peak search: four times the Rabi target, in Hz.
double rabi_band_limit(const ExperimentConfig& cfg);

}  // namespace cqfb
