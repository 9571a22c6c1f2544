#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "cqfb/dsp.hpp"
#include "cqfb/experiment.hpp"
#include "cqfb/qubit.hpp"

namespace cqfb {

struct RunDiagnostics {
  std::uint64_t steps = 0;
  std::uint64_t projections = 0;
  std::uint64_t damping_clamps = 0;
  std::uint64_t saturations = 0;
  std::uint64_t regularizations = 0;

  RunDiagnostics& operator+=(const RunDiagnostics& o);
  double projection_fraction() const;
};

/// Time-sampled record of one realization. Sample i sits at times[i]; record[i]
/// is the mean homodyne current over [times[i], times[i] + sample_interval).
struct Trajectory {
  std::vector<double> times;
  std::vector<BlochState> bloch;
  std::vector<double> record;
  std::vector<double> control;  // applied epsilon_r, rad/s
  std::vector<double> beta_abs;
  std::vector<double> gamma_d;
  std::vector<double> b_stark;
  std::uint64_t seed = 0;
  RunDiagnostics diagnostics;
};

struct EnsembleStats {
  std::vector<double> times;
  std::vector<BlochState> mean_bloch;
  std::vector<BlochVector> var_bloch;
  std::vector<double> mean_record;
  std::vector<double> var_record;
  std::vector<double> mean_control;
  std::vector<double> mean_beta_abs;
  std::vector<double> mean_gamma_d;
  std::vector<double> mean_b_stark;
  std::size_t n_trajectories = 0;
  RunDiagnostics diagnostics;

  TimeSeries z_series() const;
  TimeSeries record_series() const;
};

/// Normal(0, dt) increments of one trajectory's Wiener process.
class WienerIncrements {
 public:
  WienerIncrements(std::uint64_t seed, double dt) : gen_(seed), dist_(0.0, std::sqrt(dt)) {}
  double operator()() { return dist_(gen_); }

 private:
  std::mt19937_64 gen_;
  std::normal_distribution<double> dist_;
};

/// Seed of trajectory `index` in an ensemble started from base_seed.
std::uint64_t trajectory_seed(std::uint64_t base_seed, std::uint64_t index);

/// Deterministic in (cfg, seed). Per step: cavity, measurement quantities,
/// controller (with latency), SME, record. open_loop or feedback modes only.
Trajectory run_trajectory(const ExperimentConfig& cfg, std::uint64_t seed);

/// n trajectories with seeds trajectory_seed(base_seed, i). Bit-identical for
/// any worker count: trajectories are reduced in fixed-size chunks merged in
/// index order.
EnsembleStats run_ensemble(const ExperimentConfig& cfg, std::size_t n, std::uint64_t base_seed,
                           unsigned workers = 0);

/// Two-pass pointwise mean and (population) variance. Throws DomainError on
/// an empty set or mismatched time grids.
EnsembleStats average(std::span<const Trajectory> trajs);

/// z(T) of one open-loop realization integrated at several step sizes
/// factor[k] * fine_dt, all driven by the same fine Brownian path.
std::vector<double> coupled_final_z(const ExperimentConfig& cfg, std::uint64_t seed,
                                    double fine_dt, std::span<const std::size_t> factors,
                                    double final_time);

struct ErrorTrace {
  std::vector<double> times;
  std::vector<double> epsilon;
  std::vector<double> lyapunov;
  double zero_time = -1.0;  // first time epsilon == 0, -1 if never
};

/// The deterministic closed-loop error model stepped at cfg.dt for cfg.duration,
/// sampled every cfg.sample_interval.
ErrorTrace run_error_ode(const ExperimentConfig& cfg);

}  // namespace cqfb
