#include "cqfb/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <deque>
#include <map>
#include <mutex>
#include <thread>

#include "cqfb/errors.hpp"

namespace cqfb {

RunDiagnostics& RunDiagnostics::operator+=(const RunDiagnostics& o) {
  steps += o.steps;
  projections += o.projections;
  damping_clamps += o.damping_clamps;
  saturations += o.saturations;
  regularizations += o.regularizations;
  return *this;
}

double RunDiagnostics::projection_fraction() const {
  return steps == 0 ? 0.0 : static_cast<double>(projections) / static_cast<double>(steps);
}

TimeSeries EnsembleStats::z_series() const {
  TimeSeries s{times.empty() ? 0.0 : times.front(), times.size() > 1 ? times[1] - times[0] : 1.0, {}};
  s.values.reserve(mean_bloch.size());
  for (const auto& b : mean_bloch) s.values.push_back(b.z);
  return s;
}

TimeSeries EnsembleStats::record_series() const {
  return {times.empty() ? 0.0 : times.front(), times.size() > 1 ? times[1] - times[0] : 1.0,
          mean_record};
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Cavity and rate bookkeeping for one integration step size.
class Plant {
 public:
  Plant(const ExperimentConfig& cfg, double dt)
      : cfg_(cfg), d_(derive_dispersive(cfg.physical)), stepper_(d_, cfg.physical.kappa, dt), dt_(dt) {
    base_.gamma_1 = cfg.physical.gamma_1;
    base_.gamma_phi = cfg.physical.gamma_phi;
    base_.eta = cfg.physical.eta;
    base_.kappa = cfg.physical.kappa;
    base_.backaction = cfg.backaction;
  }

  const MeasurementQuantities& advance_cavity(double t) {
    cavity_ = stepper_.step(cavity_, drive_at(cfg_.drive, t + 0.5 * dt_));
    meas_ = measurement_quantities(cavity_, d_.chi);
    return meas_;
  }

  QubitRates rates(double eps_r) const {
    QubitRates r = base_;
    r.omega_ac = d_.omega_q_tilde + meas_.b_stark;
    r.omega_R = rabi_rate_from_amplitude(eps_r, d_);
    r.gamma_d = cfg_.include_gamma_d ? meas_.gamma_d : 0.0;
    r.beta_abs = meas_.beta_abs;
    return r;
  }

  const DerivedParams& derived() const { return d_; }
  const MeasurementQuantities& measurement() const { return meas_; }

 private:
  const ExperimentConfig& cfg_;
  DerivedParams d_;
  PointerStepper stepper_;
  double dt_;
  CavityPair cavity_{};
  MeasurementQuantities meas_{};
  QubitRates base_{};
};

std::size_t steps_for(double span, double dt) {
  return static_cast<std::size_t>(std::llround(span / dt));
}

void require_finite(const BlochState& s, std::size_t step) {
  if (!std::isfinite(s.x) || !std::isfinite(s.y) || !std::isfinite(s.z)) {
    throw NumericError("non-finite Bloch state at step " + std::to_string(step));
  }
}

// Streaming pointwise statistics (Welford inside a chunk, Chan across chunks).
struct Accumulator {
  std::size_t count = 0;
  std::vector<double> mean[5];  // x, y, z, record, control
  std::vector<double> m2[5];
  std::vector<double> beta_abs, gamma_d, b_stark;
  std::vector<double> times;
  RunDiagnostics diag;

  explicit Accumulator(std::size_t samples = 0) {
    for (auto& v : mean) v.assign(samples, 0.0);
    for (auto& v : m2) v.assign(samples, 0.0);
    beta_abs.assign(samples, 0.0);
    gamma_d.assign(samples, 0.0);
    b_stark.assign(samples, 0.0);
  }

  void add(const Trajectory& t) {
    ++count;
    const double inv = 1.0 / static_cast<double>(count);
    if (times.empty()) times = t.times;
    for (std::size_t i = 0; i < t.times.size(); ++i) {
      const double v[5] = {t.bloch[i].x, t.bloch[i].y, t.bloch[i].z, t.record[i], t.control[i]};
      for (int c = 0; c < 5; ++c) {
        const double delta = v[c] - mean[c][i];
        mean[c][i] += delta * inv;
        m2[c][i] += delta * (v[c] - mean[c][i]);
      }
      beta_abs[i] += (t.beta_abs[i] - beta_abs[i]) * inv;
      gamma_d[i] += (t.gamma_d[i] - gamma_d[i]) * inv;
      b_stark[i] += (t.b_stark[i] - b_stark[i]) * inv;
    }
    diag += t.diagnostics;
  }

  void merge(const Accumulator& o) {
    if (o.count == 0) return;
    if (count == 0) {
      *this = o;
      return;
    }
    const double na = static_cast<double>(count), nb = static_cast<double>(o.count);
    const double n = na + nb;
    for (std::size_t i = 0; i < times.size(); ++i) {
      for (int c = 0; c < 5; ++c) {
        const double delta = o.mean[c][i] - mean[c][i];
        mean[c][i] += delta * nb / n;
        m2[c][i] += o.m2[c][i] + delta * delta * na * nb / n;
      }
      beta_abs[i] += (o.beta_abs[i] - beta_abs[i]) * nb / n;
      gamma_d[i] += (o.gamma_d[i] - gamma_d[i]) * nb / n;
      b_stark[i] += (o.b_stark[i] - b_stark[i]) * nb / n;
    }
    count += o.count;
    diag += o.diag;
  }

  EnsembleStats finish() const {
    EnsembleStats s;
    s.times = times;
    s.n_trajectories = count;
    s.diagnostics = diag;
    const double inv = 1.0 / static_cast<double>(count);
    const std::size_t n = times.size();
    s.mean_bloch.resize(n);
    s.var_bloch.resize(n);
    s.var_record.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      s.mean_bloch[i] = {mean[0][i], mean[1][i], mean[2][i]};
      s.var_bloch[i] = {m2[0][i] * inv, m2[1][i] * inv, m2[2][i] * inv};
      s.var_record[i] = m2[3][i] * inv;
    }
    s.mean_record = mean[3];
    s.mean_control = mean[4];
    s.mean_beta_abs = beta_abs;
    s.mean_gamma_d = gamma_d;
    s.mean_b_stark = b_stark;
    return s;
  }
};

constexpr std::size_t kChunk = 8;

}  // namespace

std::uint64_t trajectory_seed(std::uint64_t base_seed, std::uint64_t index) {
  return splitmix64(splitmix64(base_seed) ^ (index + 0x632be59bd9b4e019ULL));
}

Trajectory run_trajectory(const ExperimentConfig& cfg, std::uint64_t seed) {
  if (cfg.mode == RunMode::error_ode_only) {
    throw DomainError("run_trajectory: error_ode_only mode has no quantum trajectory");
  }
  const double dt = cfg.dt;
  const std::size_t decim = decimation(cfg);
  const std::size_t samples = sample_count(cfg);
  const std::size_t steps = samples * decim;

  Plant plant(cfg, dt);
  const DerivedParams& d = plant.derived();
  const bool feedback = cfg.mode == RunMode::feedback;
  const double open_amp = rabi_amplitude_for_target(cfg.rabi_target, d);

  const std::size_t update_every =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(cfg.controller.sample_period / dt)));
  // Drive outputs awaiting application; before the first controller sample the
  // actuator holds the open-loop amplitude.
  std::deque<double> pending(cfg.latency_samples, open_amp);
  double applied = open_amp;
  OnePoleLowPass record_filter(cfg.record_cutoff, dt);

  WienerIncrements noise(seed, dt);

  Trajectory out;
  out.seed = seed;
  out.times.resize(samples);
  out.bloch.resize(samples);
  out.record.assign(samples, 0.0);
  out.control.resize(samples);
  out.beta_abs.resize(samples);
  out.gamma_d.resize(samples);
  out.b_stark.resize(samples);

  BlochState state = cfg.initial;
  double record_sum = 0.0;
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    const auto& m = plant.advance_cavity(t);

    if (!feedback) {
      applied = open_amp;
    } else if (k % update_every == 0) {
      double s = state.z;
      if (cfg.feedback_signal == FeedbackSignal::record) {
        const double gain = std::sqrt(cfg.physical.kappa * cfg.physical.eta) * m.beta_abs;
        if (gain > 1e-12) s = record_filter.value() / gain;
      }
      const auto ctrl = feedback_law(tracking_error(s, reference(t, cfg.controller.omega_R0)),
                                     state.y, state.z, t, cfg.controller, cfg.physical.gamma_1, d);
      out.diagnostics.saturations += ctrl.saturated;
      out.diagnostics.regularizations += ctrl.regularized;
      if (pending.empty()) {
        applied = ctrl.u;
      } else {
        pending.push_back(ctrl.u);
        applied = pending.front();
        pending.pop_front();
      }
    }

    const QubitRates rates = plant.rates(applied);
    const double dW = noise();

    if (k % decim == 0) {
      const std::size_t i = k / decim;
      out.times[i] = t;
      out.bloch[i] = state;
      out.control[i] = applied;
      out.beta_abs[i] = m.beta_abs;
      out.gamma_d[i] = m.gamma_d;
      out.b_stark[i] = m.b_stark;
    }

    const double current = homodyne_sample(state, rates.record_gain(), dW, dt, t).value;
    record_sum += current;
    if (feedback && cfg.feedback_signal == FeedbackSignal::record) record_filter(current);

    StepDiagnostics diag;
    state = step_sme(state, rates, dW, dt, diag);
    out.diagnostics.projections += diag.projected;
    out.diagnostics.damping_clamps += diag.damping_clamped;
    require_finite(state, k);

    if ((k + 1) % decim == 0) {
      out.record[k / decim] = record_sum / static_cast<double>(decim);
      record_sum = 0.0;
    }
  }
  out.diagnostics.steps = steps;
  return out;
}

EnsembleStats run_ensemble(const ExperimentConfig& cfg, std::size_t n, std::uint64_t base_seed,
                           unsigned workers) {
  if (n < 1) throw DomainError("run_ensemble: n must be at least 1");
  const std::size_t samples = sample_count(cfg);
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, chunks));

  Accumulator total(samples);
  std::map<std::size_t, Accumulator> ready;
  std::size_t next_merge = 0;
  std::mutex mu;
  std::atomic<std::size_t> next_chunk{0};
  std::exception_ptr failure;

  auto work = [&] {
    for (;;) {
      const std::size_t c = next_chunk.fetch_add(1);
      if (c >= chunks) return;
      Accumulator acc(samples);
      try {
        for (std::size_t i = c * kChunk; i < std::min(n, (c + 1) * kChunk); ++i) {
          acc.add(run_trajectory(cfg, trajectory_seed(base_seed, i)));
        }
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
        next_chunk = chunks;
        return;
      }
      std::lock_guard lock(mu);
      ready.emplace(c, std::move(acc));
      // Merge strictly in chunk order so the result is independent of scheduling.
      for (auto it = ready.find(next_merge); it != ready.end(); it = ready.find(next_merge)) {
        total.merge(it->second);
        ready.erase(it);
        ++next_merge;
      }
    }
  };

  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);
  return total.finish();
}

EnsembleStats average(std::span<const Trajectory> trajs) {
  if (trajs.empty()) throw DomainError("average: empty trajectory set");
  const auto& grid = trajs.front().times;
  for (const auto& t : trajs) {
    if (t.times != grid) throw DomainError("average: trajectories have mismatched time grids");
  }
  const std::size_t n = grid.size();
  const double inv = 1.0 / static_cast<double>(trajs.size());

  EnsembleStats s;
  s.times = grid;
  s.n_trajectories = trajs.size();
  s.mean_bloch.assign(n, {0.0, 0.0, 0.0});
  s.var_bloch.assign(n, {});
  s.mean_record.assign(n, 0.0);
  s.var_record.assign(n, 0.0);
  s.mean_control.assign(n, 0.0);
  s.mean_beta_abs.assign(n, 0.0);
  s.mean_gamma_d.assign(n, 0.0);
  s.mean_b_stark.assign(n, 0.0);

  for (const auto& t : trajs) {
    for (std::size_t i = 0; i < n; ++i) {
      s.mean_bloch[i].x += t.bloch[i].x;
      s.mean_bloch[i].y += t.bloch[i].y;
      s.mean_bloch[i].z += t.bloch[i].z;
      s.mean_record[i] += t.record[i];
      s.mean_control[i] += t.control[i];
      s.mean_beta_abs[i] += t.beta_abs[i];
      s.mean_gamma_d[i] += t.gamma_d[i];
      s.mean_b_stark[i] += t.b_stark[i];
    }
    s.diagnostics += t.diagnostics;
  }
  for (std::size_t i = 0; i < n; ++i) {
    s.mean_bloch[i].x *= inv;
    s.mean_bloch[i].y *= inv;
    s.mean_bloch[i].z *= inv;
    s.mean_record[i] *= inv;
    s.mean_control[i] *= inv;
    s.mean_beta_abs[i] *= inv;
    s.mean_gamma_d[i] *= inv;
    s.mean_b_stark[i] *= inv;
  }
  for (const auto& t : trajs) {
    for (std::size_t i = 0; i < n; ++i) {
      const double dx = t.bloch[i].x - s.mean_bloch[i].x;
      const double dy = t.bloch[i].y - s.mean_bloch[i].y;
      const double dz = t.bloch[i].z - s.mean_bloch[i].z;
      const double dr = t.record[i] - s.mean_record[i];
      s.var_bloch[i].x += dx * dx * inv;
      s.var_bloch[i].y += dy * dy * inv;
      s.var_bloch[i].z += dz * dz * inv;
      s.var_record[i] += dr * dr * inv;
    }
  }
  return s;
}

std::vector<double> coupled_final_z(const ExperimentConfig& cfg, std::uint64_t seed,
                                    double fine_dt, std::span<const std::size_t> factors,
                                    double final_time) {
  if (cfg.mode != RunMode::open_loop) throw DomainError("coupled_final_z: open-loop mode only");
  if (factors.empty()) throw DomainError("coupled_final_z: no levels");
  const std::size_t fine_steps = steps_for(final_time, fine_dt);

  struct Level {
    std::size_t factor;
    Plant plant;
    BlochState state;
    double dW = 0.0;
    std::size_t step = 0;
  };
  std::vector<Level> levels;
  levels.reserve(factors.size());
  for (std::size_t f : factors) {
    if (f == 0 || fine_steps % f != 0) {
      throw DomainError("coupled_final_z: factor must divide the fine step count");
    }
    levels.push_back({f, Plant(cfg, fine_dt * static_cast<double>(f)), cfg.initial});
  }
  const double open_amp = rabi_amplitude_for_target(cfg.rabi_target, derive_dispersive(cfg.physical));

  WienerIncrements noise(seed, fine_dt);
  for (std::size_t k = 0; k < fine_steps; ++k) {
    const double w = noise();
    for (auto& lv : levels) {
      lv.dW += w;
      if ((k + 1) % lv.factor != 0) continue;
      const double h = fine_dt * static_cast<double>(lv.factor);
      lv.plant.advance_cavity(static_cast<double>(lv.step) * h);
      lv.state = step_sme(lv.state, lv.plant.rates(open_amp), lv.dW, h);
      lv.dW = 0.0;
      ++lv.step;
    }
  }
  std::vector<double> out;
  out.reserve(levels.size());
  for (const auto& lv : levels) out.push_back(lv.state.z);
  return out;
}

ErrorTrace run_error_ode(const ExperimentConfig& cfg) {
  const std::size_t decim = decimation(cfg);
  const std::size_t steps = sample_count(cfg) * decim;
  ErrorTrace tr;
  double eps = cfg.error_initial;
  for (std::size_t k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) * cfg.dt;
    if (eps == 0.0 && tr.zero_time < 0.0) tr.zero_time = t;
    if (k % decim == 0) {
      tr.times.push_back(t);
      tr.epsilon.push_back(eps);
      tr.lyapunov.push_back(lyapunov(eps));
    }
    if (k < steps) eps = closed_loop_error_step(eps, cfg.controller, cfg.dt);
  }
  return tr;
}

}  // namespace cqfb
