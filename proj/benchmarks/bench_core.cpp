#include <benchmark/benchmark.h>

#include "cqfb/cavity.hpp"
#include "cqfb/config.hpp"
#include "cqfb/dsp.hpp"
#include "cqfb/ensemble.hpp"
#include "cqfb/qubit.hpp"
#include "cqfb/units.hpp"

using namespace cqfb;

namespace {

void BM_StepSme(benchmark::State& state) {
  QubitRates r;
  r.gamma_1 = mhz_to_angular(0.05);
  r.gamma_phi = mhz_to_angular(0.1);
  r.omega_R = mhz_to_angular(1.0);
  r.kappa = mhz_to_angular(20.0);
  r.beta_abs = 0.1;
  WienerIncrements w(1, 1e-10);
  BlochState s;
  for (auto _ : state) {
    s = step_sme(s, r, w(), 1e-10);
    benchmark::DoNotOptimize(s);
  }
}
BENCHMARK(BM_StepSme);

void BM_PointerStepper(benchmark::State& state) {
  const auto cfg = parse_config("");
  const auto d = derive_dispersive(cfg.physical);
  PointerStepper stepper(d, cfg.physical.kappa, cfg.dt);
  CavityPair c;
  for (auto _ : state) {
    c = stepper.step(c, cplx(mhz_to_angular(1.0), 0.0));
    benchmark::DoNotOptimize(c);
  }
}
BENCHMARK(BM_PointerStepper);

void BM_RunTrajectory(benchmark::State& state) {
  const auto mode = state.range(0) ? "feedback" : "open_loop";
  const auto cfg = parse_config(std::string("mode = ") + mode + "\nrabi_mhz = 2.5\nduration_us = 4\n");
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(run_trajectory(cfg, ++seed));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(sample_count(cfg) * decimation(cfg)));
}
BENCHMARK(BM_RunTrajectory)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_RunEnsemble(benchmark::State& state) {
  const auto cfg = parse_config("rabi_mhz = 5\nduration_us = 2\n");
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_ensemble(cfg, 32, 1, static_cast<unsigned>(state.range(0))));
  }
}
BENCHMARK(BM_RunEnsemble)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);

void BM_Psd(benchmark::State& state) {
  WienerIncrements w(3, 1.0);
  TimeSeries s{0.0, 1e-9, std::vector<double>(static_cast<std::size_t>(state.range(0)))};
  for (auto& v : s.values) v = w();
  for (auto _ : state) benchmark::DoNotOptimize(psd(s, 4096));
}
BENCHMARK(BM_Psd)->Arg(10000)->Arg(1 << 18);

}  // namespace

BENCHMARK_MAIN();
