// simulate: command-line front end for the trajectory / feedback engine.
//
//   simulate --config FILE [--out DIR] [--seed N] [--trajectories N]
//   simulate --preset NAME [--out DIR] [--seed N] [--trajectories N]
//   simulate --print-defaults
//
// Exit codes: 0 ok, 1 usage, 2 config, 3 numeric, 4 io.

#include <CLI11.hpp>
#include <iostream>

#include "cqfb/config.hpp"
#include "cqfb/errors.hpp"
#include "cqfb/io.hpp"
#include "cqfb/presets.hpp"

namespace {

enum Exit { kOk = 0, kUsage = 1, kConfig = 2, kNumeric = 3, kIo = 4 };

void report_regimes(const cqfb::ExperimentConfig& cfg) {
  for (const auto& c : cqfb::validate_regimes(cfg.physical, cfg.thresholds).checks) {
    if (c.status == cqfb::CheckStatus::warn) {
      std::cerr << "warning: " << c.name << " = " << c.ratio << " below threshold " << c.threshold << '\n';
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic trajectory simulator for measurement-based Rabi feedback"};
  std::string config_path, preset;
  std::string out_dir;
  std::uint64_t seed = 0;
  std::size_t trajectories = 0;
  unsigned workers = 0;
  bool print_defaults = false;
  std::string print_preset;

  auto* config_opt = app.add_option("--config", config_path,
                                    "Config file (key = value); an exported CSV reruns from its header echo");
  auto* preset_opt = app.add_option("--preset", preset, "fig2a | fig2b | fig3a | fig3b | eq9");
  auto* out_opt = app.add_option("--out", out_dir, "Output directory");
  auto* seed_opt = app.add_option("--seed", seed, "Base seed");
  auto* traj_opt = app.add_option("--trajectories", trajectories, "Ensemble size")->check(CLI::PositiveNumber);
  auto* workers_opt = app.add_option("--workers", workers, "Worker threads (0 = all cores)");
  app.add_flag("--print-defaults", print_defaults, "Print the documented default config and exit");
  app.add_option("--print-preset", print_preset, "Print the config text of a preset and exit");
  config_opt->excludes(preset_opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    if (print_defaults) {
      std::cout << cqfb::documented_defaults();
      return kOk;
    }
    if (!print_preset.empty()) {
      std::cout << cqfb::preset_text(print_preset);
      return kOk;
    }

    cqfb::RunOverrides overrides;
    if (*out_opt) overrides.out_dir = out_dir;
    if (*seed_opt) overrides.seed = seed;
    if (*traj_opt) overrides.trajectories = trajectories;
    if (*workers_opt) overrides.workers = workers;

    cqfb::RunResult result;
    if (*preset_opt) {
      report_regimes(cqfb::parse_config(cqfb::preset_text(preset)));
      result = cqfb::run_preset(preset, overrides);
    } else if (*config_opt) {
      std::string text = cqfb::read_text(config_path);
      if (!text.empty() && text.front() == '#' && text.find("# cqfb simulate output") == 0) {
        text = cqfb::extract_header_config(text);
      }
      const auto cfg = cqfb::apply_overrides(cqfb::parse_config(text), overrides);
      report_regimes(cfg);
      result = cqfb::run_config(cfg);
    } else {
      std::cerr << app.help();
      return kUsage;
    }
    for (const auto& f : result.files) std::cout << f.string() << '\n';
    return kOk;
  } catch (const cqfb::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const cqfb::IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return kIo;
  } catch (const cqfb::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kNumeric;
  } catch (const cqfb::DomainError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kNumeric;
  }
}
