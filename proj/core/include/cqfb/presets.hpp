#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cqfb/experiment.hpp"

namespace cqfb {

/// Names accepted by run_preset: fig2a, fig2b, fig3a, fig3b, eq9.
const std::vector<std::string>& preset_names();

/// Config text of a preset (parseable by parse_config). Throws ConfigError
/// for an unknown name.
std::string preset_text(const std::string& name);

struct RunOverrides {
  std::optional<std::filesystem::path> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trajectories;
  std::optional<unsigned> workers;
};

struct RunResult {
  std::vector<std::filesystem::path> files;
  std::string summary_json;
};

/// Applies overrides and re-validates.
ExperimentConfig apply_overrides(ExperimentConfig cfg, const RunOverrides& o);

/// Runs whatever cfg.mode describes and writes CSV + <name>_summary.json
/// into cfg.output_dir.
RunResult run_config(const ExperimentConfig& cfg);

/// fig2a: open-loop ensembles at drive 1 and 8 MHz. fig2b: one trajectory at
/// 20 MHz. fig3a: feedback ensemble. fig3b: feedback and open-loop averaged
/// record spectra. eq9: closed-loop error trace.
RunResult run_preset(const std::string& name, const RunOverrides& o = {});

}  // namespace cqfb
