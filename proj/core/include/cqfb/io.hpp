#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "cqfb/dsp.hpp"
#include "cqfb/ensemble.hpp"
#include "cqfb/experiment.hpp"

namespace cqfb {

/// Column-major numeric table with the `#` header lines preserved.
struct CsvTable {
  std::vector<std::string> comments;  // header lines without the leading '#'
  std::vector<std::string> columns;
  std::vector<std::vector<double>> data;  // data[column][row]

  const std::vector<double>& column(const std::string& name) const;
};

/// Trajectory columns: time_ns, x, y, z, record, control_MHz, beta_abs,
/// gamma_d_MHz, b_stark_MHz. Numbers use 17 significant digits.
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj,
                          const ExperimentConfig& cfg);

/// Same columns as a trajectory (ensemble means) plus var_x, var_y, var_z, var_record.
void write_ensemble_csv(const std::filesystem::path& path, const EnsembleStats& stats,
                        const ExperimentConfig& cfg);

/// freq_MHz followed by one density column per spectrum.
void write_spectra_csv(const std::filesystem::path& path, const std::vector<std::string>& names,
                       const std::vector<Spectrum>& spectra, const ExperimentConfig& cfg);

void write_error_trace_csv(const std::filesystem::path& path, const ErrorTrace& trace,
                           const ExperimentConfig& cfg);

/// Writes UTF-8 text, throwing IoError with the path on failure.
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

CsvTable parse_csv(const std::string& text);
CsvTable read_csv(const std::filesystem::path& path);

}  // namespace cqfb
