#include "cqfb/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "cqfb/config.hpp"
#include "cqfb/errors.hpp"
#include "cqfb/units.hpp"

namespace cqfb {

namespace {

void put(std::string& out, double v) {
  char buf[40];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  out.append(buf, end);
}

std::string header(const ExperimentConfig& cfg, const std::string& units) {
  std::string out = "# cqfb simulate output\n";
  std::istringstream echo(config_to_text(cfg));
  for (std::string line; std::getline(echo, line);) out += "# " + line + '\n';
  out += "# units: " + units + '\n';
  return out;
}

void write_rows(const std::filesystem::path& path, std::string text,
                const std::vector<std::string>& columns,
                const std::vector<const std::vector<double>*>& data) {
  for (std::size_t c = 0; c < columns.size(); ++c) text += (c ? "," : "") + columns[c];
  text += '\n';
  const std::size_t rows = data.empty() ? 0 : data.front()->size();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < data.size(); ++c) {
      if (c) text += ',';
      put(text, (*data[c])[r]);
    }
    text += '\n';
  }
  write_text(path, text);
}

std::vector<double> scaled(const std::vector<double>& v, double factor) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] * factor;
  return out;
}

std::vector<double> to_mhz(const std::vector<double>& v) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = angular_to_mhz(v[i]);
  return out;
}

const char* kTrajectoryUnits =
    "time_ns ns; x y z dimensionless; record 1/sqrt(s) (mean current over the sample); "
    "control_MHz epsilon_r/2pi in MHz; beta_abs dimensionless; gamma_d_MHz and b_stark_MHz rate/2pi in MHz";

}  // namespace

const std::vector<double>& CsvTable::column(const std::string& name) const {
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (columns[c] == name) return data[c];
  }
  throw IoError("csv: no column named '" + name + "'");
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj,
                          const ExperimentConfig& cfg) {
  std::vector<double> x, y, z;
  for (const auto& b : traj.bloch) x.push_back(b.x), y.push_back(b.y), z.push_back(b.z);
  const auto t = scaled(traj.times, 1e9);
  const auto u = to_mhz(traj.control), gd = to_mhz(traj.gamma_d), bs = to_mhz(traj.b_stark);
  write_rows(path, header(cfg, kTrajectoryUnits),
             {"time_ns", "x", "y", "z", "record", "control_MHz", "beta_abs", "gamma_d_MHz", "b_stark_MHz"},
             {&t, &x, &y, &z, &traj.record, &u, &traj.beta_abs, &gd, &bs});
}

void write_ensemble_csv(const std::filesystem::path& path, const EnsembleStats& s,
                        const ExperimentConfig& cfg) {
  std::vector<double> x, y, z, vx, vy, vz;
  for (const auto& b : s.mean_bloch) x.push_back(b.x), y.push_back(b.y), z.push_back(b.z);
  for (const auto& v : s.var_bloch) vx.push_back(v.x), vy.push_back(v.y), vz.push_back(v.z);
  const auto t = scaled(s.times, 1e9);
  const auto u = to_mhz(s.mean_control), gd = to_mhz(s.mean_gamma_d), bs = to_mhz(s.mean_b_stark);
  std::string head = header(cfg, std::string(kTrajectoryUnits) + "; var_* pointwise population variance");
  head += "# ensemble: n_trajectories " + std::to_string(s.n_trajectories) + '\n';
  write_rows(path, head,
             {"time_ns", "x", "y", "z", "record", "control_MHz", "beta_abs", "gamma_d_MHz", "b_stark_MHz",
              "var_x", "var_y", "var_z", "var_record"},
             {&t, &x, &y, &z, &s.mean_record, &u, &s.mean_beta_abs, &gd, &bs, &vx, &vy, &vz, &s.var_record});
}

void write_spectra_csv(const std::filesystem::path& path, const std::vector<std::string>& names,
                       const std::vector<Spectrum>& spectra, const ExperimentConfig& cfg) {
  if (spectra.empty() || names.size() != spectra.size()) throw IoError("write_spectra_csv: bad arguments");
  const auto f = scaled(spectra.front().frequencies, 1e-6);
  std::vector<std::string> columns{"freq_MHz"};
  std::vector<const std::vector<double>*> data{&f};
  for (std::size_t i = 0; i < spectra.size(); ++i) {
    columns.push_back(names[i]);
    data.push_back(&spectra[i].density);
  }
  std::string head = header(cfg, "freq_MHz MHz; psd one-sided variance per Hz of the series");
  head += "# psd convention: Welch, Hann window, one-sided; unit-variance white noise at sample period dt reads 2*dt\n";
  write_rows(path, head, columns, data);
}

void write_error_trace_csv(const std::filesystem::path& path, const ErrorTrace& trace,
                           const ExperimentConfig& cfg) {
  const auto t = scaled(trace.times, 1e9);
  write_rows(path, header(cfg, "time_ns ns; epsilon dimensionless; lyapunov epsilon^2/2"),
             {"time_ns", "epsilon", "lyapunov"}, {&t, &trace.epsilon, &trace.lyapunov});
}

CsvTable parse_csv(const std::string& text) {
  CsvTable table;
  std::istringstream in(text);
  std::string line;
  bool have_columns = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!have_columns && line.front() == '#') {
      table.comments.push_back(line.substr(1));
      continue;
    }
    std::vector<std::string> cells;
    std::size_t start = 0;
    for (;;) {
      const auto comma = line.find(',', start);
      cells.push_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (!have_columns) {
      table.columns = cells;
      table.data.resize(cells.size());
      have_columns = true;
      continue;
    }
    if (cells.size() != table.columns.size()) {
      throw IoError("csv line " + std::to_string(line_no) + ": expected " +
                    std::to_string(table.columns.size()) + " fields");
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      double v = 0.0;
      const auto& cell = cells[c];
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || ptr != cell.data() + cell.size()) {
        throw IoError("csv line " + std::to_string(line_no) + ": bad number '" + cell + "'");
      }
      table.data[c].push_back(v);
    }
  }
  if (!have_columns) throw IoError("csv: no column header");
  return table;
}

CsvTable read_csv(const std::filesystem::path& path) {
  try {
    return parse_csv(read_text(path));
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

}  // namespace cqfb
