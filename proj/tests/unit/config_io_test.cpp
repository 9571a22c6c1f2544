#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <json.hpp>
#include <random>
#include <sstream>
#include <unistd.h>

#include "cqfb/config.hpp"
#include "cqfb/errors.hpp"
#include "cqfb/io.hpp"
#include "cqfb/presets.hpp"
#include "cqfb/units.hpp"

using namespace cqfb;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("cqfb_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

std::string message_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

int line_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.line();
  }
  return -1;
}

int simulate(const std::string& args) {
  const std::string cmd = std::string(CQFB_SIMULATE_EXE) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(ParseConfig, EmptyTextGivesDefaults) {
  const auto cfg = parse_config("");
  EXPECT_NEAR(angular_to_mhz(cfg.physical.kappa), 20.0, 1e-12);
  EXPECT_NEAR(angular_to_mhz(cfg.physical.g), 100.0, 1e-12);
  EXPECT_NEAR(angular_to_mhz(cfg.physical.omega_q - cfg.physical.omega_c), 2000.0, 1e-9);
  EXPECT_EQ(cfg.dt, 1e-10);
  EXPECT_EQ(cfg.sample_interval, 1e-9);
  EXPECT_EQ(cfg.n_trajectories, 1000u);
  EXPECT_EQ(cfg.initial.z, 1.0);
  EXPECT_EQ(cfg.backaction, Backaction::matched);
  EXPECT_EQ(cfg.drive.mode, DriveMode::continuous);
  EXPECT_EQ(cfg.controller.sigma_y_floor, 0.05);
  EXPECT_EQ(cfg.latency_samples, 1u);
  EXPECT_EQ(config_to_text(cfg), config_to_text(parse_config(documented_defaults())));
}

TEST(ParseConfig, EtaRangeNamesInvariant) {
  EXPECT_NE(message_of("eta = 1.5\n").find("0 ≤ eta ≤ 1"), std::string::npos);
  EXPECT_EQ(line_of("# comment\n\neta = 1.5\n"), 3);
}

TEST(ParseConfig, SyntaxErrorsCarryLineNumbers) {
  EXPECT_EQ(line_of("kappa_mhz = 20\nthis line has no equals\n"), 2);
  EXPECT_EQ(line_of("kappa_mhz = abc\n"), 1);
  EXPECT_EQ(line_of("kappa_mhz =\n"), 1);
  EXPECT_EQ(line_of("eta = 1\nnot_a_key = 3\n"), 2);
  EXPECT_NE(message_of("not_a_key = 3\n").find("unknown key"), std::string::npos);
  EXPECT_EQ(line_of("eta = 1\neta = 0.5\n"), 2);
  EXPECT_EQ(line_of("mode = sideways\n"), 1);
  EXPECT_EQ(line_of("include_gamma_d = maybe\n"), 1);
}

TEST(ParseConfig, InvariantsRejected) {
  EXPECT_THROW(parse_config("kappa_mhz = 0\n"), ConfigError);
  EXPECT_THROW(parse_config("dt_ns = 0.3\n"), ConfigError);
  EXPECT_THROW(parse_config("dt_ns = 2\nsample_ns = 2\n"), ConfigError);
  EXPECT_THROW(parse_config("rabi_mhz = 1\nduration_us = 5\n"), ConfigError);
  EXPECT_THROW(parse_config("mode = feedback\nrabi_mhz = 0\nduration_us = 1\n"), ConfigError);
  EXPECT_THROW(parse_config("omega_q_mhz = 6000\n"), ConfigError);
  EXPECT_THROW(parse_config("initial_x = 1\ninitial_z = 1\n"), ConfigError);
  EXPECT_THROW(parse_config("psd_segment = 20000\n"), ConfigError);
  EXPECT_THROW(parse_config("n_trajectories = 0\n"), ConfigError);
  EXPECT_NO_THROW(parse_config("rabi_mhz = 0\nduration_us = 0.5\n"));
}

TEST(ParseConfig, CommentsAndWhitespace) {
  const auto cfg = parse_config("  # leading comment\n\tkappa_mhz   =  25   \n\n# x = 5\n");
  EXPECT_NEAR(angular_to_mhz(cfg.physical.kappa), 25.0, 1e-12);
}

TEST(Presets, FeedbackPresetParameters) {
  const auto cfg = parse_config(preset_text("fig3a"));
  EXPECT_EQ(cfg.mode, RunMode::feedback);
  EXPECT_NEAR(angular_to_mhz(cfg.rabi_target), 2.5, 1e-12);
  EXPECT_NEAR(angular_to_mhz(cfg.drive.amplitude), 1.0, 1e-12);
  EXPECT_EQ(cfg.controller.k1, 5e6);
  EXPECT_EQ(cfg.controller.k2, 1e8);
  EXPECT_EQ(cfg.n_trajectories, 1000u);
  EXPECT_NEAR(cfg.controller.u_max, 50.0 * open_loop_amplitude(cfg), 1e-6);
}

TEST(Presets, AllParseAndUnknownRejected) {
  for (const auto& name : preset_names()) EXPECT_NO_THROW(parse_config(preset_text(name))) << name;
  const auto fig2b = parse_config(preset_text("fig2b"));
  EXPECT_NEAR(angular_to_mhz(fig2b.drive.amplitude), 20.0, 1e-12);
  EXPECT_EQ(fig2b.n_trajectories, 1u);
  EXPECT_THROW(preset_text("fig9"), ConfigError);
}

TEST(ConfigText, RoundTripBitExact) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.01, 3.0);
  for (int i = 0; i < 50; ++i) {
    ExperimentConfig cfg = parse_config("");
    cfg.physical.kappa = mhz_to_angular(10.0 + u(rng));
    cfg.physical.gamma_1 = mhz_to_angular(0.01 * u(rng));
    cfg.physical.gamma_phi = mhz_to_angular(0.1 * u(rng));
    cfg.physical.eta = u(rng) / 3.0;
    cfg.drive.amplitude = mhz_to_angular(u(rng));
    cfg.rabi_target = mhz_to_angular(1.0 + u(rng));
    cfg.lockin_delay = 1e-9 * u(rng);
    cfg.controller.k1 = 1e6 * u(rng);
    cfg = resolve(cfg);
    const auto text = config_to_text(cfg);
    const auto back = parse_config(text);
    EXPECT_EQ(config_to_text(back), text);
    EXPECT_EQ(back.physical.kappa, cfg.physical.kappa);
    EXPECT_EQ(back.physical.gamma_phi, cfg.physical.gamma_phi);
    EXPECT_EQ(back.drive.amplitude, cfg.drive.amplitude);
    EXPECT_EQ(back.rabi_target, cfg.rabi_target);
    EXPECT_EQ(back.lockin_delay, cfg.lockin_delay);
  }
}

TEST(Csv, TrajectoryRoundTripIsExact) {
  TempDir dir;
  auto cfg = parse_config("rabi_mhz = 5\nduration_us = 2\nname = rt\n");
  const auto traj = run_trajectory(cfg, 3);
  const auto path = dir.path() / "rt.csv";
  write_trajectory_csv(path, traj, cfg);
  const auto table = read_csv(path);
  const auto& z = table.column("z");
  const auto& t = table.column("time_ns");
  const auto& rec = table.column("record");
  const auto& gd = table.column("gamma_d_MHz");
  ASSERT_EQ(z.size(), traj.bloch.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    ASSERT_EQ(z[i], traj.bloch[i].z);
    ASSERT_EQ(t[i], traj.times[i] * 1e9);
    ASSERT_EQ(rec[i], traj.record[i]);
    ASSERT_EQ(gd[i], angular_to_mhz(traj.gamma_d[i]));
  }
  const std::vector<std::string> expected{"time_ns", "x", "y", "z", "record", "control_MHz",
                                          "beta_abs", "gamma_d_MHz", "b_stark_MHz"};
  EXPECT_EQ(table.columns, expected);
  EXPECT_THROW(table.column("nope"), IoError);
}

TEST(Csv, HeaderEchoReproducesConfig) {
  TempDir dir;
  auto cfg = parse_config("rabi_mhz = 5\nduration_us = 2\nkappa_mhz = 17.5\neta = 0.8\nbase_seed = 99\n");
  const auto path = dir.path() / "h.csv";
  write_trajectory_csv(path, run_trajectory(cfg, 1), cfg);
  const auto text = read_text(path);
  const auto echoed = extract_header_config(text);
  // Every key is echoed, so every non-default key is too.
  EXPECT_NE(echoed.find("kappa_mhz = 17.5"), std::string::npos);
  EXPECT_NE(echoed.find("eta = 0.8"), std::string::npos);
  EXPECT_NE(echoed.find("base_seed = 99"), std::string::npos);
  EXPECT_EQ(config_to_text(parse_config(echoed)), config_to_text(cfg));
}

TEST(Csv, RerunFromHeaderIsIdentical) {
  TempDir dir;
  auto cfg = parse_config("rabi_mhz = 5\nduration_us = 2\nn_trajectories = 3\nname = first\n");
  cfg.output_dir = (dir.path() / "a").string();
  cfg = resolve(cfg);
  run_config(cfg);
  const auto first = read_text(dir.path() / "a" / "first.csv");
  auto again = parse_config(extract_header_config(first));
  again.output_dir = (dir.path() / "b").string();
  again = resolve(again);
  run_config(again);
  const auto second = read_text(dir.path() / "b" / "first.csv");
  // Only the echoed output_dir differs.
  auto strip = [](const std::string& s) {
    std::string out;
    std::istringstream in(s);
    for (std::string line; std::getline(in, line);) {
      if (line.rfind("# output_dir", 0) != 0) out += line + '\n';
    }
    return out;
  };
  EXPECT_EQ(strip(first), strip(second));
}

TEST(Io, FailuresCarryPath) {
  TempDir dir;
  const auto blocker = dir.path() / "file";
  write_text(blocker, "x");
  try {
    write_text(blocker / "sub" / "out.csv", "data");
    FAIL() << "write under a regular file succeeded";
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find(blocker.string()), std::string::npos);
  }
  EXPECT_THROW(read_text(dir.path() / "missing.csv"), IoError);
}

TEST(RunPreset, ErrorTraceHitsZero) {
  TempDir dir;
  RunOverrides o;
  o.out_dir = dir.path();
  const auto result = run_preset("eq9", o);
  const auto summary = nlohmann::json::parse(result.summary_json);
  const double t0 = summary["runs"][0]["zero_time_ns"].get<double>();
  EXPECT_NEAR(t0, std::log(21.0) / 1e8 * 1e9, 0.01 * 30.4);
  const auto table = read_csv(dir.path() / "eq9.csv");
  EXPECT_EQ(table.columns, (std::vector<std::string>{"time_ns", "epsilon", "lyapunov"}));
  EXPECT_EQ(table.column("epsilon").front(), 1.0);
  EXPECT_EQ(table.column("epsilon").back(), 0.0);
}

TEST(RunPreset, StrongMeasurementSingleTrajectory) {
  TempDir dir;
  RunOverrides o;
  o.out_dir = dir.path();
  run_preset("fig2b", o);
  const auto table = read_csv(dir.path() / "fig2b.csv");
  const auto& z = table.column("z");
  EXPECT_EQ(z.size(), 10000u);
  std::size_t pinned = 0;
  for (double v : z) pinned += std::abs(v) > 0.9;
  EXPECT_GT(static_cast<double>(pinned) / static_cast<double>(z.size()), 0.5);
  EXPECT_TRUE(fs::exists(dir.path() / "fig2b_summary.json"));
}

TEST(RunPreset, SpectraComparisonFiles) {
  TempDir dir;
  RunOverrides o;
  o.out_dir = dir.path();
  o.trajectories = 8;
  const auto result = run_preset("fig3b", o);
  const auto table = read_csv(dir.path() / "fig3b_psd.csv");
  EXPECT_EQ(table.columns, (std::vector<std::string>{"freq_MHz", "psd_feedback", "psd_open_loop"}));
  const auto summary = nlohmann::json::parse(result.summary_json);
  EXPECT_EQ(summary["runs"].size(), 3u);
  EXPECT_TRUE(summary["runs"][2]["spectra"].contains("feedback_fwhm_mhz"));
  EXPECT_TRUE(fs::exists(dir.path() / "fig3b_lockin.csv"));
}

TEST(RunPreset, WeakDriveSummaryHasFittedFrequency) {
  TempDir dir;
  RunOverrides o;
  o.out_dir = dir.path();
  o.trajectories = 64;
  const auto summary = nlohmann::json::parse(run_preset("fig2a", o).summary_json);
  const auto& ed1 = summary["runs"][0];
  EXPECT_EQ(ed1["name"], "fig2a_ed1");
  EXPECT_NEAR(ed1["fitted_frequency_mhz"].get<double>(), 1.0, 0.1);
  EXPECT_NEAR(ed1["fitted_frequency"].get<double>(), 1e6, 1e5);
}

TEST(Cli, ExitCodes) {
  TempDir dir;
  EXPECT_EQ(simulate("--print-defaults"), 0);
  EXPECT_EQ(simulate("--print-preset fig3b"), 0);
  EXPECT_EQ(simulate("--no-such-flag"), 1);
  EXPECT_EQ(simulate(""), 1);
  const auto bad = dir.path() / "bad.cfg";
  write_text(bad, "eta = 1.5\n");
  EXPECT_EQ(simulate("--config " + bad.string()), 2);
  EXPECT_EQ(simulate("--preset nonsense"), 2);
  EXPECT_EQ(simulate("--config " + (dir.path() / "missing.cfg").string()), 4);
  write_text(dir.path() / "blocker", "x");
  EXPECT_EQ(simulate("--preset eq9 --out " + (dir.path() / "blocker" / "sub").string()), 4);
  EXPECT_EQ(simulate("--preset eq9 --out " + (dir.path() / "ok").string()), 0);
  EXPECT_TRUE(fs::exists(dir.path() / "ok" / "eq9.csv"));
  // Rerun straight from an exported CSV.
  EXPECT_EQ(simulate("--config " + (dir.path() / "ok" / "eq9.csv").string() + " --out " +
                     (dir.path() / "again").string()),
            0);
  EXPECT_EQ(read_text(dir.path() / "ok" / "eq9_summary.json"), read_text(dir.path() / "again" / "eq9_summary.json"));
}
