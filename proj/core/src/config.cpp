#include "cqfb/config.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <set>
#include <sstream>
#include <type_traits>
#include <vector>

#include "cqfb/errors.hpp"
#include "cqfb/units.hpp"

namespace cqfb {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Shortest text that parses back to the same bits.
std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

double parse_double(std::string_view key, std::string_view text, int line) {
  double v = 0.0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  if (!text.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
    throw ConfigError("expected a number for '" + std::string(key) + "', got '" + std::string(text) + "'", line);
  }
  return v;
}

// Shortest-search for a decimal in display units whose conversion back lands
// exactly on the stored value.
template <class To, class From>
std::string format_converted(double stored, To to_display, From from_display) {
  double shown = to_display(stored);
  for (int k = 0; k < 8 && from_display(shown) != stored; ++k) {
    const double up = std::nextafter(shown, INFINITY), down = std::nextafter(shown, -INFINITY);
    if (from_display(up) == stored) {
      shown = up;
    } else if (from_display(down) == stored) {
      shown = down;
    } else {
      shown = from_display(shown) < stored ? up : down;
    }
  }
  return format_double(shown);
}

struct Key {
  std::string name;
  std::string doc;
  std::function<void(ExperimentConfig&, std::string_view, int)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

template <class Field>
Key frequency_key(std::string name, std::string doc, Field field) {
  return {name, std::move(doc),
          [field, name](ExperimentConfig& c, std::string_view v, int line) {
            field(c) = mhz_to_angular(parse_double(name, v, line));
          },
          [field](const ExperimentConfig& c) {
            const double w = field(c);
            return format_converted(w, angular_to_mhz, [](double m) { return mhz_to_angular(m); });
          }};
}

template <class Field>
Key scaled_key(std::string name, std::string doc, Field field, double scale) {
  return {name, std::move(doc),
          [field, name, scale](ExperimentConfig& c, std::string_view v, int line) {
            field(c) = parse_double(name, v, line) * scale;
          },
          [field, scale](const ExperimentConfig& c) {
            const double s = field(c);
            return format_converted(s, [scale](double x) { return x / scale; },
                                    [scale](double x) { return x * scale; });
          }};
}

template <class Field>
Key number_key(std::string name, std::string doc, Field field,
               std::function<void(double, int)> check = {}) {
  return {name, std::move(doc),
          [field, name, check](ExperimentConfig& c, std::string_view v, int line) {
            const double x = parse_double(name, v, line);
            if (check) check(x, line);
            field(c) = x;
          },
          [field](const ExperimentConfig& c) {
            return format_double(field(c));
          }};
}

template <class Field>
Key count_key(std::string name, std::string doc, Field field) {
  return {name, std::move(doc),
          [field, name](ExperimentConfig& c, std::string_view v, int line) {
            const double x = parse_double(name, v, line);
            if (x < 0.0 || x != std::floor(x) || x > 1.8e19) {
              throw ConfigError(name + " out of range: requires a nonnegative integer", line);
            }
            field(c) = static_cast<std::remove_cvref_t<decltype(field(c))>>(x);
          },
          [field](const ExperimentConfig& c) {
            return std::to_string(field(c));
          }};
}

template <class Enum, class Field>
Key enum_key(std::string name, std::string doc, Field field, std::vector<std::pair<std::string, Enum>> options) {
  return {name, std::move(doc),
          [field, name, options](ExperimentConfig& c, std::string_view v, int line) {
            for (const auto& [label, value] : options) {
              if (v == label) {
                field(c) = value;
                return;
              }
            }
            std::string allowed;
            for (const auto& o : options) allowed += (allowed.empty() ? "" : "|") + o.first;
            throw ConfigError(name + " must be one of " + allowed + ", got '" + std::string(v) + "'", line);
          },
          [field, options](const ExperimentConfig& c) {
            const Enum value = field(c);
            for (const auto& [label, v] : options) {
              if (v == value) return label;
            }
            return std::string("?");
          }};
}

template <class Field>
Key bool_key(std::string name, std::string doc, Field field) {
  return {name, std::move(doc),
          [field, name](ExperimentConfig& c, std::string_view v, int line) {
            if (v == "true") {
              field(c) = true;
            } else if (v == "false") {
              field(c) = false;
            } else {
              throw ConfigError("expected true or false for '" + name + "'", line);
            }
          },
          [field](const ExperimentConfig& c) {
            return std::string(field(c) ? "true" : "false");
          }};
}

template <class Field>
Key string_key(std::string name, std::string doc, Field field) {
  return {name, std::move(doc),
          [field, name](ExperimentConfig& c, std::string_view v, int line) {
            if (v.size() >= 2 && v.front() == '"' && v.back() == '"') v = v.substr(1, v.size() - 2);
            if (v.empty()) throw ConfigError(name + " must not be empty", line);
            field(c) = std::string(v);
          },
          [field](const ExperimentConfig& c) { return field(c); }};
}

#define CQFB_FIELD(expr) [](auto& c) -> auto& { return c.expr; }

const std::vector<Key>& keys() {
  static const std::vector<Key> table = [] {
    std::vector<Key> k;
    k.push_back(frequency_key("omega_c_mhz", "cavity frequency", CQFB_FIELD(physical.omega_c)));
    k.push_back(frequency_key("omega_q_mhz", "qubit frequency", CQFB_FIELD(physical.omega_q)));
    k.push_back(frequency_key("omega_d_mhz", "readout drive carrier", CQFB_FIELD(physical.omega_d)));
    k.push_back(frequency_key("omega_r_mhz", "Rabi drive carrier (omega_q + chi zeroes the Lamb-shifted qubit frequency)",
                              CQFB_FIELD(physical.omega_r)));
    k.push_back(frequency_key("g_mhz", "qubit-cavity coupling", CQFB_FIELD(physical.g)));
    k.push_back(frequency_key("kappa_mhz", "cavity decay rate, > 0", CQFB_FIELD(physical.kappa)));
    k.push_back(frequency_key("gamma_1_mhz", "qubit relaxation rate, >= 0", CQFB_FIELD(physical.gamma_1)));
    k.push_back(frequency_key("gamma_phi_mhz", "pure dephasing rate, >= 0", CQFB_FIELD(physical.gamma_phi)));
    k.push_back(number_key("eta", "measurement efficiency, 0 ≤ eta ≤ 1", CQFB_FIELD(physical.eta),
                           [](double v, int line) {
                             if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("eta out of range: requires 0 ≤ eta ≤ 1", line);
                           }));
    k.push_back(number_key("dispersive_threshold", "warn below this |Delta|/g", CQFB_FIELD(thresholds.dispersive)));
    k.push_back(number_key("adiabatic_threshold", "warn below this kappa/gamma_1", CQFB_FIELD(thresholds.adiabatic)));

    k.push_back(frequency_key("drive_amplitude_mhz", "readout drive amplitude epsilon_d/2pi", CQFB_FIELD(drive.amplitude)));
    k.push_back(enum_key<DriveMode>("drive_mode", "continuous | pulsed", CQFB_FIELD(drive.mode),
                                    {{"continuous", DriveMode::continuous}, {"pulsed", DriveMode::pulsed}}));
    k.push_back(scaled_key("pulse_on_ns", "pulsed drive on-time", CQFB_FIELD(drive.pulse_on), 1e-9));
    k.push_back(scaled_key("pulse_period_ns", "pulsed drive repetition period", CQFB_FIELD(drive.period), 1e-9));

    k.push_back(enum_key<RunMode>("mode", "open_loop | feedback | error_ode_only", CQFB_FIELD(mode),
                                  {{"open_loop", RunMode::open_loop},
                                   {"feedback", RunMode::feedback},
                                   {"error_ode_only", RunMode::error_ode_only}}));
    k.push_back(frequency_key("rabi_mhz", "open-loop Rabi frequency / feedback reference Omega_R0/2pi",
                              CQFB_FIELD(rabi_target)));
    k.push_back(number_key("k1", "sign-term gain K1 (1/s), > 0", CQFB_FIELD(controller.k1)));
    k.push_back(number_key("k2", "proportional gain K2 (1/s), > 0", CQFB_FIELD(controller.k2)));
    k.push_back(number_key("sigma_y_floor", "regularization floor for 1/<sigma_y>, > 0", CQFB_FIELD(controller.sigma_y_floor)));
    k.push_back(number_key("u_max_factor", "drive saturation in units of the open-loop amplitude", CQFB_FIELD(u_max_factor)));
    k.push_back(scaled_key("controller_period_ns", "controller update interval, 0 = one integration step",
                           CQFB_FIELD(controller.sample_period), 1e-9));
    k.push_back(count_key("latency_samples", "controller latency in update intervals", CQFB_FIELD(latency_samples)));
    k.push_back(enum_key<FeedbackSignal>("feedback_signal", "estimate | record", CQFB_FIELD(feedback_signal),
                                         {{"estimate", FeedbackSignal::estimate}, {"record", FeedbackSignal::record}}));
    k.push_back(scaled_key("record_cutoff_mhz", "record-mode smoothing cutoff", CQFB_FIELD(record_cutoff), 1e6));

    k.push_back(enum_key<Backaction>("backaction", "matched | literal (innovation gain M/2 or M)",
                                     CQFB_FIELD(backaction),
                                     {{"matched", Backaction::matched}, {"literal", Backaction::literal}}));
    k.push_back(bool_key("include_gamma_d", "apply measurement-induced dephasing", CQFB_FIELD(include_gamma_d)));
    k.push_back(number_key("initial_x", "initial <sigma_x>", CQFB_FIELD(initial.x)));
    k.push_back(number_key("initial_y", "initial <sigma_y>", CQFB_FIELD(initial.y)));
    k.push_back(number_key("initial_z", "initial <sigma_z> (1 = excited)", CQFB_FIELD(initial.z)));

    k.push_back(scaled_key("duration_us", "simulated time", CQFB_FIELD(duration), 1e-6));
    k.push_back(scaled_key("dt_ns", "integration step", CQFB_FIELD(dt), 1e-9));
    k.push_back(scaled_key("sample_ns", "export interval, multiple of dt", CQFB_FIELD(sample_interval), 1e-9));
    k.push_back(count_key("n_trajectories", "ensemble size, >= 1", CQFB_FIELD(n_trajectories)));
    k.push_back(count_key("base_seed", "ensemble base seed", CQFB_FIELD(base_seed)));
    k.push_back(count_key("workers", "worker threads, 0 = hardware concurrency", CQFB_FIELD(workers)));
    k.push_back(number_key("error_initial", "initial tracking error for error_ode_only", CQFB_FIELD(error_initial)));

    k.push_back(scaled_key("lockin_delay_ns", "lock-in reference delay", CQFB_FIELD(lockin_delay), 1e-9));
    k.push_back(scaled_key("lockin_cutoff_mhz", "lock-in low-pass cutoff, 0 = rabi_mhz/10", CQFB_FIELD(lockin_cutoff), 1e6));
    k.push_back(count_key("psd_segment", "Welch segment length in samples, 0 = whole record", CQFB_FIELD(psd_segment)));
    k.push_back(number_key("psd_overlap", "Welch segment overlap fraction", CQFB_FIELD(psd_overlap)));
    k.push_back(string_key("output_dir", "output directory", CQFB_FIELD(output_dir)));
    k.push_back(string_key("name", "run name (file prefix)", CQFB_FIELD(name)));
    return k;
  }();
  return table;
}

#undef CQFB_FIELD

ExperimentConfig default_config() {
  ExperimentConfig c;
  c.physical.omega_c = mhz_to_angular(6000.0);
  c.physical.omega_q = mhz_to_angular(8000.0);
  c.physical.omega_d = mhz_to_angular(6000.0);
  c.physical.omega_r = mhz_to_angular(8005.0);
  c.physical.g = mhz_to_angular(100.0);
  c.physical.kappa = mhz_to_angular(20.0);
  c.physical.gamma_1 = mhz_to_angular(0.05);
  c.physical.gamma_phi = mhz_to_angular(0.1);
  c.physical.eta = 1.0;
  c.drive.amplitude = mhz_to_angular(1.0);
  c.rabi_target = mhz_to_angular(1.0);
  return c;
}

}  // namespace

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig cfg = default_config();
  std::set<std::string, std::less<>> seen;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError("syntax error: expected 'key = value'", line_no);
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("syntax error: missing key", line_no);
    if (value.empty()) throw ConfigError("syntax error: missing value for '" + std::string(key) + "'", line_no);

    const Key* spec = nullptr;
    for (const auto& k : keys()) {
      if (k.name == key) spec = &k;
    }
    if (!spec) throw ConfigError("unknown key '" + std::string(key) + "'", line_no);
    if (!seen.insert(std::string(key)).second) {
      throw ConfigError("duplicate key '" + std::string(key) + "'", line_no);
    }
    spec->set(cfg, value, line_no);
  }
  return resolve(cfg);
}

std::string config_to_text(const ExperimentConfig& cfg) {
  std::ostringstream os;
  for (const auto& k : keys()) os << k.name << " = " << k.get(cfg) << '\n';
  return os.str();
}

std::string documented_defaults() {
  const ExperimentConfig cfg = default_config();
  std::ostringstream os;
  os << "# Defaults. Frequencies and rates are ordinary frequencies nu/2pi in MHz.\n";
  for (const auto& k : keys()) {
    os << "# " << k.doc << '\n' << k.name << " = " << k.get(cfg) << '\n';
  }
  return os.str();
}

std::string extract_header_config(std::string_view csv_text) {
  std::string out;
  std::size_t pos = 0;
  while (pos < csv_text.size()) {
    const auto nl = csv_text.find('\n', pos);
    const auto line = csv_text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? csv_text.size() : nl + 1;
    if (line.empty() || line.front() != '#') break;
    const auto body = trim(line.substr(1));
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) continue;
    const auto key = trim(body.substr(0, eq));
    for (const auto& k : keys()) {
      if (k.name == key) {
        out += std::string(body) + '\n';
        break;
      }
    }
  }
  return out;
}

}  // namespace cqfb
