#include "cqfb/params.hpp"

#include <cmath>
#include <limits>

#include "cqfb/errors.hpp"

namespace cqfb {

bool ValidationReport::all_pass() const {
  for (const auto& c : checks) {
    if (c.status != CheckStatus::pass) return false;
  }
  return true;
}

DerivedParams derive_dispersive(const PhysicalParams& p) {
  DerivedParams d;
  d.delta_big = p.omega_q - p.omega_c;
  if (d.delta_big == 0.0) {
    throw DomainError("derive_dispersive: zero qubit-cavity detuning, dispersive shift undefined");
  }
  d.delta_c = p.omega_c - p.omega_d;
  d.chi = p.g * p.g / d.delta_big;
  d.omega_q_tilde = p.omega_q - p.omega_r + d.chi;
  d.g = p.g;
  return d;
}

double rabi_amplitude_for_target(double omega_R_target, const DerivedParams& d) {
  if (d.g == 0.0) throw DomainError("rabi_amplitude_for_target: g must be nonzero");
  return omega_R_target * d.delta_big / (2.0 * d.g);
}

double rabi_rate_from_amplitude(double eps_r, const DerivedParams& d) {
  return 2.0 * eps_r * d.g / d.delta_big;
}

ValidationReport validate_regimes(const PhysicalParams& p, const RegimeThresholds& t) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  ValidationReport report;

  const double delta = std::abs(p.omega_q - p.omega_c);
  const double disp = p.g == 0.0 ? inf : delta / std::abs(p.g);
  report.checks.push_back({"dispersive |Delta|/g", disp, t.dispersive,
                           disp >= t.dispersive ? CheckStatus::pass : CheckStatus::warn});

  // gamma_1 = 0 is the infinitely separated limit.
  const double adiab = p.gamma_1 == 0.0 ? inf : p.kappa / p.gamma_1;
  report.checks.push_back({"adiabatic kappa/gamma_1", adiab, t.adiabatic,
                           adiab >= t.adiabatic ? CheckStatus::pass : CheckStatus::warn});
  return report;
}

void check_physical(const PhysicalParams& p) {
  if (!(p.kappa > 0.0)) throw ConfigError("kappa out of range: requires kappa > 0");
  if (!(p.gamma_1 >= 0.0)) throw ConfigError("gamma_1 out of range: requires gamma_1 >= 0");
  if (!(p.gamma_phi >= 0.0)) throw ConfigError("gamma_phi out of range: requires gamma_phi >= 0");
  if (!(p.eta >= 0.0 && p.eta <= 1.0)) throw ConfigError("eta out of range: requires 0 ≤ eta ≤ 1");
}

}  // namespace cqfb
