#pragma once

#include <string>
#include <vector>

namespace cqfb {

/// Device parameters. All rates and frequencies are angular (rad/s).
struct PhysicalParams {
  double omega_c = 0.0;    // cavity
  double omega_q = 0.0;    // qubit
  double omega_d = 0.0;    // readout drive carrier
  double omega_r = 0.0;    // Rabi drive carrier
  double g = 0.0;          // qubit-cavity coupling
  double kappa = 0.0;      // cavity decay
  double gamma_1 = 0.0;    // qubit relaxation
  double gamma_phi = 0.0;  // pure dephasing
  double eta = 1.0;        // measurement efficiency
};

/// Quantities of the effective dispersive-frame Hamiltonian.
struct DerivedParams {
  double delta_big = 0.0;      // omega_q - omega_c
  double delta_c = 0.0;        // omega_c - omega_d
  double chi = 0.0;            // g^2 / delta_big
  double omega_q_tilde = 0.0;  // omega_q - omega_r + chi
  double g = 0.0;
};

struct RegimeThresholds {
  double dispersive = 10.0;  // minimum |Delta| / g
  double adiabatic = 10.0;   // minimum kappa / gamma_1
};

enum class CheckStatus { pass, warn };

struct RegimeCheck {
  std::string name;
  double ratio = 0.0;
  double threshold = 0.0;
  CheckStatus status = CheckStatus::pass;
};

struct ValidationReport {
  std::vector<RegimeCheck> checks;
  bool all_pass() const;
};

/// Throws DomainError when omega_q == omega_c.
DerivedParams derive_dispersive(const PhysicalParams& p);

/// Drive amplitude epsilon_r = Omega_R * Delta / (2 g) producing the Rabi
/// rate omega_R_target in the dispersive frame.
double rabi_amplitude_for_target(double omega_R_target, const DerivedParams& d);

/// Inverse map: Omega_R = 2 epsilon_r g / Delta.
double rabi_rate_from_amplitude(double eps_r, const DerivedParams& d);

ValidationReport validate_regimes(const PhysicalParams& p, const RegimeThresholds& t = {});

/// Hard invariants (kappa > 0, nonnegative rates, eta in [0,1]). Throws ConfigError.
void check_physical(const PhysicalParams& p);

}  // namespace cqfb
