#pragma once

#include <Eigen/Core>
#include <complex>

namespace cqfb {

/// Conditional qubit state as (<sigma_x>, <sigma_y>, <sigma_z>).
struct BlochState {
  double x = 0.0;
  double y = 0.0;
  double z = 1.0;

  double norm() const;
};

struct BlochVector {
  double x = 0.0, y = 0.0, z = 0.0;
};

/// Gain of the H[sigma_z] innovation term relative to the record coefficient
/// M = sqrt(kappa eta)|beta|.
///   matched: H coefficient M/2. This pairs with the record I = M z + xi and
///            with Gamma_d = kappa|beta|^2/2, so a pure state stays pure at eta = 1.
///   literal: H coefficient M, as the SME is usually printed for this model.
///            Overdrives the innovation by 2x against the dephasing it implies.
enum class Backaction { matched, literal };

struct QubitRates {
  double gamma_1 = 0.0;
  double gamma_phi = 0.0;
  double eta = 1.0;
  double omega_ac = 0.0;  // omega_q_tilde + B(t)
  double omega_R = 0.0;   // instantaneous Rabi rate
  double gamma_d = 0.0;   // measurement-induced dephasing
  double beta_abs = 0.0;
  double kappa = 0.0;
  Backaction backaction = Backaction::matched;

  /// Record coefficient sqrt(kappa eta)|beta|.
  double record_gain() const;
  /// Coefficient multiplying H[sigma_z] rho dW.
  double innovation_gain() const;
};

/// Deterministic Bloch derivatives. The transverse damping
/// gamma_1/2 + gamma_phi + Gamma_d is clamped at zero; clamped is set when
/// that happens.
BlochVector bloch_drift(const BlochState& s, const QubitRates& r, bool* clamped = nullptr);

/// Coefficients of dW: (-2 m z x, -2 m z y, 2 m (1 - z^2)) with m the
/// innovation gain.
BlochVector bloch_diffusion(const BlochState& s, const QubitRates& r);

struct StepDiagnostics {
  bool projected = false;
  bool damping_clamped = false;
};

/// Euler-Maruyama step followed by radial projection onto the unit sphere
/// when the norm exceeds 1.
BlochState step_sme(const BlochState& s, const QubitRates& r, double dW, double dt);
BlochState step_sme(const BlochState& s, const QubitRates& r, double dW, double dt,
                    StepDiagnostics& diag);

using DensityMatrix = Eigen::Matrix2cd;

/// Basis ordering (|e>, |g>): sigma_z = diag(1, -1), sigma_- = |g><e|.
DensityMatrix density_from_bloch(const BlochState& s);
BlochState bloch_from_density(const DensityMatrix& rho);

/// Matrix-level Euler step of the SME, built from commutators and the
/// D[.] and H[.] superoperators directly. Independent check of step_sme.
/// Throws DomainError if Tr rho deviates from 1 by more than 1e-9.
DensityMatrix density_matrix_oracle_step(const DensityMatrix& rho, const QubitRates& r,
                                         double dW, double dt);

struct RecordSample {
  double t = 0.0;
  double value = 0.0;  // homodyne current, units sqrt(1/s)
  double dW = 0.0;
};

/// I = M z + dW/dt, using the same dW that drove step_sme.
RecordSample homodyne_sample(const BlochState& s, double M, double dW, double dt, double t = 0.0);

}  // namespace cqfb
