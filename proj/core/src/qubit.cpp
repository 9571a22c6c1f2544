#include "cqfb/qubit.hpp"

#include <cmath>

#include "cqfb/errors.hpp"

namespace cqfb {

double BlochState::norm() const { return std::sqrt(x * x + y * y + z * z); }

double QubitRates::record_gain() const { return std::sqrt(kappa * eta) * beta_abs; }

double QubitRates::innovation_gain() const {
  const double m = record_gain();
  return backaction == Backaction::matched ? 0.5 * m : m;
}

BlochVector bloch_drift(const BlochState& s, const QubitRates& r, bool* clamped) {
  double transverse = 0.5 * r.gamma_1 + r.gamma_phi + r.gamma_d;
  if (transverse < 0.0) {
    transverse = 0.0;
    if (clamped) *clamped = true;
  }
  return {-r.omega_ac * s.y - transverse * s.x,
          r.omega_ac * s.x - r.omega_R * s.z - transverse * s.y,
          r.omega_R * s.y - r.gamma_1 * (1.0 + s.z)};
}

BlochVector bloch_diffusion(const BlochState& s, const QubitRates& r) {
  const double m = r.innovation_gain();
  return {-2.0 * m * s.z * s.x, -2.0 * m * s.z * s.y, 2.0 * m * (1.0 - s.z * s.z)};
}

BlochState step_sme(const BlochState& s, const QubitRates& r, double dW, double dt,
                    StepDiagnostics& diag) {
  if (!(dt > 0.0)) throw DomainError("step_sme: dt must be positive");
  const auto a = bloch_drift(s, r, &diag.damping_clamped);
  const auto b = bloch_diffusion(s, r);
  BlochState next{s.x + a.x * dt + b.x * dW, s.y + a.y * dt + b.y * dW,
                  s.z + a.z * dt + b.z * dW};
  const double n2 = next.x * next.x + next.y * next.y + next.z * next.z;
  if (n2 > 1.0) {
    const double inv = 1.0 / std::sqrt(n2);
    next.x *= inv;
    next.y *= inv;
    next.z *= inv;
    diag.projected = true;
  }
  return next;
}

BlochState step_sme(const BlochState& s, const QubitRates& r, double dW, double dt) {
  StepDiagnostics diag;
  return step_sme(s, r, dW, dt, diag);
}

namespace {

using M2 = DensityMatrix;
using C = std::complex<double>;

const M2& sx() {
  static const M2 m = (M2() << 0, 1, 1, 0).finished();
  return m;
}
const M2& sy() {
  static const M2 m = (M2() << 0, C(0, -1), C(0, 1), 0).finished();
  return m;
}
const M2& sz() {
  static const M2 m = (M2() << 1, 0, 0, -1).finished();
  return m;
}
const M2& sminus() {
  static const M2 m = (M2() << 0, 0, 1, 0).finished();
  return m;
}

M2 commutator(const M2& a, const M2& b) { return a * b - b * a; }

M2 dissipator(const M2& a, const M2& rho) {
  const M2 ad = a.adjoint();
  return a * rho * ad - 0.5 * (ad * a * rho) - 0.5 * (rho * ad * a);
}

M2 innovation(const M2& a, const M2& rho) {
  const M2 ad = a.adjoint();
  const C mean = ((a + ad) * rho).trace();
  return a * rho + rho * ad - mean * rho;
}

}  // namespace

DensityMatrix density_from_bloch(const BlochState& s) {
  return 0.5 * (M2::Identity() + s.x * sx() + s.y * sy() + s.z * sz());
}

BlochState bloch_from_density(const DensityMatrix& rho) {
  return {(sx() * rho).trace().real(), (sy() * rho).trace().real(), (sz() * rho).trace().real()};
}

DensityMatrix density_matrix_oracle_step(const DensityMatrix& rho, const QubitRates& r,
                                         double dW, double dt) {
  if (std::abs(rho.trace() - C(1.0, 0.0)) > 1e-9) {
    throw DomainError("density_matrix_oracle_step: input trace is not 1");
  }
  const C i(0.0, 1.0);
  double dephasing = r.gamma_phi + r.gamma_d;
  // Same clamp as bloch_drift: D[sigma_z] contributes 2*(dephasing/2) to the
  // transverse rate.
  if (0.5 * r.gamma_1 + dephasing < 0.0) dephasing = -0.5 * r.gamma_1;

  M2 drho = -i * (r.omega_ac / 2.0) * commutator(sz(), rho) * dt;
  drho += -i * (r.omega_R / 2.0) * commutator(sx(), rho) * dt;
  drho += r.gamma_1 * dissipator(sminus(), rho) * dt;
  drho += (dephasing / 2.0) * dissipator(sz(), rho) * dt;
  drho += r.innovation_gain() * innovation(sz(), rho) * dW;

  M2 next = rho + drho;
  next /= next.trace();
  return next;
}

RecordSample homodyne_sample(const BlochState& s, double M, double dW, double dt, double t) {
  if (!(dt > 0.0)) throw DomainError("homodyne_sample: dt must be positive");
  return {t, M * s.z + dW / dt, dW};
}

}  // namespace cqfb
