#include "cqfb/cavity.hpp"

#include <cmath>

#include "cqfb/errors.hpp"

namespace cqfb {

namespace {

struct Eigenrates {
  cplx g, e;
};

Eigenrates eigenrates(const DerivedParams& d, double kappa) {
  const cplx i(0.0, 1.0);
  return {-i * (d.delta_c - d.chi) - kappa / 2.0, -i * (d.delta_c + d.chi) - kappa / 2.0};
}

// (e^{x} - 1) / lambda with x = lambda dt, accurate for small |x|.
cplx expm1_over(cplx lambda, double dt) {
  const cplx x = lambda * dt;
  if (std::abs(x) < 1e-5) {
    return dt * (1.0 + x / 2.0 + x * x / 6.0);
  }
  return (std::exp(x) - 1.0) / lambda;
}

void check_step(double kappa, double dt) {
  if (!(dt > 0.0)) throw DomainError("cavity step: dt must be positive");
  if (kappa * dt > kMaxKappaDt * (1.0 + 1e-12)) {
    throw DomainError("cavity step: kappa*dt exceeds 0.1");
  }
}

}  // namespace

cplx drive_at(const DriveSchedule& schedule, double t) {
  if (schedule.mode == DriveMode::continuous) return {schedule.amplitude, 0.0};
  const double phase = std::fmod(t, schedule.period);
  return phase < schedule.pulse_on ? cplx(schedule.amplitude, 0.0) : cplx(0.0, 0.0);
}

PointerStepper::PointerStepper(const DerivedParams& d, double kappa, double dt) : dt_(dt) {
  check_step(kappa, dt);
  const auto lam = eigenrates(d, kappa);
  prop_g_ = std::exp(lam.g * dt);
  prop_e_ = std::exp(lam.e * dt);
  gain_g_ = expm1_over(lam.g, dt);
  gain_e_ = expm1_over(lam.e, dt);
}

CavityPair step_pointer_states(const CavityPair& c, cplx eps_d, const DerivedParams& d,
                               double kappa, double dt) {
  return PointerStepper(d, kappa, dt).step(c, eps_d);
}

CavityPair steady_state(cplx eps_d, const DerivedParams& d, double kappa) {
  const auto lam = eigenrates(d, kappa);
  const cplx drive = cplx(0.0, -1.0) * eps_d;
  return {-drive / lam.g, -drive / lam.e};
}

MeasurementQuantities measurement_quantities(const CavityPair& c, double chi) {
  MeasurementQuantities m;
  m.beta = c.alpha_e - c.alpha_g;
  m.beta_abs = std::abs(m.beta);
  const cplx overlap = c.alpha_g * std::conj(c.alpha_e);
  m.gamma_d = 2.0 * chi * overlap.imag();
  m.b_stark = 2.0 * chi * overlap.real();
  return m;
}

}  // namespace cqfb
