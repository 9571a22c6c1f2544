#pragma once

#include <complex>

#include "cqfb/params.hpp"

namespace cqfb {

using cplx = std::complex<double>;

/// Coherent amplitudes of the cavity conditioned on the qubit being in
/// |g> or |e> (the pointer states).
struct CavityPair {
  cplx alpha_g{0.0, 0.0};
  cplx alpha_e{0.0, 0.0};
};

struct MeasurementQuantities {
  cplx beta{0.0, 0.0};   // alpha_e - alpha_g
  double beta_abs = 0.0;
  double gamma_d = 0.0;  // 2 chi Im[alpha_g conj(alpha_e)], may be transiently negative
  double b_stark = 0.0;  // 2 chi Re[alpha_g conj(alpha_e)]
};

enum class DriveMode { continuous, pulsed };

struct DriveSchedule {
  double amplitude = 0.0;  // rad/s, real-positive phase convention
  double pulse_on = 20e-9;
  double period = 100e-9;
  DriveMode mode = DriveMode::continuous;
};

/// Readout drive epsilon_d(t). Pulsed mode is on while (t mod period) < pulse_on.
cplx drive_at(const DriveSchedule& schedule, double t);

/// Largest kappa*dt accepted by the steppers.
inline constexpr double kMaxKappaDt = 0.1;

/// One step of the pointer-state equations with epsilon_d held constant over
/// the step. Uses the exact solution of the linear ODE
///   alpha' = -i eps - i(Delta_c -/+ chi) alpha - kappa/2 alpha,
/// so the only error is from the piecewise-constant drive.
CavityPair step_pointer_states(const CavityPair& c, cplx eps_d, const DerivedParams& d,
                               double kappa, double dt);

/// Fixed point of the pointer-state equations for a constant drive.
CavityPair steady_state(cplx eps_d, const DerivedParams& d, double kappa);

MeasurementQuantities measurement_quantities(const CavityPair& c, double chi);

/// Fixed-dt stepper with the propagators precomputed; bit-identical to
/// step_pointer_states for the same arguments.
class PointerStepper {
 public:
  PointerStepper(const DerivedParams& d, double kappa, double dt);

  CavityPair step(const CavityPair& c, cplx eps_d) const {
    const cplx drive = cplx(0.0, -1.0) * eps_d;
    return {prop_g_ * c.alpha_g + gain_g_ * drive, prop_e_ * c.alpha_e + gain_e_ * drive};
  }

  double dt() const { return dt_; }

 private:
  double dt_;
  cplx prop_g_, prop_e_;  // e^{lambda dt}
  cplx gain_g_, gain_e_;  // (e^{lambda dt} - 1) / lambda
};

}  // namespace cqfb
