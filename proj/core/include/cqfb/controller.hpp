#pragma once

#include "cqfb/params.hpp"

namespace cqfb {

struct ControllerConfig {
  double k1 = 5e6;             // sign-term gain, 1/s
  double k2 = 1e8;             // proportional gain, 1/s
  double omega_R0 = 0.0;       // reference Rabi frequency, rad/s
  double sigma_y_floor = 0.05;
  double u_max = 0.0;          // saturation on |epsilon_r|, rad/s
  double sample_period = 0.0;  // controller update interval, s (0: one integrator step)
};

struct ControlState {
  double epsilon = 0.0;
  double u = 0.0;  // Rabi-drive amplitude epsilon_r, rad/s
  bool saturated = false;
  bool regularized = false;
};

/// Throws ConfigError on k1 <= 0, k2 <= 0, sigma_y_floor <= 0 or u_max <= 0.
void check_controller(const ControllerConfig& cfg);

/// s*(t) = cos(Omega_R0 t).
double reference(double t, double omega_R0);

double tracking_error(double s, double s_star);

/// sign with sign(0) = 0.
double signum(double v);

/// 1/y for |y| >= floor, y/floor^2 inside the floor. Continuous and odd.
double regularized_inverse(double y, double floor);

/// Lyapunov tracking law
///   u = -(Delta/2g) inv(y) [K1 sign(eps) + K2 eps - gamma_1 (1 + z) + Omega_R0 sin(Omega_R0 t)]
/// clamped to [-u_max, u_max]. The plant sees Omega_R = 2 u g / Delta.
ControlState feedback_law(double eps, double y_est, double z_est, double t,
                          const ControllerConfig& cfg, double gamma_1, const DerivedParams& d);

/// One step of eps' = -K1 sign(eps) - K2 eps, exact inside a sign region and
/// clamped to 0 when the step would cross zero.
double closed_loop_error_step(double eps, const ControllerConfig& cfg, double dt);

/// First zero of the closed-loop error for eps0: ln(1 + K2|eps0|/K1) / K2.
double closed_loop_zero_time(double eps0, const ControllerConfig& cfg);

/// nu = eps^2 / 2.
double lyapunov(double eps);

}  // namespace cqfb
