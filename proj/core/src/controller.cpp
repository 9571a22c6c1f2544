#include "cqfb/controller.hpp"

#include <cmath>

#include "cqfb/errors.hpp"

namespace cqfb {

void check_controller(const ControllerConfig& cfg) {
  if (!(cfg.k1 > 0.0)) throw ConfigError("k1 out of range: requires k1 > 0");
  if (!(cfg.k2 > 0.0)) throw ConfigError("k2 out of range: requires k2 > 0");
  if (!(cfg.sigma_y_floor > 0.0)) {
    throw ConfigError("sigma_y_floor out of range: requires sigma_y_floor > 0");
  }
  if (!(cfg.u_max > 0.0)) throw ConfigError("u_max out of range: requires u_max > 0");
}

double reference(double t, double omega_R0) { return std::cos(omega_R0 * t); }

double tracking_error(double s, double s_star) { return s - s_star; }

double signum(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

double regularized_inverse(double y, double floor) {
  if (std::abs(y) >= floor) return 1.0 / y;
  return y / (floor * floor);
}

ControlState feedback_law(double eps, double y_est, double z_est, double t,
                          const ControllerConfig& cfg, double gamma_1, const DerivedParams& d) {
  ControlState out;
  out.epsilon = eps;
  out.regularized = std::abs(y_est) < cfg.sigma_y_floor;

  const double bracket = cfg.k1 * signum(eps) + cfg.k2 * eps - gamma_1 * (1.0 + z_est) +
                         cfg.omega_R0 * std::sin(cfg.omega_R0 * t);
  const double u = -(d.delta_big / (2.0 * d.g)) * regularized_inverse(y_est, cfg.sigma_y_floor) *
                   bracket;
  out.saturated = std::abs(u) > cfg.u_max;
  out.u = out.saturated ? std::copysign(cfg.u_max, u) : u;
  return out;
}

double closed_loop_error_step(double eps, const ControllerConfig& cfg, double dt) {
  if (!(dt > 0.0)) throw DomainError("closed_loop_error_step: dt must be positive");
  const double s = signum(eps);
  if (s == 0.0) return 0.0;
  const double offset = s * cfg.k1 / cfg.k2;
  const double next = (eps + offset) * std::exp(-cfg.k2 * dt) - offset;
  return signum(next) == s ? next : 0.0;
}

double closed_loop_zero_time(double eps0, const ControllerConfig& cfg) {
  return std::log1p(cfg.k2 * std::abs(eps0) / cfg.k1) / cfg.k2;
}

double lyapunov(double eps) { return 0.5 * eps * eps; }

}  // namespace cqfb
