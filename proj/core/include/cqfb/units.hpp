#pragma once

#include <numbers>

namespace cqfb {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Config files quote every rate as an ordinary frequency nu/2pi in MHz;
// everything past the config boundary is angular (rad/s).
// One rounded constant each way keeps the round trip within 1 ulp.
inline constexpr double kAngularPerMhz = kTwoPi * 1e6;
constexpr double mhz_to_angular(double mhz) { return mhz * kAngularPerMhz; }
constexpr double angular_to_mhz(double omega) { return omega / kAngularPerMhz; }

constexpr double ns_to_s(double ns) { return ns * 1e-9; }
constexpr double s_to_ns(double s) { return s * 1e9; }
constexpr double us_to_s(double us) { return us * 1e-6; }

}  // namespace cqfb
