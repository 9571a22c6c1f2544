#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cqfb/dsp.hpp"
#include "cqfb/errors.hpp"
#include "cqfb/qubit.hpp"
#include "cqfb/units.hpp"

using namespace cqfb;

namespace {

using M2 = Eigen::Matrix2cd;
using C = std::complex<double>;

BlochState random_state(std::mt19937_64& rng, bool pure = false) {
  std::normal_distribution<double> n;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  BlochState s{n(rng), n(rng), n(rng)};
  const double r = pure ? 1.0 : std::cbrt(u(rng));
  const double norm = s.norm();
  return {r * s.x / norm, r * s.y / norm, r * s.z / norm};
}

QubitRates random_rates(std::mt19937_64& rng, Backaction b = Backaction::matched) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  QubitRates r;
  r.gamma_1 = mhz_to_angular(0.5 * u(rng));
  r.gamma_phi = mhz_to_angular(0.5 * u(rng));
  r.gamma_d = mhz_to_angular(u(rng) - 0.2);
  r.omega_ac = mhz_to_angular(4.0 * (u(rng) - 0.5));
  r.omega_R = mhz_to_angular(4.0 * (u(rng) - 0.5));
  r.kappa = mhz_to_angular(20.0);
  r.eta = u(rng);
  r.beta_abs = 2.0 * u(rng);
  r.backaction = b;
  return r;
}

// Pauli expectation values of H[sigma_z] rho, built here from the definition
// H[A]rho = A rho + rho A^dag - <A + A^dag> rho.
BlochVector innovation_expectations(const BlochState& s) {
  M2 sx, sy, sz;
  sx << 0, 1, 1, 0;
  sy << 0, C(0, -1), C(0, 1), 0;
  sz << 1, 0, 0, -1;
  const M2 rho = 0.5 * (M2::Identity() + s.x * sx + s.y * sy + s.z * sz);
  const C mean = (2.0 * sz * rho).trace();
  const M2 h = sz * rho + rho * sz - mean * rho;
  return {(sx * h).trace().real(), (sy * h).trace().real(), (sz * h).trace().real()};
}

}  // namespace

TEST(BlochDrift, GroundStateIsDark) {
  QubitRates r;
  r.gamma_1 = 1e5;
  r.gamma_phi = 3e5;
  const auto d = bloch_drift({0.0, 0.0, -1.0}, r);
  EXPECT_EQ(d.x, 0.0);
  EXPECT_EQ(d.y, 0.0);
  EXPECT_EQ(d.z, 0.0);
}

TEST(BlochDrift, ExcitedStateDecaysAtTwiceGammaOne) {
  QubitRates r;
  r.gamma_1 = 2.5e5;
  EXPECT_DOUBLE_EQ(bloch_drift({0.0, 0.0, 1.0}, r).z, -2.0 * r.gamma_1);
}

TEST(BlochDrift, PopulationEquationAndOracleAgree) {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 200; ++i) {
    const auto s = random_state(rng);
    auto r = random_rates(rng);
    r.gamma_d = std::abs(r.gamma_d);
    const auto d = bloch_drift(s, r);
    EXPECT_NEAR(d.z, r.omega_R * s.y - r.gamma_1 * (1.0 + s.z), 1e-9 * r.gamma_1 + 1e-9);
    // An oracle step with dW = 0 is a pure drift step.
    const double dt = 1e-9;
    const auto next = bloch_from_density(density_matrix_oracle_step(density_from_bloch(s), r, 0.0, dt));
    const double scale = std::abs(r.omega_R) + std::abs(r.omega_ac) + r.gamma_1 + r.gamma_phi + r.gamma_d;
    EXPECT_NEAR((next.x - s.x) / dt, d.x, 1e-9 * scale);
    EXPECT_NEAR((next.y - s.y) / dt, d.y, 1e-9 * scale);
    EXPECT_NEAR((next.z - s.z) / dt, d.z, 1e-9 * scale);
  }
}

TEST(BlochDrift, NegativeTransverseRateIsClamped) {
  QubitRates r;
  r.gamma_1 = 1.0;
  r.gamma_d = -10.0;
  bool clamped = false;
  const auto d = bloch_drift({0.5, 0.5, 0.0}, r, &clamped);
  EXPECT_TRUE(clamped);
  EXPECT_EQ(d.x, 0.0);
  EXPECT_EQ(d.y, 0.0);
  clamped = false;
  r.gamma_d = 1.0;
  (void)bloch_drift({0.5, 0.5, 0.0}, r, &clamped);
  EXPECT_FALSE(clamped);
}

TEST(BlochDiffusion, VanishesAtPoles) {
  QubitRates r;
  r.kappa = 1e8;
  r.beta_abs = 0.7;
  EXPECT_EQ(bloch_diffusion({0.0, 0.0, 1.0}, r).z, 0.0);
  EXPECT_EQ(bloch_diffusion({0.0, 0.0, -1.0}, r).z, 0.0);
}

TEST(BlochDiffusion, CenterOfBallLiteralGain) {
  QubitRates r;
  r.kappa = 1e8;
  r.eta = 0.5;
  r.beta_abs = 0.7;
  r.backaction = Backaction::literal;
  const double m = std::sqrt(r.kappa * r.eta) * r.beta_abs;
  const auto g = bloch_diffusion({0.0, 0.0, 0.0}, r);
  EXPECT_EQ(g.x, 0.0);
  EXPECT_EQ(g.y, 0.0);
  EXPECT_DOUBLE_EQ(g.z, 2.0 * m);
  r.backaction = Backaction::matched;
  EXPECT_DOUBLE_EQ(bloch_diffusion({0.0, 0.0, 0.0}, r).z, m);
}

TEST(BlochDiffusion, MatchesSuperoperatorExpectations) {
  std::mt19937_64 rng(5);
  for (Backaction b : {Backaction::literal, Backaction::matched}) {
    for (int i = 0; i < 100; ++i) {
      const auto s = random_state(rng);
      const auto r = random_rates(rng, b);
      const double gain = r.innovation_gain();
      const auto h = innovation_expectations(s);
      const auto g = bloch_diffusion(s, r);
      EXPECT_NEAR(g.x, gain * h.x, 1e-12 * (1.0 + gain));
      EXPECT_NEAR(g.y, gain * h.y, 1e-12 * (1.0 + gain));
      EXPECT_NEAR(g.z, gain * h.z, 1e-12 * (1.0 + gain));
      // The oracle's stochastic part, isolated by differencing two steps.
      const auto rho = density_from_bloch(s);
      const double dt = 1e-12, dW = 1e-6;
      const auto with = bloch_from_density(density_matrix_oracle_step(rho, r, dW, dt));
      const auto without = bloch_from_density(density_matrix_oracle_step(rho, r, 0.0, dt));
      EXPECT_NEAR((with.z - without.z) / dW, g.z, 1e-6 * (1.0 + gain));
    }
  }
}

TEST(InnovationGain, MatchedIsHalfTheRecordGain) {
  QubitRates r;
  r.kappa = 4e8;
  r.eta = 0.25;
  r.beta_abs = 3.0;
  EXPECT_DOUBLE_EQ(r.record_gain(), 3e4);
  EXPECT_DOUBLE_EQ(r.innovation_gain(), 1.5e4);
  r.backaction = Backaction::literal;
  EXPECT_DOUBLE_EQ(r.innovation_gain(), 3e4);
}

TEST(StepSme, FreeQubitUnchanged) {
  const BlochState s{0.3, -0.2, 0.5};
  const auto n = step_sme(s, QubitRates{}, 0.37, 1e-10);
  EXPECT_EQ(n.x, s.x);
  EXPECT_EQ(n.y, s.y);
  EXPECT_EQ(n.z, s.z);
}

TEST(StepSme, RelaxationFirstOrder) {
  QubitRates r;
  r.gamma_1 = mhz_to_angular(0.05);
  const double dt = 1e-10;
  const auto n = step_sme({0.0, 0.0, 1.0}, r, 0.0, dt);
  EXPECT_NEAR(n.z, 1.0 - 2.0 * r.gamma_1 * dt, 1e-15);
}

TEST(StepSme, RejectsNonPositiveStep) {
  EXPECT_THROW(step_sme({}, QubitRates{}, 0.0, 0.0), DomainError);
  EXPECT_THROW(step_sme({}, QubitRates{}, 0.0, -1e-10), DomainError);
}

TEST(StepSme, NormNeverExceedsOne) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> n;
  int projected = 0;
  for (int i = 0; i < 5000; ++i) {
    const auto s = random_state(rng, i % 2 == 0);
    auto r = random_rates(rng, Backaction::literal);
    r.beta_abs *= 50.0;
    StepDiagnostics diag;
    const auto next = step_sme(s, r, 1e-5 * n(rng), 1e-10, diag);
    EXPECT_LE(next.norm(), 1.0 + 1e-9);
    projected += diag.projected;
  }
  EXPECT_GT(projected, 0);
}

TEST(StepSme, TracksOracleStepByStep) {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> n;
  const double dt = 1e-10;
  // Weak-drive rates with eta < 1, so the state stays strictly inside the ball
  // and the radial projection (absent from the oracle) never fires.
  QubitRates r;
  r.gamma_1 = mhz_to_angular(0.05);
  r.gamma_phi = mhz_to_angular(0.1);
  r.omega_ac = mhz_to_angular(0.3);
  r.omega_R = mhz_to_angular(2.0);
  r.kappa = mhz_to_angular(20.0);
  r.eta = 0.5;
  r.beta_abs = 0.08;
  r.gamma_d = r.kappa * r.beta_abs * r.beta_abs / 2.0;
  BlochState s{0.3, -0.2, 0.7};
  DensityMatrix rho = density_from_bloch(s);
  double worst = 0.0;
  for (int k = 0; k < 10000; ++k) {
    const double dW = std::sqrt(dt) * n(rng);
    s = step_sme(s, r, dW, dt);
    ASSERT_LT(s.norm(), 1.0);
    rho = density_matrix_oracle_step(rho, r, dW, dt);
    const auto b = bloch_from_density(rho);
    worst = std::max({worst, std::abs(b.x - s.x), std::abs(b.y - s.y), std::abs(b.z - s.z)});
  }
  EXPECT_LT(worst, 1e-8);
}

TEST(DensityOracle, MaximallyMixedFreeEvolutionFixed) {
  const DensityMatrix rho = 0.5 * DensityMatrix::Identity();
  const auto next = density_matrix_oracle_step(rho, QubitRates{}, 0.0, 1e-10);
  EXPECT_LT((next - rho).norm(), 1e-16);
}

TEST(DensityOracle, TracePreserved) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n;
  auto r = random_rates(rng);
  DensityMatrix rho = density_from_bloch({0.6, 0.0, 0.8});
  double drift = 0.0;
  for (int k = 0; k < 10000; ++k) {
    rho = density_matrix_oracle_step(rho, r, 1e-5 * n(rng), 1e-10);
    drift = std::max(drift, std::abs(rho.trace() - C(1.0, 0.0)));
  }
  EXPECT_LT(drift, 1e-12);
}

TEST(DensityOracle, RejectsNonUnitTrace) {
  const DensityMatrix rho = DensityMatrix::Identity();
  EXPECT_THROW(density_matrix_oracle_step(rho, QubitRates{}, 0.0, 1e-10), DomainError);
}

TEST(HomodyneSample, NoiselessRecordIsGain) {
  const auto s = homodyne_sample({0.0, 0.0, 1.0}, 42.0, 0.0, 1e-10, 3e-9);
  EXPECT_EQ(s.value, 42.0);
  EXPECT_EQ(s.t, 3e-9);
}

TEST(HomodyneSample, PureNoiseHasZeroMean) {
  const double dt = 1e-10;
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n(0.0, std::sqrt(dt));
  const int count = 1000000;
  double sum = 0.0;
  for (int k = 0; k < count; ++k) sum += homodyne_sample({0.0, 0.0, 1.0}, 0.0, n(rng), dt).value;
  const double mean = sum / count;
  const double sigma = 1.0 / std::sqrt(dt * count);
  EXPECT_LT(std::abs(mean), 3.0 * sigma);
}

TEST(HomodyneSample, WhiteNoiseHasUnitTwoSidedDensity) {
  const double dt = 1e-10;
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n(0.0, std::sqrt(dt));
  TimeSeries xi{0.0, dt, {}};
  for (int k = 0; k < 1 << 18; ++k) xi.values.push_back(homodyne_sample({}, 0.0, n(rng), dt).value);
  const auto spec = psd(xi, 1024);
  double mean = 0.0;
  for (std::size_t k = 1; k + 1 < spec.density.size(); ++k) mean += spec.density[k];
  mean /= static_cast<double>(spec.density.size() - 2);
  // One-sided density 2 is the two-sided unit density.
  EXPECT_NEAR(mean / 2.0, 1.0, 0.02);
}

TEST(HomodyneSample, RejectsNonPositiveStep) {
  EXPECT_THROW(homodyne_sample({}, 1.0, 0.0, 0.0), DomainError);
}
