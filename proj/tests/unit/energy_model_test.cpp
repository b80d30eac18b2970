#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "evnav/errors.hpp"
#include "evnav/energy_model.hpp"
#include "evnav/polynomial.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

namespace evnav {
namespace {

using testing::Gen;

std::vector<EnergySample> samples_from_poly(const std::array<double, 6>& c, double v_min, double v_max, int n,
                                            double depth = 3.0) {
  std::vector<EnergySample> s;
  for (int i = 0; i < n; ++i) {
    const double v = v_min + (v_max - v_min) * i / (n - 1);
    const double u = (v - v_min) / (v_max - v_min);
    s.push_back({depth, v, poly_eval(c, u)});
  }
  return s;
}

TEST(MotorVoltage, Examples) {
  MotorParams m;
  EXPECT_EQ(motor_voltage(0.0, 0.0, m), 0.0);
  m.resistance = 0.2;
  m.k_e = 0.01;
  EXPECT_DOUBLE_EQ(motor_voltage(10.0, 1000.0, m), 12.0);
}

TEST(MotorVoltage, Linear) {
  Gen g(1);
  const MotorParams m;
  for (int i = 0; i < 100; ++i) {
    const double cur = g.uniform(0.0, 30.0);
    const double w = g.uniform(0.0, 2e4);
    EXPECT_NEAR(motor_voltage(2 * cur, 2 * w, m), 2 * motor_voltage(cur, w, m), 1e-12);
  }
}

TEST(RotorState, HoverNearSevenThousandRadPerSecond) {
  const DroneDynamics d;
  const RotorState r = rotor_state(d.mass * d.gravity, MotorParams{});
  EXPECT_NEAR(r.omega, 7000.0, 100.0);
  EXPECT_THROW(rotor_state(-1.0, MotorParams{}), DomainError);
}

TEST(RotorState, ElectricalChain) {
  const MotorParams m;
  const RotorState r = rotor_state(6.0, m);
  EXPECT_NEAR(r.omega, std::sqrt(6.0 / (4 * m.k_f)), 1e-9);
  EXPECT_NEAR(r.torque, m.k_m * r.omega * r.omega, 1e-15);
  EXPECT_NEAR(r.current, r.torque / m.k_t + m.i_0, 1e-12);
  EXPECT_NEAR(r.voltage, motor_voltage(r.current, r.omega, m), 1e-12);
  EXPECT_NEAR(electrical_power(6.0, m), 4 * r.voltage * r.current, 1e-9);
}

TEST(RequiredThrust, HoverPlusAccelerationPlusDrag) {
  const DroneDynamics d;
  EXPECT_DOUBLE_EQ(required_thrust(0.0, 0.0, d), d.mass * d.gravity);
  EXPECT_DOUBLE_EQ(required_thrust(-2.0, 3.0, d), d.mass * (d.gravity + 2.0) + d.drag * 3.0);
}

TEST(SpeedProfile, TrapezoidAndTriangle) {
  const SpeedProfile trap = SpeedProfile::plan(10.0, 2.0, 4.0);
  EXPECT_DOUBLE_EQ(trap.v_peak, 2.0);
  EXPECT_DOUBLE_EQ(trap.t_accel, 0.5);
  EXPECT_NEAR(trap.position(trap.duration()), 10.0, 1e-12);
  EXPECT_NEAR(trap.duration(), 0.5 + 4.5 + 0.5, 1e-12);
  EXPECT_NEAR(trap.speed(2.0), 2.0, 1e-12);
  EXPECT_NEAR(trap.acceleration(0.1), 4.0, 1e-12);
  EXPECT_NEAR(trap.acceleration(trap.duration() - 0.1), -4.0, 1e-12);

  const SpeedProfile tri = SpeedProfile::plan(1.0, 8.0, 4.0);
  EXPECT_NEAR(tri.v_peak, 2.0, 1e-12);
  EXPECT_EQ(tri.t_cruise, 0.0);
  EXPECT_NEAR(tri.position(tri.duration()), 1.0, 1e-12);
}

TEST(SimulateFlightEnergy, ZeroDepthIsFree) {
  EXPECT_EQ(simulate_flight_energy(0.0, 2.0, DroneDynamics{}, MotorParams{}), 0.0);
}

TEST(SimulateFlightEnergy, RejectsBadArguments) {
  const DroneDynamics d;
  const MotorParams m;
  EXPECT_THROW(simulate_flight_energy(1.0, 0.0, d, m), DomainError);
  EXPECT_THROW(simulate_flight_energy(1.0, 2.0, d, m, 0.0), DomainError);
  EXPECT_THROW(simulate_flight_energy(-1.0, 2.0, d, m), DomainError);
}

TEST(SimulateFlightEnergy, MatchesHoverPowerTimesDuration) {
  // Cruise at low speed: almost all time is spent near hover thrust.
  const DroneDynamics d;
  const MotorParams m;
  const double e = simulate_flight_energy(2.0, 0.5, d, m, 1e-4);
  const SpeedProfile p = SpeedProfile::plan(2.0, 0.5, d.a_max);
  const double cruise = electrical_power(required_thrust(0.0, 0.5, d), m) * p.t_cruise;
  EXPECT_GT(e, cruise);
  EXPECT_LT(e, cruise * (p.duration() / p.t_cruise) * 1.05);
}

TEST(SimulateFlightEnergy, IncreasesWithDepth) {
  for (double v : {1.0, 2.5, 4.0}) {
    double previous = 0.0;
    for (int d = 2; d <= 9; ++d) {
      const double e = simulate_flight_energy(d, v, DroneDynamics{}, MotorParams{});
      EXPECT_GT(e, previous) << "v " << v << " d " << d;
      previous = e;
    }
  }
}

TEST(SimulateFlightEnergy, InteriorMinimumOverSpeed) {
  std::vector<double> e;
  for (double v = 0.25; v <= 8.0 + 1e-9; v += 0.25) e.push_back(simulate_flight_energy(5.0, v, {}, {}));
  const auto it = std::min_element(e.begin(), e.end());
  EXPECT_NE(it, e.begin());
  EXPECT_NE(it, e.end() - 1);
}

TEST(SimulateFlightEnergy, AlwaysPositive) {
  Gen g(2);
  for (int i = 0; i < 200; ++i) {
    const double d = g.uniform(0.01, 12.0);
    const double v = g.uniform(0.05, 10.0);
    EXPECT_GT(simulate_flight_energy(d, v, {}, {}), 0.0);
  }
}

TEST(GenerateDataset, CardinalityAndRecomputation) {
  EXPECT_EQ(generate_dataset({3.0}, {2.0}, {}, {}).size(), 1u);
  const std::vector<double> depths{2.0, 3.5, 7.0};
  const std::vector<double> speeds{0.5, 1.0, 2.0, 3.0};
  const auto ds = generate_dataset(depths, speeds, {}, {});
  ASSERT_EQ(ds.size(), depths.size() * speeds.size());
  for (const EnergySample& s : ds) EXPECT_EQ(s.energy, simulate_flight_energy(s.depth, s.velocity, {}, {}));
  EXPECT_EQ(ds[1].depth, 2.0);
  EXPECT_EQ(ds[1].velocity, 1.0);
  EXPECT_THROW(generate_dataset({}, speeds, {}, {}), DomainError);
  EXPECT_THROW(generate_dataset(depths, {}, {}, {}), DomainError);
}

TEST(FeasibleGrid, SpansReachableSpeeds) {
  const DroneDynamics d;
  const auto g = feasible_velocity_grid(4.0, d);
  ASSERT_EQ(g.size(), 32u);
  EXPECT_NEAR(g.back(), 4.0, 1e-12);
  EXPECT_NEAR(g.front(), 1.2, 1e-12);
  EXPECT_NEAR(feasible_velocity_grid(25.0, d).back(), 8.0, 1e-12);
}

TEST(FitEnergyPoly, RecoversExactQuintic) {
  const std::array<double, 6> c{100.0, -40.0, 25.0, 10.0, -8.0, 3.0};
  const PolyCoeffs p = fit_energy_poly(samples_from_poly(c, 1.0, 5.0, 20));
  for (int k = 0; k < 6; ++k) EXPECT_NEAR(p.c[k], c[k], 1e-6 * std::abs(c[k])) << "c" << k;
  EXPECT_LT(p.rms_residual, 1e-9);
  EXPECT_EQ(p.v_min, 1.0);
  EXPECT_EQ(p.v_max, 5.0);
}

TEST(FitEnergyPoly, NestedQuadratic) {
  const std::array<double, 6> c{50.0, -20.0, 30.0, 0.0, 0.0, 0.0};
  const PolyCoeffs p = fit_energy_poly(samples_from_poly(c, 0.5, 2.5, 12));
  for (int k = 3; k < 6; ++k) EXPECT_NEAR(p.c[k], 0.0, 1e-6);
}

TEST(FitEnergyPoly, SimulatedCurveFitsWell) {
  const auto samples = generate_feasible_dataset({5.0}, {}, {});
  const PolyCoeffs p = fit_energy_poly(samples);
  double mean = 0.0;
  for (const auto& s : samples) mean += s.energy;
  mean /= samples.size();
  EXPECT_LT(p.rms_residual, 0.02 * mean);
}

TEST(FitEnergyPoly, NeedsSixDistinctSpeeds) {
  std::vector<EnergySample> s;
  for (int rep = 0; rep < 3; ++rep)
    for (int i = 0; i < 5; ++i) s.push_back({2.0, 1.0 + i, 10.0 + i});
  EXPECT_THROW(fit_energy_poly(s), UnderdeterminedError);
  s.push_back({2.0, 9.0, 3.0});
  EXPECT_NO_THROW(fit_energy_poly(s));
  s.push_back({3.0, 10.0, 3.0});
  EXPECT_THROW(fit_energy_poly(s), DomainError);
}

TEST(OptimalVelocity, ParabolaVertex) {
  // E(v) = 5 + (v - 3)^2 on [0, 6], written in u = v / 6.
  PolyCoeffs p;
  p.c = {14.0, -36.0, 36.0, 0.0, 0.0, 0.0};
  p.v_min = 0.0;
  p.v_max = 6.0;
  const OptimalVelocity o = optimal_velocity(p);
  EXPECT_NEAR(o.velocity, 3.0, 1e-9);
  EXPECT_NEAR(o.energy, 5.0, 1e-9);
  EXPECT_FALSE(o.boundary);
}

TEST(OptimalVelocity, IncreasingCurveReturnsLowerEnd) {
  PolyCoeffs p;
  p.c = {1.0, 2.0, 0.0, 0.0, 0.0, 0.0};
  p.v_min = 0.7;
  p.v_max = 3.0;
  const OptimalVelocity o = optimal_velocity(p);
  EXPECT_EQ(o.velocity, 0.7);
  EXPECT_TRUE(o.boundary);
}

TEST(OptimalVelocity, DecreasingCurveReturnsUpperEnd) {
  PolyCoeffs p;
  p.c = {1.0, -2.0, 0.0, 0.0, 0.0, 0.0};
  p.v_min = 0.7;
  p.v_max = 3.0;
  EXPECT_EQ(optimal_velocity(p).velocity, 3.0);
}

TEST(OptimalVelocity, InteriorRootsZeroTheSlope) {
  for (int d = 2; d <= 9; ++d) {
    const PolyCoeffs p = fit_energy_poly(generate_feasible_dataset({double(d)}, {}, {}));
    const OptimalVelocity o = optimal_velocity(p);
    ASSERT_FALSE(o.boundary) << "depth " << d;
    // Normalised by the curve scale so the tolerance is unit free.
    EXPECT_LT(std::abs(p.denergy_du(o.u)) / o.energy, 1e-6) << "depth " << d;
    EXPECT_GT(p.d2energy_du2(o.u), 0.0);
  }
}

TEST(OptimalVelocity, AgreesWithGridSearchAndRisesWithDepth) {
  double previous = 0.0;
  for (int d = 2; d <= 9; ++d) {
    const auto [lo, hi] = testing::feasible_range(d);
    const auto oracle = testing::grid_search_v_opt(d, lo, hi, 1000);
    ASSERT_GT(oracle.index, 0);
    ASSERT_LT(oracle.index, oracle.count - 1);
    const double v = optimal_velocity(fit_energy_poly(generate_feasible_dataset({double(d)}, {}, {}))).velocity;
    EXPECT_LT(std::abs(v - oracle.velocity) / oracle.velocity, 0.05) << "depth " << d;
    EXPECT_GE(oracle.velocity, previous) << "depth " << d;
    previous = oracle.velocity;
  }
}

TEST(PolyCoeffs, DerivativesMatchFiniteDifferences) {
  PolyCoeffs p;
  p.c = {3.0, -1.0, 4.0, -1.5, 0.5, 0.9};
  p.v_min = 1.0;
  p.v_max = 4.0;
  const double h = 1e-6;
  for (double u : {0.1, 0.5, 0.93}) {
    EXPECT_NEAR(p.denergy_du(u), (p.energy_u(u + h) - p.energy_u(u - h)) / (2 * h), 1e-6);
    EXPECT_NEAR(p.d2energy_du2(u), (p.denergy_du(u + h) - p.denergy_du(u - h)) / (2 * h), 1e-6);
  }
  const double v = 2.2;
  EXPECT_NEAR(p.denergy_dv(v), (p.energy(v + h) - p.energy(v - h)) / (2 * h), 1e-6);
}

TEST(PowerThrust, Examples) {
  EXPECT_EQ(power_thrust(0.0, 1.0, 0.2), 0.0);
  EXPECT_DOUBLE_EQ(power_thrust(4.0, 1.0, 0.5), 2.0);
  EXPECT_DOUBLE_EQ(power_thrust(6.0, 2.5, 1.0), 15.0);
  EXPECT_DOUBLE_EQ(power_thrust(12.0, 2.5, 1.0), 2.0 * power_thrust(6.0, 2.5, 1.0));
  EXPECT_THROW(power_thrust(-1.0, 1.0, 0.2), DomainError);
  EXPECT_THROW(power_thrust(1.0, 0.0, 0.2), DomainError);
}

TEST(Params, ValidateRejectsNonPositive) {
  MotorParams m;
  m.k_f = 0.0;
  EXPECT_THROW(m.validate(), DomainError);
  DroneDynamics d;
  d.mass = -1.0;
  EXPECT_THROW(d.validate(), DomainError);
  d = DroneDynamics{};
  d.a_max = 0.0;
  EXPECT_THROW(d.validate(), DomainError);
}

}  // namespace
}  // namespace evnav
