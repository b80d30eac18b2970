#pragma once

#include <array>
#include <vector>

namespace evnav {

/// Brushless motor constants shared by the four rotors.
struct MotorParams {
  double resistance = 0.2;        // R, ohm
  double k_e = 0.01;              // voltage constant, V s/rad
  double k_t = 0.01;              // torque constant, N m/A
  double k_f = 2.5e-8;            // thrust per rotor = k_f w^2; hover near 7000 rad/s
  double k_m = 1.5e-9;            // drag torque = k_m w^2
  double i_0 = 0.3;               // no-load current, A

  void validate() const;
};

struct DroneDynamics {
  double mass = 0.5;
  double gravity = 9.81;
  double drag = 0.1;              // linear drag, N s/m
  double a_max = 4.0;
  int motor_count = 4;

  void validate() const;
};

/// e = R i + K_E w
double motor_voltage(double current, double omega, const MotorParams& motors);

/// Electrical operating point of one rotor when the airframe needs `total_thrust`.
struct RotorState {
  double omega = 0.0;
  double torque = 0.0;
  double current = 0.0;
  double voltage = 0.0;
};

/// Splits the thrust evenly across the rotors: w = sqrt(F / (4 k_f)),
/// tau = k_m w^2, i = tau / K_T + i_0. Throws DomainError for negative thrust.
RotorState rotor_state(double total_thrust, const MotorParams& motors, int motor_count = 4);

/// Total electrical power 4 e i drawn at `total_thrust`.
double electrical_power(double total_thrust, const MotorParams& motors, int motor_count = 4);

/// Thrust budget for a straight flight: m (g + |a|) + drag |v|.
double required_thrust(double acceleration, double speed, const DroneDynamics& dynamics);

/// Rest-to-rest trapezoidal speed profile along a straight line: accelerate at
/// a_max, cruise, decelerate at a_max. Triangular when the distance is too
/// short to reach the requested cruise speed.
struct SpeedProfile {
  double distance = 0.0;
  double a_max = 1.0;
  double v_peak = 0.0;
  double t_accel = 0.0;
  double t_cruise = 0.0;

  static SpeedProfile plan(double distance, double v_cruise, double a_max);

  double duration() const { return 2.0 * t_accel + t_cruise; }
  double speed(double t) const;
  double acceleration(double t) const;   // signed
  double position(double t) const;       // distance covered by time t
};

/// Energy of a straight flight of length d at cruise speed v, integrated with
/// midpoint samples of width dt (the last sample is shortened to end exactly
/// at the profile duration). d = 0 gives 0. Throws DomainError when d < 0,
/// v <= 0 or dt <= 0.
double simulate_flight_energy(double depth, double v_cruise, const DroneDynamics& dynamics,
                              const MotorParams& motors, double dt = 1e-3);

struct EnergySample {
  double depth = 0.0;
  double velocity = 0.0;
  double energy = 0.0;
};

/// One sample per (depth, velocity), depth-major. Throws DomainError on an empty grid.
std::vector<EnergySample> generate_dataset(const std::vector<double>& depths, const std::vector<double>& velocities,
                                           const DroneDynamics& dynamics, const MotorParams& motors,
                                           double dt = 1e-3);

/// Cruise speeds worth sampling at one depth: `count` points spaced evenly over
/// [low_fraction * v_reach, v_reach], v_reach = min(v_cap, sqrt(a_max * d)), the
/// fastest cruise the trapezoid can actually attain.
std::vector<double> feasible_velocity_grid(double depth, const DroneDynamics& dynamics, int count = 32,
                                           double low_fraction = 0.3, double v_cap = 8.0);

/// Per-depth samples over feasible_velocity_grid.
std::vector<EnergySample> generate_feasible_dataset(const std::vector<double>& depths, const DroneDynamics& dynamics,
                                                    const MotorParams& motors, int count = 32, double dt = 1e-3);

/// E(u) = sum c_k u^k with u = (v - v_min) / (v_max - v_min).
struct PolyCoeffs {
  std::array<double, 6> c{};
  double depth = 0.0;
  double v_min = 0.0;
  double v_max = 1.0;
  double rms_residual = 0.0;  // joules

  double to_u(double v) const { return (v - v_min) / (v_max - v_min); }
  double to_v(double u) const { return v_min + u * (v_max - v_min); }
  double energy_u(double u) const;
  double denergy_du(double u) const;
  double d2energy_du2(double u) const;
  double energy(double v) const { return energy_u(to_u(v)); }
  double denergy_dv(double v) const { return denergy_du(to_u(v)) / (v_max - v_min); }
};

/// Least-squares degree-5 fit over the samples of one depth. Throws
/// UnderdeterminedError with fewer than 6 distinct velocities and DomainError
/// when the samples mix depths.
PolyCoeffs fit_energy_poly(const std::vector<EnergySample>& samples);

struct OptimalVelocity {
  double velocity = 0.0;
  double u = 0.0;
  double energy = 0.0;
  bool boundary = false;
};

/// Global minimiser of the fitted curve over [v_min, v_max]: compares the real
/// roots of dE/du in [0, 1] with both endpoints.
OptimalVelocity optimal_velocity(const PolyCoeffs& poly);

/// P = kappa F^alpha. Throws DomainError for F < 0 or kappa <= 0.
double power_thrust(double thrust, double kappa, double alpha);

}  // namespace evnav
