#include "evnav/energy_model.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <Eigen/Dense>

#include "evnav/errors.hpp"
#include "evnav/polynomial.hpp"

namespace evnav {

void MotorParams::validate() const {
  if (!(resistance > 0.0 && k_e > 0.0 && k_t > 0.0 && k_f > 0.0 && k_m > 0.0 && i_0 > 0.0))
    throw DomainError("motor parameters must all be positive");
}

void DroneDynamics::validate() const {
  if (!(mass > 0.0)) throw DomainError("dynamics: mass must be positive");
  if (!(a_max > 0.0)) throw DomainError("dynamics: a_max must be positive");
  if (gravity < 0.0 || drag < 0.0) throw DomainError("dynamics: gravity and drag must be non-negative");
  if (motor_count < 1) throw DomainError("dynamics: motor count must be positive");
}

double motor_voltage(double current, double omega, const MotorParams& motors) {
  return motors.resistance * current + motors.k_e * omega;
}

RotorState rotor_state(double total_thrust, const MotorParams& motors, int motor_count) {
  if (total_thrust < 0.0) throw DomainError("rotor_state: thrust must be non-negative");
  RotorState s;
  s.omega = std::sqrt(total_thrust / (motor_count * motors.k_f));
  s.torque = motors.k_m * s.omega * s.omega;
  s.current = s.torque / motors.k_t + motors.i_0;
  s.voltage = motor_voltage(s.current, s.omega, motors);
  return s;
}

double electrical_power(double total_thrust, const MotorParams& motors, int motor_count) {
  const RotorState s = rotor_state(total_thrust, motors, motor_count);
  return motor_count * s.voltage * s.current;
}

double required_thrust(double acceleration, double speed, const DroneDynamics& dynamics) {
  return dynamics.mass * (dynamics.gravity + std::abs(acceleration)) + dynamics.drag * std::abs(speed);
}

SpeedProfile SpeedProfile::plan(double distance, double v_cruise, double a_max) {
  if (distance < 0.0) throw DomainError("speed profile: distance must be non-negative");
  if (!(v_cruise > 0.0)) throw DomainError("speed profile: cruise speed must be positive");
  if (!(a_max > 0.0)) throw DomainError("speed profile: a_max must be positive");
  SpeedProfile p;
  p.distance = distance;
  p.a_max = a_max;
  p.v_peak = std::min(v_cruise, std::sqrt(a_max * distance));
  if (p.v_peak <= 0.0) return p;
  p.t_accel = p.v_peak / a_max;
  const double ramp = p.v_peak * p.v_peak / a_max;  // distance spent on both ramps
  p.t_cruise = std::max(0.0, (distance - ramp) / p.v_peak);
  return p;
}

double SpeedProfile::speed(double t) const {
  if (t <= 0.0 || t >= duration()) return 0.0;
  if (t < t_accel) return a_max * t;
  if (t < t_accel + t_cruise) return v_peak;
  return std::max(0.0, v_peak - a_max * (t - t_accel - t_cruise));
}

double SpeedProfile::acceleration(double t) const {
  if (t < 0.0 || t >= duration()) return 0.0;
  if (t < t_accel) return a_max;
  if (t < t_accel + t_cruise) return 0.0;
  return -a_max;
}

double SpeedProfile::position(double t) const {
  if (t <= 0.0) return 0.0;
  if (t >= duration()) return distance;
  if (t < t_accel) return 0.5 * a_max * t * t;
  const double ramp = 0.5 * a_max * t_accel * t_accel;
  if (t < t_accel + t_cruise) return ramp + v_peak * (t - t_accel);
  const double s = t - t_accel - t_cruise;
  return ramp + v_peak * t_cruise + v_peak * s - 0.5 * a_max * s * s;
}

double simulate_flight_energy(double depth, double v_cruise, const DroneDynamics& dynamics,
                              const MotorParams& motors, double dt) {
  if (!(dt > 0.0)) throw DomainError("simulate_flight_energy: dt must be positive");
  if (!(v_cruise > 0.0)) throw DomainError("simulate_flight_energy: cruise speed must be positive");
  if (depth < 0.0) throw DomainError("simulate_flight_energy: depth must be non-negative");
  dynamics.validate();
  motors.validate();
  if (depth == 0.0) return 0.0;

  const SpeedProfile profile = SpeedProfile::plan(depth, v_cruise, dynamics.a_max);
  const double total = profile.duration();
  double energy = 0.0;
  for (long k = 0;; ++k) {
    const double t0 = static_cast<double>(k) * dt;
    if (t0 >= total) break;
    const double h = std::min(dt, total - t0);
    const double t = t0 + 0.5 * h;
    const double thrust = required_thrust(profile.acceleration(t), profile.speed(t), dynamics);
    energy += electrical_power(thrust, motors, dynamics.motor_count) * h;
  }
  return energy;
}

std::vector<EnergySample> generate_dataset(const std::vector<double>& depths, const std::vector<double>& velocities,
                                           const DroneDynamics& dynamics, const MotorParams& motors, double dt) {
  if (depths.empty() || velocities.empty()) throw DomainError("generate_dataset: grids must be non-empty");
  std::vector<EnergySample> samples;
  samples.reserve(depths.size() * velocities.size());
  for (double d : depths) {
    for (double v : velocities) samples.push_back({d, v, simulate_flight_energy(d, v, dynamics, motors, dt)});
  }
  return samples;
}

std::vector<double> feasible_velocity_grid(double depth, const DroneDynamics& dynamics, int count,
                                           double low_fraction, double v_cap) {
  if (!(depth > 0.0)) throw DomainError("feasible_velocity_grid: depth must be positive");
  if (count < 2) throw DomainError("feasible_velocity_grid: need at least two points");
  if (!(low_fraction > 0.0 && low_fraction < 1.0))
    throw DomainError("feasible_velocity_grid: low fraction must lie in (0, 1)");
  const double reach = std::min(v_cap, std::sqrt(dynamics.a_max * depth));
  const double lo = low_fraction * reach;
  std::vector<double> grid(count);
  for (int k = 0; k < count; ++k) grid[k] = lo + (reach - lo) * k / (count - 1);
  return grid;
}

std::vector<EnergySample> generate_feasible_dataset(const std::vector<double>& depths, const DroneDynamics& dynamics,
                                                    const MotorParams& motors, int count, double dt) {
  if (depths.empty()) throw DomainError("generate_feasible_dataset: no depths");
  std::vector<EnergySample> samples;
  for (double d : depths) {
    const auto part = generate_dataset({d}, feasible_velocity_grid(d, dynamics, count), dynamics, motors, dt);
    samples.insert(samples.end(), part.begin(), part.end());
  }
  return samples;
}

double PolyCoeffs::energy_u(double u) const { return poly_eval(c, u); }

double PolyCoeffs::denergy_du(double u) const {
  return c[1] + u * (2.0 * c[2] + u * (3.0 * c[3] + u * (4.0 * c[4] + u * 5.0 * c[5])));
}

double PolyCoeffs::d2energy_du2(double u) const {
  return 2.0 * c[2] + u * (6.0 * c[3] + u * (12.0 * c[4] + u * 20.0 * c[5]));
}

PolyCoeffs fit_energy_poly(const std::vector<EnergySample>& samples) {
  std::set<double> distinct;
  for (const EnergySample& s : samples) distinct.insert(s.velocity);
  if (distinct.size() < 6) throw UnderdeterminedError("fit_energy_poly: need at least 6 distinct velocities");
  for (const EnergySample& s : samples) {
    if (s.depth != samples.front().depth) throw DomainError("fit_energy_poly: samples span several depths");
  }

  PolyCoeffs poly;
  poly.depth = samples.front().depth;
  poly.v_min = *distinct.begin();
  poly.v_max = *distinct.rbegin();

  const auto n = static_cast<Eigen::Index>(samples.size());
  Eigen::MatrixXd a(n, 6);
  Eigen::VectorXd b(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const double u = poly.to_u(samples[r].velocity);
    double power = 1.0;
    for (int k = 0; k < 6; ++k) {
      a(r, k) = power;
      power *= u;
    }
    b(r) = samples[r].energy;
  }
  const Eigen::VectorXd x = a.colPivHouseholderQr().solve(b);
  for (int k = 0; k < 6; ++k) poly.c[k] = x(k);
  poly.rms_residual = std::sqrt((a * x - b).squaredNorm() / static_cast<double>(n));
  return poly;
}

OptimalVelocity optimal_velocity(const PolyCoeffs& poly) {
  const std::vector<double> slope = poly_derivative(poly.c);
  std::vector<double> candidates = real_roots_in(slope, 0.0, 1.0, 1e-13);
  OptimalVelocity best;
  best.u = 0.0;
  best.energy = poly.energy_u(0.0);
  best.boundary = true;
  const double e1 = poly.energy_u(1.0);
  if (e1 < best.energy) {
    best.u = 1.0;
    best.energy = e1;
  }
  for (double u : candidates) {
    if (u <= 0.0 || u >= 1.0) continue;
    const double e = poly.energy_u(u);
    if (e < best.energy) {
      best = {0.0, u, e, false};
    }
  }
  best.velocity = poly.to_v(best.u);
  return best;
}

double power_thrust(double thrust, double kappa, double alpha) {
  if (thrust < 0.0) throw DomainError("power_thrust: thrust must be non-negative");
  if (!(kappa > 0.0)) throw DomainError("power_thrust: kappa must be positive");
  if (thrust == 0.0) return 0.0;
  return kappa * std::pow(thrust, alpha);
}

}  // namespace evnav
