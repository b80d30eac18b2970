#pragma once

#include <array>

#include "evnav/event_camera.hpp"

namespace evnav {

/// Two gate positions tracked dt seconds apart.
struct GateObservation {
  double y1 = 0.0;
  double y2 = 0.0;
  double dt = 0.0;
};

/// (y2 - y1) / dt. Throws DomainError when dt <= 0.
double gate_velocity(const GateObservation& obs);

struct GatePrediction {
  double v_r = 0.0;
  double y_star = 0.0;
  bool bounced = false;
};

/// Gate position after t_traj seconds with at most one reversal at +-L:
/// d1 = v_r t, d2 = distance to the boundary ahead; past the boundary the
/// remainder is reflected back. A zero velocity takes the leftward arm.
/// The result is clamped to [-L, L]. Throws DomainError when |y2| > L or t_traj < 0.
GatePrediction predict_gate_position(double y2, double v_r, double t_traj, double bound);

/// Brute-force reference: steps y by v dt and reflects off +-L at every
/// crossing, so any number of reversals is handled. Throws DomainError when dt <= 0.
double reflect_oracle(double y2, double v_r, double t, double bound, double dt);

/// Position, velocity and acceleration at one end of a trajectory.
struct BoundaryState {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  Vec3 acceleration = Vec3::Zero();
};

struct TrajectorySample {
  Vec3 position;
  Vec3 velocity;
  Vec3 acceleration;
  Vec3 jerk;
};

/// Per-axis quintic p(t) = sum a_k t^k on [0, T].
class Trajectory {
 public:
  /// Quintic matching position, velocity and acceleration at both ends.
  /// Throws DomainError when duration <= 0.
  static Trajectory between(const BoundaryState& start, const BoundaryState& end, double duration);

  const BoundaryState& start() const noexcept { return start_; }
  const BoundaryState& end() const noexcept { return end_; }
  double duration() const noexcept { return duration_; }
  const std::array<Vec3, 6>& coefficients() const noexcept { return coeffs_; }

  /// Throws DomainError for t outside [0, T].
  TrajectorySample sample(double t) const;

 private:
  BoundaryState start_;
  BoundaryState end_;
  double duration_ = 0.0;
  std::array<Vec3, 6> coeffs_{};
};

/// Rest-to-rest minimum-jerk path: start + (end - start)(10 s^3 - 15 s^4 + 6 s^5), s = t / T.
Trajectory min_jerk_trajectory(const Vec3& start, const Vec3& end, double duration);

TrajectorySample sample_trajectory(const Trajectory& traj, double t);

}  // namespace evnav
