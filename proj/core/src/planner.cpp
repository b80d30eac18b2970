#include "evnav/planner.hpp"

#include <algorithm>
#include <cmath>

#include "evnav/errors.hpp"

namespace evnav {

double gate_velocity(const GateObservation& obs) {
  if (!(obs.dt > 0.0)) throw DomainError("gate_velocity: dt must be positive");
  return (obs.y2 - obs.y1) / obs.dt;
}

GatePrediction predict_gate_position(double y2, double v_r, double t_traj, double bound) {
  if (!(bound >= 0.0)) throw DomainError("predict_gate_position: bound must be non-negative");
  if (std::abs(y2) > bound) throw DomainError("predict_gate_position: gate position outside the bound");
  if (t_traj < 0.0) throw DomainError("predict_gate_position: t_traj must be non-negative");
  GatePrediction out;
  out.v_r = v_r;
  const double d1 = v_r * t_traj;
  const double d2 = v_r > 0.0 ? bound - y2 : y2 + bound;
  if (std::abs(d1) > std::abs(d2)) {
    const double x = std::abs(d1) - std::abs(d2);
    out.y_star = v_r > 0.0 ? bound - x : -bound + x;
    out.bounced = true;
  } else {
    out.y_star = y2 + d1;
  }
  out.y_star = std::clamp(out.y_star, -bound, bound);
  return out;
}

double reflect_oracle(double y2, double v_r, double t, double bound, double dt) {
  if (!(dt > 0.0)) throw DomainError("reflect_oracle: dt must be positive");
  double y = y2;
  double v = v_r;
  double elapsed = 0.0;
  while (elapsed < t) {
    const double h = std::min(dt, t - elapsed);
    y += v * h;
    // A step may cross a boundary more than once when |v| h > 2L.
    while (y > bound || y < -bound) {
      y = y > bound ? 2.0 * bound - y : -2.0 * bound - y;
      v = -v;
    }
    elapsed += h;
  }
  return y;
}

Trajectory Trajectory::between(const BoundaryState& start, const BoundaryState& end, double duration) {
  if (!(duration > 0.0)) throw DomainError("trajectory: duration must be positive");
  Trajectory tr;
  tr.start_ = start;
  tr.end_ = end;
  tr.duration_ = duration;
  const double t = duration;
  const double t2 = t * t;
  const Vec3 delta = end.position - start.position;
  const Vec3& v0 = start.velocity;
  const Vec3& v1 = end.velocity;
  const Vec3& a0 = start.acceleration;
  const Vec3& a1 = end.acceleration;
  tr.coeffs_[0] = start.position;
  tr.coeffs_[1] = v0;
  tr.coeffs_[2] = 0.5 * a0;
  tr.coeffs_[3] = (20.0 * delta - (8.0 * v1 + 12.0 * v0) * t - (3.0 * a0 - a1) * t2) / (2.0 * t2 * t);
  tr.coeffs_[4] = (-30.0 * delta + (14.0 * v1 + 16.0 * v0) * t + (3.0 * a0 - 2.0 * a1) * t2) / (2.0 * t2 * t2);
  tr.coeffs_[5] = (12.0 * delta - 6.0 * (v1 + v0) * t - (a0 - a1) * t2) / (2.0 * t2 * t2 * t);
  return tr;
}

TrajectorySample Trajectory::sample(double t) const {
  if (!(t >= 0.0 && t <= duration_)) throw DomainError("trajectory: sample time outside [0, T]");
  const auto& a = coeffs_;
  TrajectorySample s;
  s.position = a[0] + t * (a[1] + t * (a[2] + t * (a[3] + t * (a[4] + t * a[5]))));
  s.velocity = a[1] + t * (2.0 * a[2] + t * (3.0 * a[3] + t * (4.0 * a[4] + t * 5.0 * a[5])));
  s.acceleration = 2.0 * a[2] + t * (6.0 * a[3] + t * (12.0 * a[4] + t * 20.0 * a[5]));
  s.jerk = 6.0 * a[3] + t * (24.0 * a[4] + t * 60.0 * a[5]);
  return s;
}

Trajectory min_jerk_trajectory(const Vec3& start, const Vec3& end, double duration) {
  BoundaryState a;
  a.position = start;
  BoundaryState b;
  b.position = end;
  return Trajectory::between(a, b, duration);
}

TrajectorySample sample_trajectory(const Trajectory& traj, double t) { return traj.sample(t); }

}  // namespace evnav
