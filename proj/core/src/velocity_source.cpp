#include "evnav/velocity_source.hpp"

#include <algorithm>
#include <cmath>

#include "evnav/errors.hpp"

namespace evnav {

double VelocityModel::flight_time(double depth) const {
  if (depth <= 0.0) return 0.0;
  return depth / velocity(depth);
}

PgnnVelocity::PgnnVelocity(MlpModel model) : model_(std::move(model)) { model_.validate(); }

double PgnnVelocity::velocity(double depth) const { return forward(model_, depth); }

AnalyticVelocity::AnalyticVelocity(DroneDynamics dynamics, MotorParams motors, int grid_points, double dt)
    : dynamics_(dynamics), motors_(motors), grid_points_(grid_points), dt_(dt) {
  dynamics_.validate();
  motors_.validate();
  if (grid_points_ < 6) throw DomainError("analytic velocity: need at least 6 grid points");
}

double AnalyticVelocity::velocity(double depth) const {
  if (!(depth > 0.0)) throw DomainError("analytic velocity: depth must be positive");
  const long key = std::lround(depth * 1000.0);
  if (const auto it = cache_.find(key); it != cache_.end()) return it->second;
  const double d = std::max(1, static_cast<int>(key)) / 1000.0;
  const auto samples = generate_feasible_dataset({d}, dynamics_, motors_, grid_points_, dt_);
  const double v = optimal_velocity(fit_energy_poly(samples)).velocity;
  cache_.emplace(key, v);
  return v;
}

}  // namespace evnav
