#pragma once

#include <map>
#include <memory>

#include "evnav/energy_model.hpp"
#include "evnav/pgnn.hpp"

namespace evnav {

/// Cruise speed to fly a given remaining depth.
class VelocityModel {
 public:
  virtual ~VelocityModel() = default;
  virtual double velocity(double depth) const = 0;

  /// d / v(d); 0 for d <= 0.
  double flight_time(double depth) const;
};

class PgnnVelocity : public VelocityModel {
 public:
  explicit PgnnVelocity(MlpModel model);
  double velocity(double depth) const override;
  const MlpModel& model() const noexcept { return model_; }

 private:
  MlpModel model_;
};

/// v_opt of a fresh degree-5 fit to the simulated energy curve at the queried
/// depth. Fits are cached per depth (rounded to the millimetre).
class AnalyticVelocity : public VelocityModel {
 public:
  AnalyticVelocity(DroneDynamics dynamics, MotorParams motors, int grid_points = 32, double dt = 1e-3);
  double velocity(double depth) const override;

 private:
  DroneDynamics dynamics_;
  MotorParams motors_;
  int grid_points_;
  double dt_;
  mutable std::map<long, double> cache_;
};

}  // namespace evnav
