#pragma once

#include <compare>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Core>

#include "evnav/grid.hpp"

namespace evnav {

/// World frame used throughout: x points forward (towards the gate plane),
/// y is lateral (the gate's oscillation axis), z is up.
using Vec3 = Eigen::Vector3d;

/// One asynchronous brightness change. Timestamps are microseconds.
struct Event {
  std::int64_t t = 0;
  int x = 0;
  int y = 0;
  int polarity = 1;

  friend bool operator==(const Event&, const Event&) = default;
};

/// Stream order: time, then row, column, polarity.
inline bool event_before(const Event& a, const Event& b) {
  if (a.t != b.t) return a.t < b.t;
  if (a.y != b.y) return a.y < b.y;
  if (a.x != b.x) return a.x < b.x;
  return a.polarity < b.polarity;
}

struct CameraParams {
  int width = 240;
  int height = 180;
  double focal_length = 120.0;       // pixels
  double contrast_threshold = 0.3;   // log-intensity units
  double intensity_floor = 0.05;     // keeps log() finite on the dark background
  double noise_rate = 0.0;           // per pixel, per generate_events call
  std::uint64_t noise_seed = 0;

  /// Throws DomainError on a non-positive size, focal length, threshold or floor.
  void validate() const;
};

/// A point expressed in the camera frame.
struct CameraPoint {
  double lateral = 0.0;   // to the right of the optical axis
  double vertical = 0.0;  // above the optical axis
  double depth = 0.0;     // along the optical axis
};

struct PixelCoord {
  double u = 0.0;
  double v = 0.0;
};

/// Pinhole projection. Throws DomainError when depth <= 0.
PixelCoord project(const CameraPoint& point, const CameraParams& camera);

/// Orthonormal camera basis in world coordinates. Image rows follow `right`,
/// image columns grow downwards (opposite `up`).
struct CameraPose {
  Vec3 position = Vec3::Zero();
  Vec3 right = Vec3::UnitY();
  Vec3 up = Vec3::UnitZ();
  Vec3 forward = Vec3::UnitX();

  /// Optical axis through `target`, image horizon kept level with the world y axis.
  static CameraPose looking_at(const Vec3& eye, const Vec3& target);

  CameraPoint to_camera(const Vec3& world) const;

  /// Unnormalised world direction of the ray through continuous image coordinate (u, v).
  Vec3 ray_direction(double u, double v, const CameraParams& camera) const;
};

/// A circular racing gate (ring) whose plane is perpendicular to the x axis.
/// The ring occupies radii in [aperture, aperture + frame_thickness] from its
/// center. The center bounces laterally between -oscillation_bound and
/// +oscillation_bound at constant speed.
struct SceneGate {
  double depth = 4.0;               // x-coordinate of the gate plane
  double center_y = 0.0;            // lateral position at t = 0
  double center_z = 0.0;
  double aperture = 0.6;
  double frame_thickness = 0.15;
  double oscillation_bound = 1.0;   // L
  double lateral_speed = 4.0;       // sign gives the initial direction

  void validate() const;

  /// Triangle-wave position y(t); |y(t)| <= L for every t.
  double lateral_position(double time) const;
  double lateral_velocity(double time) const;
  Vec3 center(double time) const;
};

/// Fraction of each pixel covered by the gate frame, area-sampled.
Grid<double> render_coverage(const SceneGate& gate, const CameraParams& camera, const CameraPose& pose,
                             double time);

/// log(coverage + floor) per pixel.
Grid<double> log_intensity_from_coverage(Grid<double> coverage, const CameraParams& camera);

/// Log intensity of each pixel: log(coverage + floor). Fully covered pixels hold
/// log(1 + floor); background pixels hold log(floor).
Grid<double> render_log_intensity(const SceneGate& gate, const CameraParams& camera, const CameraPose& pose,
                                  double time);

/// Camera at the world origin looking down +x.
Grid<double> render_log_intensity(const SceneGate& gate, const CameraParams& camera, double time);

/// Contrast-threshold event generator. Holds the per-pixel reference log
/// intensity (the level at each pixel's last event).
class CameraModel {
 public:
  explicit CameraModel(CameraParams params);

  const CameraParams& params() const noexcept { return params_; }
  const Grid<double>& reference() const noexcept { return reference_; }

  void reset_reference(Grid<double> log_intensity);

  /// Emits floor(|new - reference| / C) events per pixel with timestamps spread
  /// evenly over (t0, t1], advances the reference by whole multiples of C and
  /// keeps the sub-threshold residual. Output is sorted with event_before.
  std::vector<Event> generate_events(const Grid<double>& new_log_intensity, std::int64_t t0_us,
                                     std::int64_t t1_us);

 private:
  CameraParams params_;
  Grid<double> reference_;
  std::mt19937_64 rng_;
};

}  // namespace evnav
