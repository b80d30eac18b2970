#include "evnav/event_camera.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include <Eigen/Geometry>

#include "evnav/errors.hpp"

namespace evnav {
namespace {

constexpr int kSupersample = 8;

struct PlaneHit {
  bool valid = false;
  double y = 0.0;
  double z = 0.0;
};

class GatePlaneCaster {
 public:
  GatePlaneCaster(const SceneGate& gate, const CameraParams& camera, const CameraPose& pose, double time)
      : origin_(pose.position), plane_x_(gate.depth) {
    // ray(u, v) = base + u * du + v * dv, see CameraPose::ray_direction.
    du_ = pose.right / camera.focal_length;
    dv_ = -pose.up / camera.focal_length;
    base_ = pose.forward - (camera.width / 2.0) * du_ - (camera.height / 2.0) * dv_;
    const Vec3 c = gate.center(time);
    center_y_ = c.y();
    center_z_ = c.z();
    inner_ = gate.aperture;
    outer_ = gate.aperture + gate.frame_thickness;
    inner_sq_ = inner_ * inner_;
    outer_sq_ = outer_ * outer_;
  }

  PlaneHit cast(double u, double v) const {
    const double dx = base_.x() + u * du_.x() + v * dv_.x();
    if (dx <= 1e-12) return {};
    const double s = (plane_x_ - origin_.x()) / dx;
    if (s <= 0.0) return {};
    return {true, origin_.y() + s * (base_.y() + u * du_.y() + v * dv_.y()),
            origin_.z() + s * (base_.z() + u * du_.z() + v * dv_.z())};
  }

  double radius(const PlaneHit& hit) const { return std::sqrt(radius_sq(hit)); }

  double radius_sq(const PlaneHit& hit) const {
    const double a = hit.y - center_y_;
    const double b = hit.z - center_z_;
    return a * a + b * b;
  }

  bool on_frame(const PlaneHit& hit) const {
    if (!hit.valid) return false;
    const double r2 = radius_sq(hit);
    return r2 >= inner_sq_ && r2 <= outer_sq_;
  }

  double inner() const { return inner_; }
  double outer() const { return outer_; }

 private:
  Vec3 origin_;
  Vec3 base_;
  Vec3 du_;
  Vec3 dv_;
  double plane_x_;
  double center_y_ = 0.0;
  double center_z_ = 0.0;
  double inner_ = 0.0;
  double outer_ = 0.0;
  double inner_sq_ = 0.0;
  double outer_sq_ = 0.0;
};

}  // namespace

void CameraParams::validate() const {
  if (width <= 0 || height <= 0) throw DomainError("camera: sensor dimensions must be positive");
  if (!(focal_length > 0.0)) throw DomainError("camera: focal length must be positive");
  if (!(contrast_threshold > 0.0)) throw DomainError("camera: contrast threshold must be positive");
  if (!(intensity_floor > 0.0)) throw DomainError("camera: intensity floor must be positive");
  if (noise_rate < 0.0 || noise_rate > 1.0) throw DomainError("camera: noise rate must lie in [0, 1]");
}

PixelCoord project(const CameraPoint& point, const CameraParams& camera) {
  if (!(point.depth > 0.0)) throw DomainError("project: point depth must be positive");
  return {camera.width / 2.0 + camera.focal_length * (point.lateral / point.depth),
          camera.height / 2.0 - camera.focal_length * (point.vertical / point.depth)};
}

CameraPose CameraPose::looking_at(const Vec3& eye, const Vec3& target) {
  CameraPose pose;
  pose.position = eye;
  const Vec3 axis = target - eye;
  if (axis.norm() < 1e-12) return pose;
  pose.forward = axis.normalized();
  Vec3 right = Vec3::UnitZ().cross(pose.forward);
  // Degenerate when looking straight up or down; fall back to the world y axis.
  if (right.norm() < 1e-9) right = Vec3::UnitY();
  // Image right maps to +y when looking down +x, matching the default pose.
  pose.right = right.normalized();
  pose.up = pose.forward.cross(pose.right).normalized();
  return pose;
}

CameraPoint CameraPose::to_camera(const Vec3& world) const {
  const Vec3 rel = world - position;
  return {rel.dot(right), rel.dot(up), rel.dot(forward)};
}

Vec3 CameraPose::ray_direction(double u, double v, const CameraParams& camera) const {
  return forward + ((u - camera.width / 2.0) / camera.focal_length) * right +
         ((camera.height / 2.0 - v) / camera.focal_length) * up;
}

void SceneGate::validate() const {
  if (!(depth > 0.0)) throw DomainError("gate: depth must be positive");
  if (!(aperture > 0.0)) throw DomainError("gate: aperture must be positive");
  if (!(frame_thickness > 0.0)) throw DomainError("gate: frame thickness must be positive");
  if (oscillation_bound < 0.0) throw DomainError("gate: oscillation bound must be non-negative");
  if (std::abs(center_y) > oscillation_bound + 1e-12)
    throw DomainError("gate: initial lateral position exceeds the oscillation bound");
}

double SceneGate::lateral_position(double time) const {
  const double bound = oscillation_bound;
  if (bound <= 0.0) return 0.0;
  const double period = 4.0 * bound;
  double w = std::fmod(center_y + lateral_speed * time + bound, period);
  if (w < 0.0) w += period;
  const double y = w <= 2.0 * bound ? w - bound : 3.0 * bound - w;
  return std::clamp(y, -bound, bound);
}

double SceneGate::lateral_velocity(double time) const {
  const double bound = oscillation_bound;
  if (bound <= 0.0) return 0.0;
  const double period = 4.0 * bound;
  double w = std::fmod(center_y + lateral_speed * time + bound, period);
  if (w < 0.0) w += period;
  return w <= 2.0 * bound ? lateral_speed : -lateral_speed;
}

Vec3 SceneGate::center(double time) const { return {depth, lateral_position(time), center_z}; }

namespace {

struct PixelWindow {
  int i0 = 0;
  int j0 = 0;
  int i1 = 0;  // exclusive
  int j1 = 0;
};

// Pixels that can touch the ring. A polygon circumscribing the outer circle
// projects to a polygon containing the projected circle, so its bounding box
// is conservative. Falls back to the full sensor when the ring reaches behind
// the image plane.
PixelWindow ring_window(const SceneGate& gate, const CameraParams& camera, const CameraPose& pose, double time) {
  constexpr int kSides = 32;
  const PixelWindow full{0, 0, camera.width, camera.height};
  const double pi = std::acos(-1.0);
  const double r = (gate.aperture + gate.frame_thickness) / std::cos(pi / kSides);
  const Vec3 c = gate.center(time);
  double u_lo = std::numeric_limits<double>::infinity();
  double u_hi = -u_lo;
  double v_lo = u_lo;
  double v_hi = -u_lo;
  for (int k = 0; k < kSides; ++k) {
    const double a = 2.0 * pi * k / kSides;
    const CameraPoint p = pose.to_camera({c.x(), c.y() + r * std::cos(a), c.z() + r * std::sin(a)});
    if (p.depth < 1e-3) return full;
    const PixelCoord px = project(p, camera);
    u_lo = std::min(u_lo, px.u);
    u_hi = std::max(u_hi, px.u);
    v_lo = std::min(v_lo, px.v);
    v_hi = std::max(v_hi, px.v);
  }
  const auto clip = [](double value, int hi) {
    return static_cast<int>(std::clamp(value, 0.0, static_cast<double>(hi)));
  };
  return {clip(std::floor(u_lo) - 1.0, camera.width), clip(std::floor(v_lo) - 1.0, camera.height),
          clip(std::ceil(u_hi) + 2.0, camera.width), clip(std::ceil(v_hi) + 2.0, camera.height)};
}

}  // namespace

Grid<double> render_coverage(const SceneGate& gate, const CameraParams& camera, const CameraPose& pose,
                             double time) {
  gate.validate();
  camera.validate();
  const int width = camera.width;
  const int height = camera.height;
  const GatePlaneCaster caster(gate, camera, pose, time);
  const PixelWindow win = ring_window(gate, camera, pose, time);

  Grid<double> coverage(width, height, 0.0);
  if (win.i1 <= win.i0 || win.j1 <= win.j0) return coverage;

  // Plane intersections at every pixel corner of the window; a pixel footprint
  // lies inside the disc spanned by its center hit and the farthest corner hit.
  const int cw = win.i1 - win.i0 + 1;
  std::vector<PlaneHit> corners(static_cast<std::size_t>(cw) * (win.j1 - win.j0 + 1));
  for (int j = win.j0; j <= win.j1; ++j) {
    for (int i = win.i0; i <= win.i1; ++i) {
      corners[static_cast<std::size_t>(j - win.j0) * cw + (i - win.i0)] = caster.cast(i, j);
    }
  }

  for (int j = win.j0; j < win.j1; ++j) {
    for (int i = win.i0; i < win.i1; ++i) {
      const PlaneHit center = caster.cast(i + 0.5, j + 0.5);
      bool all_valid = center.valid;
      double footprint = 0.0;
      for (int c = 0; c < 4 && all_valid; ++c) {
        const PlaneHit& k = corners[static_cast<std::size_t>(j - win.j0 + c / 2) * cw + (i - win.i0) + c % 2];
        if (!k.valid) {
          all_valid = false;
          break;
        }
        const double a = k.y - center.y;
        const double b = k.z - center.z;
        footprint = std::max(footprint, a * a + b * b);
      }
      if (all_valid) {
        footprint = std::sqrt(footprint);
        const double r = caster.radius(center);
        if (r + footprint < caster.inner() || r - footprint > caster.outer()) continue;
        if (r - footprint >= caster.inner() && r + footprint <= caster.outer()) {
          coverage(i, j) = 1.0;
          continue;
        }
      }
      int hits = 0;
      for (int b = 0; b < kSupersample; ++b) {
        for (int a = 0; a < kSupersample; ++a) {
          const PlaneHit s = caster.cast(i + (a + 0.5) / kSupersample, j + (b + 0.5) / kSupersample);
          if (caster.on_frame(s)) ++hits;
        }
      }
      coverage(i, j) = static_cast<double>(hits) / (kSupersample * kSupersample);
    }
  }
  return coverage;
}

Grid<double> log_intensity_from_coverage(Grid<double> coverage, const CameraParams& camera) {
  const double background = std::log(camera.intensity_floor);
  for (double& value : coverage.values()) value = value > 0.0 ? std::log(value + camera.intensity_floor) : background;
  return coverage;
}

Grid<double> render_log_intensity(const SceneGate& gate, const CameraParams& camera, const CameraPose& pose,
                                  double time) {
  return log_intensity_from_coverage(render_coverage(gate, camera, pose, time), camera);
}

Grid<double> render_log_intensity(const SceneGate& gate, const CameraParams& camera, double time) {
  return render_log_intensity(gate, camera, CameraPose{}, time);
}

CameraModel::CameraModel(CameraParams params)
    : params_(params),
      reference_((params.validate(), params.width), params.height, std::log(params.intensity_floor)),
      rng_(params.noise_seed) {}

void CameraModel::reset_reference(Grid<double> log_intensity) {
  if (log_intensity.width() != params_.width || log_intensity.height() != params_.height)
    throw DomainError("camera: reference grid dimensions do not match the sensor");
  reference_ = std::move(log_intensity);
}

std::vector<Event> CameraModel::generate_events(const Grid<double>& new_log_intensity, std::int64_t t0_us,
                                                std::int64_t t1_us) {
  if (t1_us <= t0_us) throw DomainError("generate_events: t1 must be greater than t0");
  if (!new_log_intensity.same_shape(reference_))
    throw DomainError("generate_events: grid dimensions do not match the sensor");

  const double threshold = params_.contrast_threshold;
  const std::int64_t span = t1_us - t0_us;
  std::vector<Event> events;
  for (int y = 0; y < params_.height; ++y) {
    for (int x = 0; x < params_.width; ++x) {
      const double delta = new_log_intensity(x, y) - reference_(x, y);
      const auto count = static_cast<std::int64_t>(std::floor(std::abs(delta) / threshold));
      if (count == 0) continue;
      const int polarity = delta > 0.0 ? 1 : -1;
      for (std::int64_t k = 1; k <= count; ++k) {
        events.push_back({t0_us + k * span / count, x, y, polarity});
      }
      reference_(x, y) += static_cast<double>(count) * threshold * polarity;
    }
  }

  if (params_.noise_rate > 0.0) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<std::int64_t> offset(1, span);
    for (int y = 0; y < params_.height; ++y) {
      for (int x = 0; x < params_.width; ++x) {
        if (unit(rng_) >= params_.noise_rate) continue;
        const int polarity = unit(rng_) < 0.5 ? -1 : 1;
        events.push_back({t0_us + offset(rng_), x, y, polarity});
      }
    }
  }

  std::sort(events.begin(), events.end(), event_before);
  return events;
}

}  // namespace evnav
