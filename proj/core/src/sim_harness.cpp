#include "evnav/sim_harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <ostream>
#include <random>

#include <nlohmann/json.hpp>

#include "evnav/errors.hpp"
#include "evnav/pgnn_io.hpp"

namespace evnav {
namespace {

struct TrackPoint {
  double t = 0.0;
  double y = 0.0;
};

struct LineFit {
  double y_first = 0.0;
  double y_last = 0.0;
  double t_last = 0.0;
  double span = 0.0;
  double rms = 0.0;
};

// Least-squares line through the newest `count` track points, evaluated at the
// first and last sample times.
std::optional<LineFit> fit_track(const std::deque<TrackPoint>& track, std::size_t count) {
  const std::size_t n = std::min(count, track.size());
  if (n < 2) return std::nullopt;
  const auto first = track.end() - static_cast<std::ptrdiff_t>(n);
  double t_mean = 0.0;
  double y_mean = 0.0;
  for (auto it = first; it != track.end(); ++it) {
    t_mean += it->t;
    y_mean += it->y;
  }
  t_mean /= static_cast<double>(n);
  y_mean /= static_cast<double>(n);
  double stt = 0.0;
  double sty = 0.0;
  for (auto it = first; it != track.end(); ++it) {
    stt += (it->t - t_mean) * (it->t - t_mean);
    sty += (it->t - t_mean) * (it->y - y_mean);
  }
  if (stt <= 0.0) return std::nullopt;
  const double slope = sty / stt;
  double sq = 0.0;
  for (auto it = first; it != track.end(); ++it) {
    const double r = it->y - (y_mean + slope * (it->t - t_mean));
    sq += r * r;
  }
  LineFit fit;
  fit.t_last = track.back().t;
  fit.span = track.back().t - first->t;
  fit.y_first = y_mean + slope * (first->t - t_mean);
  fit.y_last = y_mean + slope * (fit.t_last - t_mean);
  fit.rms = std::sqrt(sq / static_cast<double>(n));
  return fit;
}

// Longest recent stretch of the track that a straight line explains to within
// `tol`. A reversal at +-L bends the track, so the stretch ends at the last bounce.
std::optional<LineFit> fit_segment(const std::deque<TrackPoint>& track, std::size_t min_points, double tol) {
  for (std::size_t n = track.size(); n >= min_points && n >= 2; --n) {
    const auto fit = fit_track(track, n);
    if (fit && fit->rms <= tol) return fit;
  }
  return std::nullopt;
}

bool touches_border(const BoundingBox& box, const CameraParams& camera) {
  return box.x_min <= 0 || box.y_min <= 0 || box.x_max >= camera.width - 1 || box.y_max >= camera.height - 1;
}

// Lateral position of the ray through the box center where it meets the plane
// `reading` metres ahead of the drone.
// The box midpoint is used at half-pixel resolution; the integer center would
// quantise the speed estimate.
double lateral_from_box(const BoundingBox& box, const CameraPose& pose, const CameraParams& camera,
                        double reading) {
  const double u = 0.5 * (box.x_min + box.x_max + 1);
  const double v = 0.5 * (box.y_min + box.y_max + 1);
  const Vec3 dir = pose.ray_direction(u, v, camera);
  if (dir.x() <= 1e-9) return pose.position.y();
  return pose.position.y() + reading / dir.x() * dir.y();
}

std::string format_double(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", value);
  return buf;
}

class Episode {
 public:
  Episode(const SimConfig& config, const VelocityModel& velocity)
      : cfg_(config), velocity_(velocity), rng_(config.seed) {}

  EpisodeResult run();

 private:
  double depth_reading() {
    const double truth = cfg_.gate.depth - pos_.x();
    if (cfg_.depth_noise_sigma <= 0.0) return truth;
    return truth + std::normal_distribution<double>(0.0, cfg_.depth_noise_sigma)(rng_);
  }

  BoundaryState current_state(double now) const {
    BoundaryState s;
    s.position = pos_;
    if (flying_) {
      const TrajectorySample cur = traj_.sample(std::min(now - traj_t0_, traj_.duration()));
      s.velocity = cur.velocity;
      s.acceleration = cur.acceleration;
    }
    return s;
  }

  void plan_to(double now, double reading, double target_y, double duration) {
    BoundaryState end;
    end.position = Vec3(pos_.x() + reading, target_y, cfg_.gate.center_z);
    traj_ = Trajectory::between(current_state(now), end, duration);
    traj_t0_ = now;
    flying_ = true;
    target_y_ = target_y;
  }

  // Plans from the tracked gate motion; false when the track is too short.
  bool perception_plan(double now);

  const SimConfig& cfg_;
  const VelocityModel& velocity_;
  std::mt19937_64 rng_;

  Vec3 pos_ = Vec3::Zero();
  bool flying_ = false;
  Trajectory traj_;
  double traj_t0_ = 0.0;
  double target_y_ = 0.0;
  std::deque<TrackPoint> track_;
  std::size_t window_points_ = 2;
  std::size_t min_segment_points_ = 2;
  bool tracked_ = false;
  double plan_y2_ = 0.0;
  double plan_vr_ = 0.0;
  double plan_t_ = 0.0;
  int replans_ = 0;
};

bool Episode::perception_plan(double now) {
  const double reading = depth_reading();
  if (reading < 0.3) return false;
  // Residual tolerance: a fixed floor plus half a pixel at the current range.
  const double tol = 0.02 + 0.5 * reading / cfg_.camera.focal_length;
  const auto fit = fit_segment(track_, min_segment_points_, tol);
  if (!fit || fit->span <= 0.0) return false;
  const double bound = cfg_.gate.oscillation_bound;
  const double v_r = gate_velocity({fit->y_first, fit->y_last, fit->span});
  const double y2 = std::clamp(fit->y_last, -bound, bound);
  const double t_rem = velocity_.flight_time(reading);
  double target = y2;
  if (cfg_.mode == PlannerMode::predictive) {
    // The newest measurement is already (now - t_last) old when the plan starts.
    target = predict_gate_position(y2, v_r, t_rem + (now - fit->t_last), bound).y_star;
  }
  plan_to(now, reading, target, t_rem);
  plan_y2_ = y2;
  plan_vr_ = v_r;
  plan_t_ = fit->t_last;
  return true;
}

EpisodeResult Episode::run() {
  cfg_.validate();
  EpisodeResult result;
  SimMetrics& m = result.metrics;
  const SceneGate& gate = cfg_.gate;
  const double bound = gate.oscillation_bound;

  const auto dt_us = static_cast<std::int64_t>(std::llround(cfg_.dt * 1e6));
  const std::int64_t bin_us = cfg_.lif.bin_width_us;
  const std::int64_t steps_per_bin = bin_us / dt_us;
  const double bin_s = static_cast<double>(bin_us) * 1e-6;
  constexpr std::size_t kRecentPoints = 5;
  window_points_ = static_cast<std::size_t>(std::llround(cfg_.track_window / bin_s)) + 1;
  min_segment_points_ = std::max<std::size_t>(kRecentPoints, window_points_ / 2 + 1);

  CameraParams cam = cfg_.camera;
  cam.noise_seed = cfg_.camera.noise_seed + cfg_.seed;
  CameraModel camera(cam);
  SnnDetector detector(cfg_.lif, cam.width, cam.height);
  const Vec3 aim(gate.depth, 0.0, gate.center_z);

  pos_ = cfg_.drone_start;
  m.start = pos_;
  camera.reset_reference(render_log_intensity(gate, cam, CameraPose::looking_at(pos_, aim), 0.0));

  // Take off towards the nominal gate center from the depth reading alone;
  // perception refines the target once a stable track exists.
  const double first_reading = depth_reading();
  const double first_t_traj = velocity_.flight_time(std::max(first_reading, 0.05));
  plan_to(0.0, first_reading, 0.0, first_t_traj);

  std::vector<Event> bin_events;
  std::int64_t bin_start = 0;
  std::optional<BoundingBox> prev_box;
  int stable = 0;
  double iou_sum = 0.0;
  int iou_bins = 0;

  for (std::int64_t k = 1;; ++k) {
    const std::int64_t t_prev_us = (k - 1) * dt_us;
    const std::int64_t t_us = k * dt_us;
    const double t = static_cast<double>(t_us) * 1e-6;
    StepRecord rec;
    rec.t = t;
    rec.dt = cfg_.dt;

    const TrajectorySample s = traj_.sample(std::min(t - traj_t0_, traj_.duration()));
    rec.thrust = required_thrust(s.acceleration.norm(), s.velocity.norm(), cfg_.dynamics);
    m.dynamic_energy += electrical_power(rec.thrust, cfg_.motors, cfg_.dynamics.motor_count) * cfg_.dt;
    m.thrust_energy += power_thrust(rec.thrust, cfg_.kappa, cfg_.alpha) * cfg_.dt;
    m.path_length += (s.position - pos_).norm();
    pos_ = s.position;

    const CameraPose pose = CameraPose::looking_at(pos_, aim);
    const Grid<double> coverage = render_coverage(gate, cam, pose, t);
    const auto events = camera.generate_events(log_intensity_from_coverage(coverage, cam), t_prev_us, t_us);
    bin_events.insert(bin_events.end(), events.begin(), events.end());

    if (k % steps_per_bin == 0) {
      const Detection det = detector.process_bin(bin_events, bin_start);
      bin_events.clear();
      const double t_mid = (static_cast<double>(bin_start) + 0.5 * static_cast<double>(bin_us)) * 1e-6;
      bin_start += bin_us;
      rec.box = det.box;
      rec.truth = mask_bbox(coverage);
      if (rec.truth) {
        iou_sum += det.box ? iou(*det.box, *rec.truth) : 0.0;
        ++iou_bins;
      }
      // A box clipped by the sensor edge no longer centres on the gate, so it
      // keeps the track alive without contributing a position.
      bool fresh = false;
      if (det.box) {
        stable = prev_box && iou(*det.box, *prev_box) >= cfg_.stable_iou ? stable + 1 : 1;
        if (!touches_border(*det.box, cam)) {
          track_.push_back({t_mid, lateral_from_box(*det.box, pose, cam, depth_reading())});
          if (track_.size() > window_points_) track_.pop_front();
          fresh = true;
        }
      } else {
        stable = 0;
        track_.clear();
      }
      prev_box = det.box;

      if (fresh && !tracked_) {
        if (stable >= cfg_.stable_bins && track_.size() >= window_points_ && perception_plan(t)) tracked_ = true;
      } else if (fresh && track_.size() >= kRecentPoints) {
        const auto recent = fit_track(track_, kRecentPoints);
        const double elapsed = std::max(0.0, recent->t_last - plan_t_);
        const double expected = cfg_.mode == PlannerMode::predictive
                                    ? reflect_oracle(plan_y2_, plan_vr_, elapsed, bound, 1e-3)
                                    : target_y_;
        if (std::abs(recent->y_last - expected) > cfg_.replan_threshold && perception_plan(t)) ++replans_;
      }
    }

    rec.drone = pos_;
    rec.gate_y = gate.lateral_position(t);
    if (tracked_) rec.y_star = target_y_;
    result.log.push_back(rec);

    const bool arrived = pos_.x() >= gate.depth || t - traj_t0_ >= traj_.duration();
    if (arrived) {
      m.crossing = pos_;
      m.miss_distance = std::hypot(pos_.y() - rec.gate_y, pos_.z() - gate.center_z);
      m.success = m.miss_distance < gate.aperture;
      break;
    }
    if (!tracked_ && t >= cfg_.detection_timeout) {
      m.status = "no-detection";
      break;
    }
    if (t > 3.0 * first_t_traj) {
      m.status = "timeout";
      break;
    }
  }

  m.flight_time = result.log.back().t;
  m.mean_iou = iou_bins > 0 ? iou_sum / iou_bins : 0.0;
  m.replans = replans_;
  if (m.status != "ok") {
    m.success = false;
    m.crossing = pos_;
    m.miss_distance = std::hypot(pos_.y() - gate.lateral_position(m.flight_time), pos_.z() - gate.center_z);
  }
  return result;
}

}  // namespace

std::string to_string(PlannerMode mode) { return mode == PlannerMode::predictive ? "predictive" : "baseline"; }

PlannerMode planner_mode_from_string(const std::string& name) {
  if (name == "predictive") return PlannerMode::predictive;
  if (name == "baseline" || name == "depth_only_baseline") return PlannerMode::baseline;
  throw ConfigError("unknown planner mode '" + name + "'");
}

SceneGate SimConfig::default_sim_gate() {
  SceneGate g;
  g.depth = 4.0;
  g.oscillation_bound = 1.5;
  g.lateral_speed = 2.0;
  return g;
}

void SimConfig::validate() const {
  try {
    gate.validate();
    camera.validate();
    lif.validate();
    dynamics.validate();
    motors.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  if (!(dt > 0.0)) throw ConfigError("dt must be positive");
  const auto dt_us = std::llround(dt * 1e6);
  if (dt_us <= 0 || std::abs(static_cast<double>(dt_us) - dt * 1e6) > 1e-6 || lif.bin_width_us % dt_us != 0)
    throw ConfigError("dt must be a whole number of microseconds dividing the detection bin width");
  if (depth_noise_sigma < 0.0) throw ConfigError("depth_noise_sigma must be non-negative");
  if (!(kappa > 0.0)) throw ConfigError("kappa must be positive");
  if (!(gate.depth - drone_start.x() > 0.1)) throw ConfigError("the gate must lie ahead of the drone start");
  if (!(detection_timeout > 0.0 && track_window > 0.0 && replan_threshold > 0.0))
    throw ConfigError("detection_timeout, track_window and replan_threshold must be positive");
  if (stable_bins < 1) throw ConfigError("stable_bins must be at least 1");
}

EpisodeResult run_episode(const SimConfig& config, const VelocityModel& velocity) {
  return Episode(config, velocity).run();
}

std::unique_ptr<VelocityModel> make_velocity_model(const SimConfig& config) {
  if (config.velocity_source == "analytic")
    return std::make_unique<AnalyticVelocity>(config.dynamics, config.motors);
  return std::make_unique<PgnnVelocity>(load_model(config.velocity_source));
}

EpisodeResult run_episode(const SimConfig& config) {
  const auto velocity = make_velocity_model(config);
  return run_episode(config, *velocity);
}

void write_episode_log(std::ostream& out, const std::vector<StepRecord>& log) {
  const auto box_json = [](const std::optional<BoundingBox>& b) -> nlohmann::json {
    if (!b) return nullptr;
    return {b->x_min, b->x_max, b->y_min, b->y_max};
  };
  for (const StepRecord& r : log) {
    nlohmann::json j;
    j["t"] = r.t;
    j["drone"] = {r.drone.x(), r.drone.y(), r.drone.z()};
    j["gate_y"] = r.gate_y;
    j["box"] = box_json(r.box);
    j["truth_box"] = box_json(r.truth);
    j["y_star"] = r.y_star ? nlohmann::json(*r.y_star) : nlohmann::json(nullptr);
    j["thrust"] = r.thrust;
    j["dt"] = r.dt;
    out << j.dump() << '\n';
  }
}

std::vector<SweepRow> run_sweep(const SimConfig& base, const std::vector<double>& depths,
                                const std::vector<double>& offsets, const std::vector<PlannerMode>& modes,
                                const VelocityModel& velocity) {
  if (depths.empty() || offsets.empty() || modes.empty()) throw DomainError("run_sweep: grids must be non-empty");
  std::vector<SweepRow> rows;
  for (PlannerMode mode : modes) {
    for (double depth : depths) {
      for (double offset : offsets) {
        SweepRow row{mode, depth, offset, {}};
        SimConfig cfg = base;
        cfg.mode = mode;
        cfg.gate.depth = depth;
        cfg.drone_start = base.drone_start + Vec3(0.0, 0.0, offset);
        try {
          row.metrics = run_episode(cfg, velocity).metrics;
        } catch (const std::exception& e) {
          row.metrics = SimMetrics{};
          row.metrics.status = std::string("error: ") + e.what();
        }
        rows.push_back(row);
      }
    }
  }
  return rows;
}

void write_metrics_table(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "mode,depth_m,offset_x_m,flight_time_s,path_length_m,energy_J,success,mean_iou,miss_m\n";
  for (const SweepRow& r : rows) {
    const SimMetrics& m = r.metrics;
    out << to_string(r.mode) << ',' << format_double(r.depth) << ',' << format_double(r.offset) << ','
        << format_double(m.flight_time) << ',' << format_double(m.path_length) << ','
        << format_double(m.dynamic_energy) << ',' << (m.success ? 1 : 0) << ',' << format_double(m.mean_iou) << ','
        << format_double(m.miss_distance) << '\n';
  }
}

std::vector<ModeSummary> summarize(const std::vector<SweepRow>& rows) {
  std::vector<ModeSummary> out;
  for (const SweepRow& r : rows) {
    auto it = std::find_if(out.begin(), out.end(), [&](const ModeSummary& s) { return s.mode == r.mode; });
    if (it == out.end()) {
      out.push_back({r.mode});
      it = out.end() - 1;
    }
    ++it->episodes;
    it->success_rate += r.metrics.success ? 1.0 : 0.0;
    it->mean_flight_time += r.metrics.flight_time;
    it->mean_path_length += r.metrics.path_length;
    it->mean_energy += r.metrics.dynamic_energy;
  }
  for (ModeSummary& s : out) {
    s.success_rate /= s.episodes;
    s.mean_flight_time /= s.episodes;
    s.mean_path_length /= s.episodes;
    s.mean_energy /= s.episodes;
  }
  return out;
}

void write_summary_table(std::ostream& out, const std::vector<ModeSummary>& summary) {
  out << "mode,episodes,success_rate,mean_flight_time_s,mean_path_length_m,mean_energy_J\n";
  for (const ModeSummary& s : summary) {
    out << to_string(s.mode) << ',' << s.episodes << ',' << format_double(s.success_rate) << ','
        << format_double(s.mean_flight_time) << ',' << format_double(s.mean_path_length) << ','
        << format_double(s.mean_energy) << '\n';
  }
}

}  // namespace evnav
