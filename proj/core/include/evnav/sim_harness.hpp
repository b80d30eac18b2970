#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "evnav/energy_model.hpp"
#include "evnav/event_camera.hpp"
#include "evnav/pgnn.hpp"
#include "evnav/planner.hpp"
#include "evnav/snn_detector.hpp"
#include "evnav/velocity_source.hpp"

namespace evnav {

enum class PlannerMode { predictive, baseline };

std::string to_string(PlannerMode mode);
/// Accepts "predictive", "baseline" or "depth_only_baseline"; throws ConfigError otherwise.
PlannerMode planner_mode_from_string(const std::string& name);

struct SimConfig {
  double dt = 0.002;
  SceneGate gate = default_sim_gate();
  Vec3 drone_start = Vec3::Zero();
  CameraParams camera;
  LifConfig lif;
  /// "analytic" fits the energy curve at each planning depth; anything else is
  /// a path to a weights document.
  std::string velocity_source = "analytic";
  LossWeights loss_weights;
  double kappa = 1.0;
  double alpha = 0.2;
  double depth_noise_sigma = 0.02;
  PlannerMode mode = PlannerMode::predictive;
  std::uint64_t seed = 1;
  DroneDynamics dynamics;
  MotorParams motors;

  double detection_timeout = 1.0;   // s without a stable track before giving up
  double replan_threshold = 0.25;   // m between observed and expected gate position
  double track_window = 0.2;        // s of detections used to estimate gate speed
  int stable_bins = 3;
  double stable_iou = 0.3;          // overlap between consecutive boxes of a stable track

  static SceneGate default_sim_gate();
  /// Throws ConfigError on invalid values.
  void validate() const;
};

struct SimMetrics {
  double flight_time = 0.0;
  double path_length = 0.0;
  double dynamic_energy = 0.0;   // motor model, J
  double thrust_energy = 0.0;    // integral of kappa F^alpha
  bool success = false;
  double mean_iou = 0.0;
  double miss_distance = 0.0;
  std::string status = "ok";     // ok | no-detection | timeout
  int replans = 0;
  Vec3 start = Vec3::Zero();
  Vec3 crossing = Vec3::Zero();
};

/// One control step of an episode.
struct StepRecord {
  double t = 0.0;
  double dt = 0.0;
  Vec3 drone = Vec3::Zero();
  double gate_y = 0.0;
  std::optional<BoundingBox> box;       // set on steps that close a detection bin
  std::optional<BoundingBox> truth;
  std::optional<double> y_star;         // current planning target
  double thrust = 0.0;                  // 0 before take-off
};

struct EpisodeResult {
  SimMetrics metrics;
  std::vector<StepRecord> log;
};

EpisodeResult run_episode(const SimConfig& config, const VelocityModel& velocity);
/// Builds the velocity model named by config.velocity_source.
EpisodeResult run_episode(const SimConfig& config);

std::unique_ptr<VelocityModel> make_velocity_model(const SimConfig& config);

/// JSON-lines, one object per StepRecord.
void write_episode_log(std::ostream& out, const std::vector<StepRecord>& log);

struct SweepRow {
  PlannerMode mode = PlannerMode::predictive;
  double depth = 0.0;
  double offset = 0.0;
  SimMetrics metrics;
};

/// Start offsets move the drone along z (vertical); lateral offsets would put
/// the gate outside the field of view at short range.
std::vector<SweepRow> run_sweep(const SimConfig& base, const std::vector<double>& depths,
                                const std::vector<double>& offsets, const std::vector<PlannerMode>& modes,
                                const VelocityModel& velocity);

void write_metrics_table(std::ostream& out, const std::vector<SweepRow>& rows);

struct ModeSummary {
  PlannerMode mode = PlannerMode::predictive;
  int episodes = 0;
  double success_rate = 0.0;
  double mean_flight_time = 0.0;
  double mean_path_length = 0.0;
  double mean_energy = 0.0;
};

/// Per-mode means in the order modes first appear; every row counts.
std::vector<ModeSummary> summarize(const std::vector<SweepRow>& rows);
void write_summary_table(std::ostream& out, const std::vector<ModeSummary>& summary);

/// Depths 2..6 m, offsets -2, 0, +2 m, both planner modes.
struct SweepGrid {
  std::vector<double> depths{2.0, 3.0, 4.0, 5.0, 6.0};
  std::vector<double> offsets{-2.0, 0.0, 2.0};
  std::vector<PlannerMode> modes{PlannerMode::predictive, PlannerMode::baseline};
};

/// JSON configuration mirroring SimConfig (snake_case keys, SI units). Unknown
/// keys are rejected with ConfigError.
SimConfig sim_config_from_json(const std::string& text, SweepGrid* grid = nullptr, TrainConfig* train = nullptr);
std::string sim_config_to_json(const SimConfig& config, const SweepGrid& grid, const TrainConfig& train);

}  // namespace evnav
