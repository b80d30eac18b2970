#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "evnav/errors.hpp"
#include "evnav/sim_harness.hpp"
#include "oracles.hpp"

namespace evnav {
namespace {

void expect_same_metrics(const SimMetrics& a, const SimMetrics& b) {
  EXPECT_EQ(a.flight_time, b.flight_time);
  EXPECT_EQ(a.path_length, b.path_length);
  EXPECT_EQ(a.dynamic_energy, b.dynamic_energy);
  EXPECT_EQ(a.thrust_energy, b.thrust_energy);
  EXPECT_EQ(a.success, b.success);
  EXPECT_EQ(a.mean_iou, b.mean_iou);
  EXPECT_EQ(a.miss_distance, b.miss_distance);
  EXPECT_EQ(a.status, b.status);
  EXPECT_EQ(a.replans, b.replans);
}

const EpisodeResult& default_episode() {
  static const EpisodeResult r = run_episode(SimConfig{});
  return r;
}

TEST(Episode, StaticGateIsHitDeadCentre) {
  SimConfig cfg;
  cfg.gate.lateral_speed = 0.0;
  const SimMetrics m = run_episode(cfg).metrics;
  EXPECT_EQ(m.status, "ok");
  EXPECT_TRUE(m.success);
  EXPECT_LT(m.miss_distance, 0.05);
}

TEST(Episode, DefaultRunSucceeds) {
  const SimMetrics& m = default_episode().metrics;
  EXPECT_EQ(m.status, "ok");
  EXPECT_TRUE(m.success);
  EXPECT_GT(m.flight_time, 0.0);
  EXPECT_GT(m.mean_iou, 0.5);
  EXPECT_GT(m.thrust_energy, 0.0);
}

TEST(Episode, IsDeterministic) {
  const EpisodeResult again = run_episode(SimConfig{});
  expect_same_metrics(default_episode().metrics, again.metrics);
  ASSERT_EQ(default_episode().log.size(), again.log.size());
  std::ostringstream a;
  std::ostringstream b;
  write_episode_log(a, default_episode().log);
  write_episode_log(b, again.log);
  EXPECT_EQ(a.str(), b.str());
}

TEST(Episode, SeedChangesNoise) {
  SimConfig cfg;
  cfg.seed = 2;
  EXPECT_NE(run_episode(cfg).metrics.path_length, default_episode().metrics.path_length);
}

TEST(Episode, FlightTimeTracksOptimalSpeed) {
  SimConfig cfg;
  cfg.gate.depth = 3.0;
  const SimMetrics m = run_episode(cfg).metrics;
  const auto [lo, hi] = testing::feasible_range(3.0);
  const double plan = 3.0 / testing::grid_search_v_opt(3.0, lo, hi, 1000).velocity;
  EXPECT_GE(m.flight_time, 0.5 * plan);
  EXPECT_LE(m.flight_time, 2.0 * plan);
}

TEST(Episode, EnergyEqualsSumOverThrustTrace) {
  const SimConfig cfg;
  const EpisodeResult& r = default_episode();
  double dynamic = 0.0;
  double thrust = 0.0;
  for (const StepRecord& s : r.log) {
    dynamic += electrical_power(s.thrust, cfg.motors, cfg.dynamics.motor_count) * s.dt;
    thrust += power_thrust(s.thrust, cfg.kappa, cfg.alpha) * s.dt;
  }
  EXPECT_EQ(dynamic, r.metrics.dynamic_energy);
  EXPECT_EQ(thrust, r.metrics.thrust_energy);
}

TEST(Episode, PathAtLeastStraightLine) {
  for (double offset : {-2.0, 2.0}) {
    SimConfig cfg;
    cfg.drone_start.z() = offset;
    const SimMetrics m = run_episode(cfg).metrics;
    EXPECT_GE(m.path_length, (m.crossing - m.start).norm() - 1e-12);
  }
  const SimMetrics& m = default_episode().metrics;
  EXPECT_GE(m.path_length, (m.crossing - m.start).norm() - 1e-12);
}

TEST(Episode, NoDetectionWithinTimeout) {
  SimConfig cfg;
  cfg.lif.u_th = 1e9;
  const SimMetrics m = run_episode(cfg).metrics;
  EXPECT_EQ(m.status, "no-detection");
  EXPECT_FALSE(m.success);
  EXPECT_NEAR(m.flight_time, cfg.detection_timeout, cfg.dt + 1e-12);
}

TEST(Episode, LogRecordsEveryStep) {
  const EpisodeResult& r = default_episode();
  std::ostringstream out;
  write_episode_log(out, r.log);
  std::istringstream in(out.str());
  std::string line;
  std::size_t lines = 0;
  int boxes = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    for (const char* key : {"t", "drone", "gate_y", "box", "y_star", "thrust"}) EXPECT_TRUE(j.contains(key)) << key;
    EXPECT_EQ(j["drone"].size(), 3u);
    boxes += j["box"].is_array();
    ++lines;
  }
  EXPECT_EQ(lines, r.log.size());
  EXPECT_GT(boxes, 10);
  EXPECT_NEAR(r.log.back().t, r.metrics.flight_time, 1e-12);
}

TEST(Sweep, SingletonGridGivesOneRow) {
  const SimConfig cfg;
  const auto v = make_velocity_model(cfg);
  const auto rows = run_sweep(cfg, {2.0}, {0.0}, {PlannerMode::predictive}, *v);
  ASSERT_EQ(rows.size(), 1u);
  std::ostringstream out;
  write_metrics_table(out, rows);
  std::istringstream in(out.str());
  std::string header;
  std::string row;
  std::string extra;
  std::getline(in, header);
  std::getline(in, row);
  EXPECT_EQ(header, "mode,depth_m,offset_x_m,flight_time_s,path_length_m,energy_J,success,mean_iou,miss_m");
  EXPECT_EQ(row.rfind("predictive,2.000000,0.000000,", 0), 0u) << row;
  EXPECT_FALSE(std::getline(in, extra));
}

TEST(Sweep, CardinalityOrderAndFailedRows) {
  const SimConfig cfg;
  const auto v = make_velocity_model(cfg);
  // Depth 0.05 puts the gate behind the start: that row fails, the rest run.
  const auto rows = run_sweep(cfg, {0.05, 2.0}, {0.0, 1.0}, {PlannerMode::baseline, PlannerMode::predictive}, *v);
  ASSERT_EQ(rows.size(), 8u);
  EXPECT_EQ(rows[0].mode, PlannerMode::baseline);
  EXPECT_EQ(rows[1].offset, 1.0);
  EXPECT_EQ(rows[2].depth, 2.0);
  EXPECT_EQ(rows[4].mode, PlannerMode::predictive);
  EXPECT_EQ(rows[0].metrics.status.rfind("error", 0), 0u);
  EXPECT_FALSE(rows[0].metrics.success);
  EXPECT_EQ(rows[2].metrics.status, "ok");
  EXPECT_THROW(run_sweep(cfg, {}, {0.0}, {PlannerMode::predictive}, *v), DomainError);

  const auto summary = summarize(rows);
  ASSERT_EQ(summary.size(), 2u);
  EXPECT_EQ(summary[0].mode, PlannerMode::baseline);
  EXPECT_EQ(summary[0].episodes, 4);
  double mean_time = 0.0;
  for (int i = 0; i < 4; ++i) mean_time += rows[i].metrics.flight_time / 4.0;
  EXPECT_NEAR(summary[0].mean_flight_time, mean_time, 1e-12);
}

TEST(PlannerMode, Names) {
  EXPECT_EQ(planner_mode_from_string("predictive"), PlannerMode::predictive);
  EXPECT_EQ(planner_mode_from_string("baseline"), PlannerMode::baseline);
  EXPECT_EQ(planner_mode_from_string("depth_only_baseline"), PlannerMode::baseline);
  EXPECT_THROW(planner_mode_from_string("psychic"), ConfigError);
}

TEST(SimConfigJson, RoundTrip) {
  SimConfig c;
  c.dt = 0.001;
  c.gate.depth = 5.5;
  c.gate.lateral_speed = -1.25;
  c.drone_start = Vec3(0.0, 0.1, -0.3);
  c.lif.kernel[0][2] = 0.5;
  c.mode = PlannerMode::baseline;
  c.seed = 42;
  c.depth_noise_sigma = 0.0;
  SweepGrid grid;
  grid.depths = {2.0, 7.0};
  TrainConfig train;
  train.epochs = 17;
  train.physics.variant = PhysicsVariant::dynamics_consistency;
  SweepGrid grid_back;
  TrainConfig train_back;
  const SimConfig back = sim_config_from_json(sim_config_to_json(c, grid, train), &grid_back, &train_back);
  EXPECT_EQ(back.dt, c.dt);
  EXPECT_EQ(back.gate.depth, c.gate.depth);
  EXPECT_EQ(back.gate.lateral_speed, c.gate.lateral_speed);
  EXPECT_EQ(back.drone_start, c.drone_start);
  EXPECT_EQ(back.lif.kernel, c.lif.kernel);
  EXPECT_EQ(back.mode, c.mode);
  EXPECT_EQ(back.seed, c.seed);
  EXPECT_EQ(back.depth_noise_sigma, 0.0);
  EXPECT_EQ(grid_back.depths, grid.depths);
  EXPECT_EQ(grid_back.modes, grid.modes);
  EXPECT_EQ(train_back.epochs, 17);
  EXPECT_EQ(train_back.physics.variant, PhysicsVariant::dynamics_consistency);
}

TEST(SimConfigJson, EmptyDocumentGivesDefaults) {
  const SimConfig c = sim_config_from_json("{}");
  const SimConfig d;
  EXPECT_EQ(c.dt, d.dt);
  EXPECT_EQ(c.gate.lateral_speed, d.gate.lateral_speed);
  EXPECT_EQ(c.alpha, 0.2);
  EXPECT_EQ(c.velocity_source, "analytic");
}

TEST(SimConfigJson, RejectsBadDocuments) {
  EXPECT_THROW(sim_config_from_json("{\"dtt\": 0.1}"), ConfigError);
  EXPECT_THROW(sim_config_from_json("{\"gate\": {\"radius\": 1}}"), ConfigError);
  EXPECT_THROW(sim_config_from_json("{\"dt\": \"fast\"}"), ConfigError);
  EXPECT_THROW(sim_config_from_json("{\"dt\": -0.1}"), ConfigError);
  EXPECT_THROW(sim_config_from_json("{\"dt\": 0.003}"), ConfigError);
  EXPECT_THROW(sim_config_from_json("{\"depth_noise_sigma\": -1}"), ConfigError);
  EXPECT_THROW(sim_config_from_json("{\"mode\": \"sideways\"}"), ConfigError);
  EXPECT_THROW(sim_config_from_json("{\"drone_start\": [1, 2]}"), ConfigError);
  EXPECT_THROW(sim_config_from_json("[1, 2"), ConfigError);
  EXPECT_THROW(sim_config_from_json("{\"lif\": {\"beta\": 1.5}}"), ConfigError);
}

TEST(SimConfig, ValidateRejectsGateBehindStart) {
  SimConfig c;
  c.drone_start.x() = 5.0;
  EXPECT_THROW(c.validate(), ConfigError);
}

}  // namespace
}  // namespace evnav
