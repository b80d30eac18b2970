#include <set>
#include <string>

#include <nlohmann/json.hpp>

#include "evnav/errors.hpp"
#include "evnav/sim_harness.hpp"

namespace evnav {
namespace {

using nlohmann::json;

// Reads optional fields of one JSON object and rejects keys nobody asked for.
class Section {
 public:
  Section(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  ~Section() = default;

  template <typename T>
  void get(const char* key, T& dst) {
    seen_.insert(key);
    if (!obj_.contains(key)) return;
    try {
      dst = obj_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(path_ + key + ": " + e.what());
    }
  }

  void vec3(const char* key, Vec3& dst) {
    std::vector<double> v{dst.x(), dst.y(), dst.z()};
    get(key, v);
    if (v.size() != 3) throw ConfigError(path_ + key + ": expected three numbers");
    dst = Vec3(v[0], v[1], v[2]);
  }

  std::optional<Section> child(const char* key) {
    seen_.insert(key);
    if (!obj_.contains(key)) return std::nullopt;
    return Section(obj_.at(key), path_ + key + ".");
  }

  void finish() const {
    for (const auto& [key, value] : obj_.items()) {
      if (!seen_.count(key)) throw ConfigError("unknown configuration key '" + path_ + key + "'");
    }
  }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_gate(Section s, SceneGate& g) {
  s.get("depth", g.depth);
  s.get("center_y", g.center_y);
  s.get("center_z", g.center_z);
  s.get("aperture", g.aperture);
  s.get("frame_thickness", g.frame_thickness);
  s.get("oscillation_bound", g.oscillation_bound);
  s.get("lateral_speed", g.lateral_speed);
  s.finish();
}

void read_camera(Section s, CameraParams& c) {
  s.get("width", c.width);
  s.get("height", c.height);
  s.get("focal_length", c.focal_length);
  s.get("contrast_threshold", c.contrast_threshold);
  s.get("intensity_floor", c.intensity_floor);
  s.get("noise_rate", c.noise_rate);
  s.get("noise_seed", c.noise_seed);
  s.finish();
}

void read_lif(Section s, LifConfig& l) {
  s.get("beta", l.beta);
  s.get("u_th", l.u_th);
  std::vector<std::vector<double>> kernel;
  s.get("kernel", kernel);
  if (!kernel.empty()) {
    if (kernel.size() != 3) throw ConfigError("lif.kernel: expected a 3x3 array");
    for (int r = 0; r < 3; ++r) {
      if (kernel[r].size() != 3) throw ConfigError("lif.kernel: expected a 3x3 array");
      for (int c = 0; c < 3; ++c) l.kernel[r][c] = kernel[r][c];
    }
  }
  s.get("bin_width_us", l.bin_width_us);
  s.get("min_spike_pixels", l.min_spike_pixels);
  s.finish();
}

void read_dynamics(Section s, DroneDynamics& d) {
  s.get("mass", d.mass);
  s.get("gravity", d.gravity);
  s.get("drag", d.drag);
  s.get("a_max", d.a_max);
  s.get("motor_count", d.motor_count);
  s.finish();
}

void read_motors(Section s, MotorParams& m) {
  s.get("resistance", m.resistance);
  s.get("k_e", m.k_e);
  s.get("k_t", m.k_t);
  s.get("k_f", m.k_f);
  s.get("k_m", m.k_m);
  s.get("i_0", m.i_0);
  s.finish();
}

void read_sweep(Section s, SweepGrid& g) {
  s.get("depths", g.depths);
  s.get("offsets", g.offsets);
  std::vector<std::string> modes;
  s.get("modes", modes);
  if (!modes.empty()) {
    g.modes.clear();
    for (const auto& m : modes) g.modes.push_back(planner_mode_from_string(m));
  }
  s.finish();
}

void read_training(Section s, TrainConfig& t) {
  s.get("learning_rate", t.learning_rate);
  s.get("epochs", t.epochs);
  s.get("batch_size", t.batch_size);
  s.get("seed", t.seed);
  s.get("grad_clip", t.grad_clip);
  std::string variant = to_string(t.physics.variant);
  s.get("physics_variant", variant);
  t.physics.variant = physics_variant_from_string(variant);
  s.get("physics_a_max", t.physics.a_max);
  s.get("hidden", t.hidden);
  s.get("d_max", t.d_max);
  s.get("v_floor", t.v_floor);
  s.get("v_ceil", t.v_ceil);
  s.finish();
}

}  // namespace

SimConfig sim_config_from_json(const std::string& text, SweepGrid* grid, TrainConfig* train) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  SimConfig c;
  SweepGrid local_grid;
  TrainConfig local_train;
  Section root(doc, "");
  root.get("dt", c.dt);
  if (auto s = root.child("gate")) read_gate(*s, c.gate);
  root.vec3("drone_start", c.drone_start);
  if (auto s = root.child("camera")) read_camera(*s, c.camera);
  if (auto s = root.child("lif")) read_lif(*s, c.lif);
  root.get("velocity_source", c.velocity_source);
  if (auto s = root.child("loss_weights")) {
    s->get("lambda_physics", c.loss_weights.lambda_physics);
    s->get("lambda_energy", c.loss_weights.lambda_energy);
    s->finish();
  }
  root.get("kappa", c.kappa);
  root.get("alpha", c.alpha);
  root.get("depth_noise_sigma", c.depth_noise_sigma);
  std::string mode = to_string(c.mode);
  root.get("mode", mode);
  c.mode = planner_mode_from_string(mode);
  root.get("seed", c.seed);
  if (auto s = root.child("dynamics")) read_dynamics(*s, c.dynamics);
  if (auto s = root.child("motors")) read_motors(*s, c.motors);
  root.get("detection_timeout", c.detection_timeout);
  root.get("replan_threshold", c.replan_threshold);
  root.get("track_window", c.track_window);
  root.get("stable_bins", c.stable_bins);
  root.get("stable_iou", c.stable_iou);
  if (auto s = root.child("sweep")) read_sweep(*s, grid ? *grid : local_grid);
  if (auto s = root.child("training")) read_training(*s, train ? *train : local_train);
  root.finish();
  c.validate();
  return c;
}

std::string sim_config_to_json(const SimConfig& c, const SweepGrid& grid, const TrainConfig& train) {
  json j;
  j["dt"] = c.dt;
  j["gate"] = {{"depth", c.gate.depth},
               {"center_y", c.gate.center_y},
               {"center_z", c.gate.center_z},
               {"aperture", c.gate.aperture},
               {"frame_thickness", c.gate.frame_thickness},
               {"oscillation_bound", c.gate.oscillation_bound},
               {"lateral_speed", c.gate.lateral_speed}};
  j["drone_start"] = {c.drone_start.x(), c.drone_start.y(), c.drone_start.z()};
  j["camera"] = {{"width", c.camera.width},
                 {"height", c.camera.height},
                 {"focal_length", c.camera.focal_length},
                 {"contrast_threshold", c.camera.contrast_threshold},
                 {"intensity_floor", c.camera.intensity_floor},
                 {"noise_rate", c.camera.noise_rate},
                 {"noise_seed", c.camera.noise_seed}};
  json kernel = json::array();
  for (const auto& row : c.lif.kernel) kernel.push_back(std::vector<double>(row.begin(), row.end()));
  j["lif"] = {{"beta", c.lif.beta},
              {"u_th", c.lif.u_th},
              {"kernel", kernel},
              {"bin_width_us", c.lif.bin_width_us},
              {"min_spike_pixels", c.lif.min_spike_pixels}};
  j["velocity_source"] = c.velocity_source;
  j["loss_weights"] = {{"lambda_physics", c.loss_weights.lambda_physics},
                       {"lambda_energy", c.loss_weights.lambda_energy}};
  j["kappa"] = c.kappa;
  j["alpha"] = c.alpha;
  j["depth_noise_sigma"] = c.depth_noise_sigma;
  j["mode"] = to_string(c.mode);
  j["seed"] = c.seed;
  j["dynamics"] = {{"mass", c.dynamics.mass},
                   {"gravity", c.dynamics.gravity},
                   {"drag", c.dynamics.drag},
                   {"a_max", c.dynamics.a_max},
                   {"motor_count", c.dynamics.motor_count}};
  j["motors"] = {{"resistance", c.motors.resistance}, {"k_e", c.motors.k_e}, {"k_t", c.motors.k_t},
                 {"k_f", c.motors.k_f},               {"k_m", c.motors.k_m}, {"i_0", c.motors.i_0}};
  j["detection_timeout"] = c.detection_timeout;
  j["replan_threshold"] = c.replan_threshold;
  j["track_window"] = c.track_window;
  j["stable_bins"] = c.stable_bins;
  j["stable_iou"] = c.stable_iou;
  std::vector<std::string> modes;
  for (PlannerMode m : grid.modes) modes.push_back(to_string(m));
  j["sweep"] = {{"depths", grid.depths}, {"offsets", grid.offsets}, {"modes", modes}};
  j["training"] = {{"learning_rate", train.learning_rate},
                   {"epochs", train.epochs},
                   {"batch_size", train.batch_size},
                   {"seed", train.seed},
                   {"grad_clip", train.grad_clip},
                   {"physics_variant", to_string(train.physics.variant)},
                   {"physics_a_max", train.physics.a_max},
                   {"hidden", train.hidden},
                   {"d_max", train.d_max},
                   {"v_floor", train.v_floor},
                   {"v_ceil", train.v_ceil}};
  return j.dump(2);
}

}  // namespace evnav
