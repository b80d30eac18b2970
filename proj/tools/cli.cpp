#include "cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "evnav/energy_model.hpp"
#include "evnav/errors.hpp"
#include "evnav/io.hpp"
#include "evnav/pgnn.hpp"
#include "evnav/pgnn_io.hpp"
#include "evnav/sim_harness.hpp"
#include "evnav/tracking.hpp"
#include "svg_plot.hpp"

namespace evnav {
namespace {

namespace fs = std::filesystem;

// Raised for problems the user can fix on the command line (exit status 1).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
};

struct Settings {
  SimConfig sim;
  SweepGrid grid;
  TrainConfig train;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config, "JSON configuration file");
  cmd->add_option("--seed", opts.seed, "Seed overriding the configuration");
  cmd->add_option("--out", opts.out, "Output directory")->capture_default_str();
}

Settings load_settings(const CommonOptions& opts) {
  Settings s;
  if (!opts.config.empty()) {
    if (!fs::exists(opts.config)) throw UsageError("config file not found: " + opts.config);
    try {
      s.sim = sim_config_from_json(read_text_file(opts.config), &s.grid, &s.train);
    } catch (const ConfigError& e) {
      throw UsageError(opts.config + ": " + e.what());
    }
  }
  if (opts.seed) {
    s.sim.seed = *opts.seed;
    s.train.seed = *opts.seed;
  }
  return s;
}

fs::path prepare_out(const CommonOptions& opts) {
  const fs::path dir(opts.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + opts.out + ": " + ec.message());
  return dir;
}

template <typename Fn>
void write_stream(const fs::path& path, Fn&& fn) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  fn(out);
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

void print_metrics(std::ostream& out, const SimMetrics& m) {
  out << "status: " << m.status << '\n'
      << "success: " << (m.success ? "yes" : "no") << '\n'
      << "flight_time_s: " << m.flight_time << '\n'
      << "path_length_m: " << m.path_length << '\n'
      << "energy_J: " << m.dynamic_energy << '\n'
      << "thrust_power_energy: " << m.thrust_energy << '\n'
      << "mean_iou: " << m.mean_iou << '\n'
      << "miss_m: " << m.miss_distance << '\n'
      << "replans: " << m.replans << '\n';
}

int run_simulate(const CommonOptions& opts, const std::string& mode, std::optional<double> depth,
                 std::optional<double> offset, std::ostream& out) {
  Settings s = load_settings(opts);
  if (!mode.empty()) s.sim.mode = planner_mode_from_string(mode);
  if (depth) s.sim.gate.depth = *depth;
  if (offset) s.sim.drone_start.z() += *offset;
  s.sim.validate();
  const fs::path dir = prepare_out(opts);
  const EpisodeResult r = run_episode(s.sim);
  write_stream(dir / "episode.jsonl", [&](std::ostream& o) { write_episode_log(o, r.log); });
  const SweepRow row{s.sim.mode, s.sim.gate.depth, s.sim.drone_start.z(), r.metrics};
  write_stream(dir / "metrics.csv", [&](std::ostream& o) { write_metrics_table(o, {row}); });
  print_metrics(out, r.metrics);
  return 0;
}

void write_sweep_plots(const fs::path& dir, const std::vector<SweepRow>& rows) {
  std::map<std::string, PlotSeries> time_series;
  std::map<std::string, PlotSeries> path_series;
  std::map<std::string, std::map<double, std::pair<double, int>>> time_acc;
  std::map<std::string, std::map<double, std::pair<double, int>>> path_acc;
  for (const SweepRow& r : rows) {
    auto& t = time_acc[to_string(r.mode)][r.depth];
    t.first += r.metrics.flight_time;
    ++t.second;
    auto& p = path_acc[to_string(r.mode)][r.depth];
    p.first += r.metrics.path_length;
    ++p.second;
  }
  std::vector<PlotSeries> times;
  std::vector<PlotSeries> paths;
  for (const auto& [mode, by_depth] : time_acc) {
    PlotSeries s{mode, {}, {}};
    for (const auto& [d, acc] : by_depth) s.x.push_back(d), s.y.push_back(acc.first / acc.second);
    times.push_back(s);
  }
  for (const auto& [mode, by_depth] : path_acc) {
    PlotSeries s{mode, {}, {}};
    for (const auto& [d, acc] : by_depth) s.x.push_back(d), s.y.push_back(acc.first / acc.second);
    paths.push_back(s);
  }
  write_text_file((dir / "flight_time_vs_depth.svg").string(),
                  line_chart_svg("Mean flight time", "gate depth (m)", "flight time (s)", times));
  write_text_file((dir / "path_length_vs_depth.svg").string(),
                  line_chart_svg("Mean path length", "gate depth (m)", "path length (m)", paths));
}

int run_sweep_cmd(const CommonOptions& opts, bool plots, std::ostream& out) {
  Settings s = load_settings(opts);
  const fs::path dir = prepare_out(opts);
  const auto velocity = make_velocity_model(s.sim);
  const auto start = std::chrono::steady_clock::now();
  const auto rows = run_sweep(s.sim, s.grid.depths, s.grid.offsets, s.grid.modes, *velocity);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const auto summary = summarize(rows);
  write_stream(dir / "metrics.csv", [&](std::ostream& o) { write_metrics_table(o, rows); });
  write_stream(dir / "summary.csv", [&](std::ostream& o) { write_summary_table(o, summary); });
  if (plots) write_sweep_plots(dir, rows);
  write_summary_table(out, summary);
  out << "episodes: " << rows.size() << ", wall clock " << seconds << " s\n";
  return 0;
}

std::vector<double> parse_depth_list(const std::string& text) {
  std::vector<double> depths;
  for (const auto& f : split_csv_line(text)) {
    try {
      std::size_t used = 0;
      const double d = std::stod(f, &used);
      if (used != f.size() || !(d > 0.0)) throw std::invalid_argument(f);
      depths.push_back(d);
    } catch (const std::logic_error&) {
      throw UsageError("--depths: '" + f + "' is not a positive number");
    }
  }
  if (depths.empty()) throw UsageError("--depths: empty list");
  return depths;
}

std::vector<PolyCoeffs> fit_by_depth(const std::vector<EnergySample>& samples) {
  std::map<double, std::vector<EnergySample>> groups;
  for (const EnergySample& s : samples) groups[s.depth].push_back(s);
  std::vector<PolyCoeffs> polys;
  for (const auto& [d, group] : groups) polys.push_back(fit_energy_poly(group));
  return polys;
}

int run_fit_energy(const CommonOptions& opts, const std::string& depth_list, int points, std::ostream& out) {
  Settings s = load_settings(opts);
  const auto depths = parse_depth_list(depth_list);
  if (points < 6) throw UsageError("--points must be at least 6");
  const fs::path dir = prepare_out(opts);
  const auto samples = generate_feasible_dataset(depths, s.sim.dynamics, s.sim.motors, points);
  const auto polys = fit_by_depth(samples);
  write_stream(dir / "energy_dataset.csv", [&](std::ostream& o) { write_energy_table(o, samples); });
  write_text_file((dir / "energy_fits.json").string(), polys_to_json(polys) + "\n");

  std::vector<PlotSeries> curves;
  for (const PolyCoeffs& p : polys) {
    PlotSeries ser{"d = " + std::to_string(static_cast<int>(std::lround(p.depth))) + " m", {}, {}};
    for (const EnergySample& e : samples) {
      if (e.depth == p.depth) ser.x.push_back(e.velocity), ser.y.push_back(e.energy);
    }
    curves.push_back(ser);
  }
  write_text_file((dir / "energy_vs_velocity.svg").string(),
                  line_chart_svg("Flight energy", "cruise speed (m/s)", "energy (J)", curves));

  out << "depth_m,v_opt_mps,boundary,rms_residual_J\n";
  for (const PolyCoeffs& p : polys) {
    const OptimalVelocity opt = optimal_velocity(p);
    out << p.depth << ',' << opt.velocity << ',' << (opt.boundary ? 1 : 0) << ',' << p.rms_residual << '\n';
  }
  return 0;
}

int run_train(const CommonOptions& opts, std::string dataset, std::ostream& out) {
  Settings s = load_settings(opts);
  if (dataset.empty()) dataset = (fs::path(opts.out) / "energy_dataset.csv").string();
  if (!fs::exists(dataset)) throw UsageError("dataset file not found: " + dataset);
  std::ifstream in(dataset);
  const auto samples = read_energy_table(in);
  if (samples.empty()) throw ConfigError("dataset " + dataset + " holds no samples");
  const fs::path dir = prepare_out(opts);
  const PolyTable table(fit_by_depth(samples));
  const auto pairs = training_samples(table);
  const TrainResult result = train(pairs, table, s.sim.loss_weights, s.train);
  save_model((dir / "pgnn_weights.json").string(), result.model);
  write_stream(dir / "loss_history.csv", [&](std::ostream& o) { write_loss_history(o, result.history); });

  out << "depth_m,v_opt_mps,v_pred_mps,t_traj_s\n";
  for (const TrainSample& p : pairs) {
    out << p.depth << ',' << p.v_opt << ',' << forward(result.model, p.depth) << ','
        << predict_flight_time(result.model, p.depth) << '\n';
  }
  out << "final loss: " << result.history.back().total << '\n';
  return 0;
}

int run_track_eval(const CommonOptions& opts, const std::string& events_path, const std::string& boxes_path,
                   double duration, std::ostream& out) {
  Settings s = load_settings(opts);
  if (events_path.empty() != boxes_path.empty()) throw UsageError("--events and --boxes must be given together");
  const fs::path dir = prepare_out(opts);
  CameraParams cam = s.sim.camera;
  if (opts.seed) cam.noise_seed = *opts.seed;
  std::vector<Event> events;
  std::vector<TimedBox> boxes;
  if (events_path.empty()) {
    const SyntheticStream stream = synthesize_stream(s.sim.gate, cam, duration, 1e-3, s.sim.lif.bin_width_us);
    events = stream.events;
    boxes = stream.truth;
    save_events((dir / "events.csv").string(), events);
    save_boxes((dir / "gt_boxes.csv").string(), boxes);
  } else {
    if (!fs::exists(events_path)) throw UsageError("event file not found: " + events_path);
    if (!fs::exists(boxes_path)) throw UsageError("box file not found: " + boxes_path);
    events = load_events(events_path);
    boxes = load_boxes(boxes_path);
  }
  const TrackEvaluation ev = evaluate_tracking(events, boxes, s.sim.lif, cam.width, cam.height);
  write_stream(dir / "track_eval.csv", [&](std::ostream& o) {
    o << "bin_start_us,spike_count,x_min,x_max,y_min,y_max,iou\n";
    for (const BinScore& b : ev.bins) {
      o << b.bin_start_us << ',' << b.spike_count << ',';
      if (b.box) {
        o << b.box->x_min << ',' << b.box->x_max << ',' << b.box->y_min << ',' << b.box->y_max << ',';
      } else {
        o << ",,,,";
      }
      if (b.iou) o << *b.iou;
      o << '\n';
    }
  });
  out << "metric,value\n"
      << "bins," << ev.bins.size() << '\n'
      << "scored_bins," << ev.scored_bins << '\n'
      << "spike_bin_fraction," << ev.spike_bin_fraction << '\n'
      << "mean_iou," << ev.mean_iou << '\n'
      << "peak_iou," << ev.peak_iou << '\n';
  return 0;
}

}  // namespace

int cli_main(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Event-camera gate navigation simulator"};
  app.require_subcommand(1);

  CommonOptions sim_opts;
  std::string sim_mode;
  std::optional<double> sim_depth;
  std::optional<double> sim_offset;
  auto* simulate = app.add_subcommand("simulate", "Run one closed-loop episode");
  add_common(simulate, sim_opts);
  simulate->add_option("--mode", sim_mode, "predictive or baseline");
  simulate->add_option("--depth", sim_depth, "Gate depth in metres");
  simulate->add_option("--offset", sim_offset, "Vertical start offset in metres");

  CommonOptions sweep_opts;
  bool no_plots = false;
  auto* sweep = app.add_subcommand("sweep", "Run the depth x offset x mode grid");
  add_common(sweep, sweep_opts);
  sweep->add_flag("--no-plots", no_plots, "Skip the SVG plots");

  CommonOptions train_opts;
  std::string dataset;
  auto* train_cmd = app.add_subcommand("train-pgnn", "Train the velocity network on an energy dataset");
  add_common(train_cmd, train_opts);
  train_cmd->add_option("--dataset", dataset, "Energy table (default <out>/energy_dataset.csv)");

  CommonOptions fit_opts;
  std::string depth_list = "2,3,4,5,6,7,8,9";
  int points = 32;
  auto* fit = app.add_subcommand("fit-energy", "Simulate flight energy and fit per-depth curves");
  add_common(fit, fit_opts);
  fit->add_option("--depths", depth_list, "Comma-separated depths in metres")->capture_default_str();
  fit->add_option("--points", points, "Cruise speeds per depth")->capture_default_str();

  CommonOptions track_opts;
  std::string events_path;
  std::string boxes_path;
  double duration = 1.0;
  auto* track = app.add_subcommand("track-eval", "Score SNN boxes against ground truth");
  add_common(track, track_opts);
  track->add_option("--events", events_path, "Event file (t_us,x,y,p)");
  track->add_option("--boxes", boxes_path, "Ground-truth boxes (t_us,x_min,x_max,y_min,y_max)");
  track->add_option("--duration", duration, "Synthetic stream length in seconds when no files are given")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n' << app.help();
    return 1;
  }

  try {
    if (*simulate) return run_simulate(sim_opts, sim_mode, sim_depth, sim_offset, out);
    if (*sweep) return run_sweep_cmd(sweep_opts, !no_plots, out);
    if (*train_cmd) return run_train(train_opts, dataset, out);
    if (*fit) return run_fit_energy(fit_opts, depth_list, points, out);
    if (*track) return run_track_eval(track_opts, events_path, boxes_path, duration, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const ConfigError& e) {
    // Bad configuration values are the caller's to fix, like a bad flag.
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

}  // namespace evnav
