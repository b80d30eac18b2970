#include "evnav/pgnn_io.hpp"

#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <sstream>

#include <nlohmann/json.hpp>

#include "evnav/errors.hpp"
#include "evnav/io.hpp"

namespace evnav {
namespace {

using nlohmann::json;

json parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
}

template <typename T>
T field(const json& j, const char* name) {
  if (!j.contains(name)) throw ConfigError(std::string("missing field '") + name + "'");
  try {
    return j.at(name).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad field '") + name + "': " + e.what());
  }
}

std::ostream& precise(std::ostream& out) { return out << std::setprecision(std::numeric_limits<double>::max_digits10); }

}  // namespace

std::string model_to_json(const MlpModel& model) {
  json doc;
  doc["dims"] = model.dims();
  json layers = json::array();
  for (const DenseLayer& layer : model.layers) {
    std::vector<double> w;
    w.reserve(static_cast<std::size_t>(layer.weight.size()));
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) w.push_back(layer.weight(r, c));
    }
    layers.push_back({{"weight", w}, {"bias", std::vector<double>(layer.bias.data(), layer.bias.data() + layer.bias.size())}});
  }
  doc["layers"] = layers;
  doc["d_max"] = model.d_max;
  doc["v_floor"] = model.v_floor;
  doc["v_ceil"] = model.v_ceil;
  doc["seed"] = model.seed;
  return doc.dump(1);
}

MlpModel model_from_json(const std::string& text) {
  const json doc = parse(text);
  const auto dims = field<std::vector<int>>(doc, "dims");
  if (dims.size() < 2) throw ConfigError("weights: need at least two layer dimensions");
  if (!doc.contains("layers")) throw ConfigError("missing field 'layers'");
  const json& layers = doc.at("layers");
  if (!layers.is_array() || layers.size() != dims.size() - 1)
    throw ConfigError("weights: layer count does not match dims");
  MlpModel model;
  model.d_max = field<double>(doc, "d_max");
  model.v_floor = field<double>(doc, "v_floor");
  model.v_ceil = field<double>(doc, "v_ceil");
  model.seed = field<std::uint64_t>(doc, "seed");
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const auto w = field<std::vector<double>>(layers[l], "weight");
    const auto b = field<std::vector<double>>(layers[l], "bias");
    const int rows = dims[l + 1];
    const int cols = dims[l];
    if (rows < 1 || cols < 1 || w.size() != static_cast<std::size_t>(rows) * cols ||
        b.size() != static_cast<std::size_t>(rows))
      throw ConfigError("weights: layer " + std::to_string(l) + " has the wrong size");
    DenseLayer layer{Eigen::MatrixXd(rows, cols), Eigen::VectorXd(rows)};
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) layer.weight(r, c) = w[static_cast<std::size_t>(r) * cols + c];
      layer.bias(r) = b[static_cast<std::size_t>(r)];
    }
    model.layers.push_back(std::move(layer));
  }
  try {
    model.validate();
  } catch (const DomainError& e) {
    throw ConfigError(std::string("weights: ") + e.what());
  }
  return model;
}

void save_model(const std::string& path, const MlpModel& model) { write_text_file(path, model_to_json(model) + "\n"); }

MlpModel load_model(const std::string& path) { return model_from_json(read_text_file(path)); }

void write_loss_history(std::ostream& out, const std::vector<LossBreakdown>& history) {
  precise(out) << "epoch,total,data,physics,energy\n";
  for (std::size_t k = 0; k < history.size(); ++k) {
    const LossBreakdown& h = history[k];
    out << k << ',' << h.total << ',' << h.data << ',' << h.physics << ',' << h.energy << '\n';
  }
}

void write_energy_table(std::ostream& out, const std::vector<EnergySample>& samples) {
  precise(out) << "depth_m,velocity_mps,energy_J\n";
  for (const EnergySample& s : samples) out << s.depth << ',' << s.velocity << ',' << s.energy << '\n';
}

std::vector<EnergySample> read_energy_table(std::istream& in) {
  std::vector<EnergySample> samples;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    if (line.compare(first, 7, "depth_m") == 0) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 3) throw ConfigError("energy table line " + std::to_string(line_no) + ": expected 3 fields");
    try {
      std::size_t used = 0;
      EnergySample s;
      s.depth = std::stod(f[0], &used);
      if (used != f[0].size()) throw std::invalid_argument(f[0]);
      s.velocity = std::stod(f[1], &used);
      if (used != f[1].size()) throw std::invalid_argument(f[1]);
      s.energy = std::stod(f[2], &used);
      if (used != f[2].size()) throw std::invalid_argument(f[2]);
      samples.push_back(s);
    } catch (const std::logic_error&) {
      throw ConfigError("energy table line " + std::to_string(line_no) + ": cannot parse number");
    }
  }
  return samples;
}

std::string polys_to_json(const std::vector<PolyCoeffs>& polys) {
  json arr = json::array();
  for (const PolyCoeffs& p : polys) {
    const OptimalVelocity opt = optimal_velocity(p);
    arr.push_back({{"depth_m", p.depth},
                   {"v_min", p.v_min},
                   {"v_max", p.v_max},
                   {"coefficients", std::vector<double>(p.c.begin(), p.c.end())},
                   {"rms_residual_J", p.rms_residual},
                   {"v_opt_mps", opt.velocity},
                   {"boundary", opt.boundary}});
  }
  return arr.dump(1);
}

std::vector<PolyCoeffs> polys_from_json(const std::string& text) {
  const json doc = parse(text);
  if (!doc.is_array()) throw ConfigError("energy fits: expected an array");
  std::vector<PolyCoeffs> polys;
  for (const json& entry : doc) {
    PolyCoeffs p;
    p.depth = field<double>(entry, "depth_m");
    p.v_min = field<double>(entry, "v_min");
    p.v_max = field<double>(entry, "v_max");
    const auto c = field<std::vector<double>>(entry, "coefficients");
    if (c.size() != 6) throw ConfigError("energy fits: need exactly 6 coefficients");
    if (!(p.v_min < p.v_max)) throw ConfigError("energy fits: v_min must be below v_max");
    std::copy(c.begin(), c.end(), p.c.begin());
    if (entry.contains("rms_residual_J")) p.rms_residual = field<double>(entry, "rms_residual_J");
    polys.push_back(p);
  }
  return polys;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path);
}

}  // namespace evnav
