#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "evnav/energy_model.hpp"
#include "evnav/pgnn.hpp"

namespace evnav {

/// Weights document: {"dims": [...], "layers": [{"weight": [row-major], "bias": [...]}],
/// "d_max", "v_floor", "v_ceil", "seed"}. Doubles are written with round-trip precision.
std::string model_to_json(const MlpModel& model);
/// Throws ConfigError on missing fields or inconsistent shapes.
MlpModel model_from_json(const std::string& text);
void save_model(const std::string& path, const MlpModel& model);
MlpModel load_model(const std::string& path);

/// `epoch,total,data,physics,energy`
void write_loss_history(std::ostream& out, const std::vector<LossBreakdown>& history);

/// `depth_m,velocity_mps,energy_J`
void write_energy_table(std::ostream& out, const std::vector<EnergySample>& samples);
std::vector<EnergySample> read_energy_table(std::istream& in);

/// Per-depth fits: [{"depth_m", "v_min", "v_max", "coefficients": [c0..c5],
/// "rms_residual_J", "v_opt_mps", "boundary"}].
std::string polys_to_json(const std::vector<PolyCoeffs>& polys);
std::vector<PolyCoeffs> polys_from_json(const std::string& text);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace evnav
