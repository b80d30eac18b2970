#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "evnav/energy_model.hpp"

namespace evnav {

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;
};

/// Scalar-in, scalar-out perceptron: normalised depth d / d_max enters, tanh
/// hidden layers follow, and the last affine output z maps onto the speed range
/// as v_floor + (v_ceil - v_floor) * sigmoid(z).
struct MlpModel {
  std::vector<DenseLayer> layers;
  double d_max = 10.0;
  double v_floor = 0.2;
  double v_ceil = 8.0;
  std::uint64_t seed = 0;

  /// Weights and biases drawn from U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
  static MlpModel initialize(const std::vector<int>& hidden, std::uint64_t seed, double d_max = 10.0,
                             double v_floor = 0.2, double v_ceil = 8.0);

  /// Layer widths including the scalar input and output, e.g. {1, 64, 128, 128, 1}.
  std::vector<int> dims() const;
  Eigen::Index parameter_count() const;
  /// Flat parameter vector: per layer, row-major weights then bias.
  Eigen::VectorXd parameters() const;
  void set_parameters(const Eigen::VectorXd& flat);
  /// Throws DomainError on inconsistent shapes, non-finite values or a bad range.
  void validate() const;
};

const std::vector<int>& default_hidden_layers();

/// v_pred for one depth. Throws DomainError when d <= 0.
double forward(const MlpModel& model, double depth);

/// t_traj = d / v_pred, 0 for d = 0. Throws DomainError for d < 0.
double predict_flight_time(const MlpModel& model, double depth);

double loss_data(const std::vector<double>& preds, const std::vector<double>& targets);

struct TrainSample {
  double depth = 0.0;
  double v_opt = 0.0;
};

/// Fitted energy curves indexed by depth, with nearest-depth lookup.
class PolyTable {
 public:
  PolyTable() = default;
  explicit PolyTable(std::vector<PolyCoeffs> polys);

  /// All lookups throw ConfigError when the table is empty.
  std::size_t nearest_index(double depth) const;
  const PolyCoeffs& nearest(double depth) const;
  double nearest_min_energy(double depth) const;
  double nearest_v_opt(double depth) const;

  const std::vector<PolyCoeffs>& entries() const noexcept { return polys_; }
  bool empty() const noexcept { return polys_.empty(); }

 private:
  std::vector<PolyCoeffs> polys_;  // sorted by depth
  std::vector<double> min_energy_;
  std::vector<double> v_opt_;
};

/// (depth, v_opt) pairs for every curve in the table.
std::vector<TrainSample> training_samples(const PolyTable& polys);

enum class PhysicsVariant { zero_derivative, dynamics_consistency };

std::string to_string(PhysicsVariant variant);
/// Accepts "zero_derivative" or "dynamics_consistency"; throws ConfigError otherwise.
PhysicsVariant physics_variant_from_string(const std::string& name);

struct PhysicsSettings {
  PhysicsVariant variant = PhysicsVariant::zero_derivative;
  double a_max = 4.0;  // dynamics-consistency only; infinity gives pure kinematics
};

/// Distance short of the target after flying for t = d / v from rest,
/// accelerating at a_max up to v and then cruising.
double dynamics_gap(double velocity, double depth, double a_max);

/// Per-sample physics residual. Zero-derivative: |dE/du| at the predicted speed
/// (u clamped to [0, 1]) over the curve's minimum energy. Dynamics: dynamics_gap.
double physics_residual(double velocity, double depth, const PolyCoeffs& poly, const PhysicsSettings& physics);

/// E(u) / E(u_opt) on the fitted curve, u clamped to [0, 1].
double energy_ratio(double velocity, const PolyCoeffs& poly);

struct LossWeights {
  double lambda_physics = 0.1;
  double lambda_energy = 0.1;
};

struct LossBreakdown {
  double data = 0.0;
  double physics = 0.0;
  double energy = 0.0;
  double total = 0.0;
};

double loss_physics(const MlpModel& model, const std::vector<TrainSample>& samples, const PolyTable& polys,
                    const PhysicsSettings& physics);
double loss_energy(const MlpModel& model, const std::vector<TrainSample>& samples, const PolyTable& polys);
LossBreakdown total_loss(const MlpModel& model, const std::vector<TrainSample>& samples, const PolyTable& polys,
                         const LossWeights& weights, const PhysicsSettings& physics);

struct LossGradient {
  LossBreakdown loss;
  Eigen::VectorXd gradient;  // same layout as MlpModel::parameters()
};

/// Reverse-mode gradient of total_loss with respect to every parameter.
LossGradient loss_gradient(const MlpModel& model, const std::vector<TrainSample>& samples, const PolyTable& polys,
                           const LossWeights& weights, const PhysicsSettings& physics);

struct TrainConfig {
  double learning_rate = 1e-3;
  int epochs = 5000;
  int batch_size = 0;  // 0 trains on the full batch
  std::uint64_t seed = 7;
  double grad_clip = 10.0;
  PhysicsSettings physics;
  std::vector<int> hidden = default_hidden_layers();
  double d_max = 10.0;
  double v_floor = 0.2;
  double v_ceil = 8.0;

  void validate() const;
};

struct TrainResult {
  MlpModel model;
  std::vector<LossBreakdown> history;  // full-dataset loss before each epoch's update
};

/// AMSGrad on total_loss. Requires four distinct depths whenever a physics or
/// energy weight is non-zero. Throws TrainingError when the loss stops being finite.
TrainResult train(MlpModel model, const std::vector<TrainSample>& samples, const PolyTable& polys,
                  const LossWeights& weights, const TrainConfig& config);

/// Fresh model seeded from config.seed, then train().
TrainResult train(const std::vector<TrainSample>& samples, const PolyTable& polys, const LossWeights& weights,
                  const TrainConfig& config);

}  // namespace evnav
