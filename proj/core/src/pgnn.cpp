#include "evnav/pgnn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>

#include "evnav/errors.hpp"

namespace evnav {
namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

struct Trace {
  std::vector<Eigen::MatrixXd> activations;  // activations[0] is the input row
  Eigen::RowVectorXd sig;                     // sigmoid(z) of the output
  Eigen::RowVectorXd v;
};

Trace run(const MlpModel& model, const std::vector<double>& depths) {
  const auto n = static_cast<Eigen::Index>(depths.size());
  Trace tr;
  Eigen::MatrixXd a(1, n);
  for (Eigen::Index k = 0; k < n; ++k) a(0, k) = depths[k] / model.d_max;
  tr.activations.push_back(a);
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const DenseLayer& layer = model.layers[l];
    Eigen::MatrixXd z = layer.weight * tr.activations.back();
    z.colwise() += layer.bias;
    if (l + 1 < model.layers.size()) z = z.array().tanh().matrix();
    tr.activations.push_back(std::move(z));
  }
  const Eigen::MatrixXd& z = tr.activations.back();
  tr.sig.resize(n);
  tr.v.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    tr.sig(k) = sigmoid(z(0, k));
    tr.v(k) = model.v_floor + (model.v_ceil - model.v_floor) * tr.sig(k);
  }
  return tr;
}

struct Pointwise {
  double value = 0.0;
  double slope = 0.0;  // derivative with respect to the velocity
};

bool inside_fit(const PolyCoeffs& poly, double velocity) {
  const double u = poly.to_u(velocity);
  return u > 0.0 && u < 1.0;
}

double clamped_u(const PolyCoeffs& poly, double velocity) { return std::clamp(poly.to_u(velocity), 0.0, 1.0); }

// Pseudo-Huber smoothing of |x|: zero at x = 0, |x| - delta far from it. The
// plain absolute value makes the optimiser chatter across the kink.
constexpr double kHuberDelta = 1e-3;

Pointwise zero_derivative_term(double velocity, const PolyCoeffs& poly, double e_min) {
  const double u = clamped_u(poly, velocity);
  const double g = poly.denergy_du(u) / e_min;
  const double root = std::sqrt(g * g + kHuberDelta * kHuberDelta);
  Pointwise p{root - kHuberDelta, 0.0};
  if (inside_fit(poly, velocity)) {
    p.slope = (g / root) * poly.d2energy_du2(u) / (e_min * (poly.v_max - poly.v_min));
  }
  return p;
}

Pointwise dynamics_term(double velocity, double depth, double a_max) {
  if (std::isinf(a_max)) return {0.0, 0.0};
  if (depth * a_max >= velocity * velocity) return {velocity * velocity / (2.0 * a_max), velocity / a_max};
  return {depth - a_max * depth * depth / (2.0 * velocity * velocity),
          a_max * depth * depth / (velocity * velocity * velocity)};
}

Pointwise energy_term(double velocity, const PolyCoeffs& poly, double e_min) {
  const double u = clamped_u(poly, velocity);
  Pointwise p{poly.energy_u(u) / e_min, 0.0};
  if (inside_fit(poly, velocity)) p.slope = poly.denergy_du(u) / (e_min * (poly.v_max - poly.v_min));
  return p;
}

Pointwise physics_term(double velocity, double depth, const PolyCoeffs& poly, double e_min,
                       const PhysicsSettings& physics) {
  if (physics.variant == PhysicsVariant::zero_derivative) return zero_derivative_term(velocity, poly, e_min);
  return dynamics_term(velocity, depth, physics.a_max);
}

std::vector<double> depths_of(const std::vector<TrainSample>& samples) {
  std::vector<double> d;
  d.reserve(samples.size());
  for (const TrainSample& s : samples) d.push_back(s.depth);
  return d;
}

struct Evaluated {
  LossBreakdown loss;
  Eigen::RowVectorXd dloss_dv;
};

Evaluated evaluate(const Eigen::RowVectorXd& v, const std::vector<TrainSample>& samples, const PolyTable& polys,
                   const LossWeights& weights, const PhysicsSettings& physics) {
  if (samples.empty()) throw DomainError("loss: no samples");
  const bool needs_curves = weights.lambda_energy != 0.0 ||
                            (weights.lambda_physics != 0.0 && physics.variant == PhysicsVariant::zero_derivative);
  if (needs_curves && polys.empty()) throw ConfigError("loss: no fitted energy curves available");
  const double n = static_cast<double>(samples.size());
  Evaluated ev;
  ev.dloss_dv = Eigen::RowVectorXd::Zero(v.size());
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const double vk = v(static_cast<Eigen::Index>(k));
    const double diff = vk - samples[k].v_opt;
    ev.loss.data += diff * diff / n;
    double slope = 2.0 * diff / n;
    if (weights.lambda_physics != 0.0 || weights.lambda_energy != 0.0) {
      const PolyCoeffs* poly = polys.empty() ? nullptr : &polys.nearest(samples[k].depth);
      const double e_min = poly ? polys.nearest_min_energy(samples[k].depth) : 1.0;
      if (weights.lambda_physics != 0.0) {
        const Pointwise p = physics.variant == PhysicsVariant::zero_derivative
                                ? zero_derivative_term(vk, *poly, e_min)
                                : dynamics_term(vk, samples[k].depth, physics.a_max);
        ev.loss.physics += p.value / n;
        slope += weights.lambda_physics * p.slope / n;
      }
      if (weights.lambda_energy != 0.0) {
        const Pointwise e = energy_term(vk, *poly, e_min);
        ev.loss.energy += e.value / n;
        slope += weights.lambda_energy * e.slope / n;
      }
    }
    ev.dloss_dv(static_cast<Eigen::Index>(k)) = slope;
  }
  ev.loss.total = ev.loss.data + weights.lambda_physics * ev.loss.physics + weights.lambda_energy * ev.loss.energy;
  return ev;
}

Eigen::VectorXd backpropagate(const MlpModel& model, const Trace& tr, const Eigen::RowVectorXd& dloss_dv) {
  Eigen::VectorXd grad(model.parameter_count());
  std::vector<Eigen::Index> offsets;
  Eigen::Index offset = 0;
  for (const DenseLayer& layer : model.layers) {
    offsets.push_back(offset);
    offset += layer.weight.size() + layer.bias.size();
  }

  const double range = model.v_ceil - model.v_floor;
  Eigen::MatrixXd delta = (dloss_dv.array() * range * tr.sig.array() * (1.0 - tr.sig.array())).matrix();
  for (std::size_t l = model.layers.size(); l-- > 0;) {
    const DenseLayer& layer = model.layers[l];
    const Eigen::MatrixXd& input = tr.activations[l];
    const Eigen::MatrixXd dw = delta * input.transpose();
    Eigen::Index at = offsets[l];
    for (Eigen::Index r = 0; r < dw.rows(); ++r) {
      for (Eigen::Index c = 0; c < dw.cols(); ++c) grad(at++) = dw(r, c);
    }
    grad.segment(at, layer.bias.size()) = delta.rowwise().sum();
    if (l == 0) break;
    Eigen::MatrixXd back = layer.weight.transpose() * delta;
    delta = (back.array() * (1.0 - input.array().square())).matrix();
  }
  return grad;
}

}  // namespace

const std::vector<int>& default_hidden_layers() {
  static const std::vector<int> hidden{64, 128, 128};
  return hidden;
}

MlpModel MlpModel::initialize(const std::vector<int>& hidden, std::uint64_t seed, double d_max, double v_floor,
                              double v_ceil) {
  MlpModel model;
  model.d_max = d_max;
  model.v_floor = v_floor;
  model.v_ceil = v_ceil;
  model.seed = seed;
  std::mt19937_64 rng(seed);
  std::vector<int> dims{1};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(1);
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    if (dims[l + 1] < 1) throw DomainError("mlp: layer widths must be positive");
    const double bound = 1.0 / std::sqrt(static_cast<double>(dims[l]));
    std::uniform_real_distribution<double> draw(-bound, bound);
    DenseLayer layer{Eigen::MatrixXd(dims[l + 1], dims[l]), Eigen::VectorXd(dims[l + 1])};
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) layer.weight(r, c) = draw(rng);
    }
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) layer.bias(r) = draw(rng);
    model.layers.push_back(std::move(layer));
  }
  model.validate();
  return model;
}

std::vector<int> MlpModel::dims() const {
  std::vector<int> d;
  if (layers.empty()) return d;
  d.push_back(static_cast<int>(layers.front().weight.cols()));
  for (const DenseLayer& layer : layers) d.push_back(static_cast<int>(layer.weight.rows()));
  return d;
}

Eigen::Index MlpModel::parameter_count() const {
  Eigen::Index n = 0;
  for (const DenseLayer& layer : layers) n += layer.weight.size() + layer.bias.size();
  return n;
}

Eigen::VectorXd MlpModel::parameters() const {
  Eigen::VectorXd flat(parameter_count());
  Eigen::Index at = 0;
  for (const DenseLayer& layer : layers) {
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) flat(at++) = layer.weight(r, c);
    }
    flat.segment(at, layer.bias.size()) = layer.bias;
    at += layer.bias.size();
  }
  return flat;
}

void MlpModel::set_parameters(const Eigen::VectorXd& flat) {
  if (flat.size() != parameter_count()) throw DomainError("mlp: parameter vector has the wrong length");
  Eigen::Index at = 0;
  for (DenseLayer& layer : layers) {
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) layer.weight(r, c) = flat(at++);
    }
    layer.bias = flat.segment(at, layer.bias.size());
    at += layer.bias.size();
  }
}

void MlpModel::validate() const {
  if (layers.empty()) throw DomainError("mlp: no layers");
  if (layers.front().weight.cols() != 1 || layers.back().weight.rows() != 1)
    throw DomainError("mlp: input and output must be scalar");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const DenseLayer& layer = layers[l];
    if (layer.bias.size() != layer.weight.rows()) throw DomainError("mlp: bias length differs from layer width");
    if (l > 0 && layer.weight.cols() != layers[l - 1].weight.rows())
      throw DomainError("mlp: consecutive layer shapes disagree");
    if (!layer.weight.allFinite() || !layer.bias.allFinite()) throw DomainError("mlp: non-finite parameters");
  }
  if (!(d_max > 0.0)) throw DomainError("mlp: d_max must be positive");
  if (!(v_floor > 0.0 && v_ceil > v_floor)) throw DomainError("mlp: need 0 < v_floor < v_ceil");
}

double forward(const MlpModel& model, double depth) {
  if (!(depth > 0.0)) throw DomainError("forward: depth must be positive");
  return run(model, {depth}).v(0);
}

double predict_flight_time(const MlpModel& model, double depth) {
  if (depth < 0.0) throw DomainError("predict_flight_time: depth must be non-negative");
  if (depth == 0.0) return 0.0;
  return depth / forward(model, depth);
}

double loss_data(const std::vector<double>& preds, const std::vector<double>& targets) {
  if (preds.empty()) throw DomainError("loss_data: empty input");
  if (preds.size() != targets.size()) throw DomainError("loss_data: length mismatch");
  double sum = 0.0;
  for (std::size_t k = 0; k < preds.size(); ++k) sum += (preds[k] - targets[k]) * (preds[k] - targets[k]);
  return sum / static_cast<double>(preds.size());
}

PolyTable::PolyTable(std::vector<PolyCoeffs> polys) : polys_(std::move(polys)) {
  std::sort(polys_.begin(), polys_.end(), [](const PolyCoeffs& a, const PolyCoeffs& b) { return a.depth < b.depth; });
  for (const PolyCoeffs& p : polys_) {
    const OptimalVelocity opt = optimal_velocity(p);
    if (!(opt.energy > 0.0)) throw ConfigError("energy curve at depth " + std::to_string(p.depth) + " is not positive");
    min_energy_.push_back(opt.energy);
    v_opt_.push_back(opt.velocity);
  }
}

std::size_t PolyTable::nearest_index(double depth) const {
  if (polys_.empty()) throw ConfigError("no fitted energy curve available for depth " + std::to_string(depth));
  std::size_t best = 0;
  for (std::size_t k = 1; k < polys_.size(); ++k) {
    if (std::abs(polys_[k].depth - depth) < std::abs(polys_[best].depth - depth)) best = k;
  }
  return best;
}

const PolyCoeffs& PolyTable::nearest(double depth) const { return polys_[nearest_index(depth)]; }

double PolyTable::nearest_min_energy(double depth) const { return min_energy_[nearest_index(depth)]; }

double PolyTable::nearest_v_opt(double depth) const { return v_opt_[nearest_index(depth)]; }

std::vector<TrainSample> training_samples(const PolyTable& polys) {
  std::vector<TrainSample> out;
  for (const PolyCoeffs& p : polys.entries()) out.push_back({p.depth, polys.nearest_v_opt(p.depth)});
  return out;
}

std::string to_string(PhysicsVariant variant) {
  return variant == PhysicsVariant::zero_derivative ? "zero_derivative" : "dynamics_consistency";
}

PhysicsVariant physics_variant_from_string(const std::string& name) {
  if (name == "zero_derivative") return PhysicsVariant::zero_derivative;
  if (name == "dynamics_consistency") return PhysicsVariant::dynamics_consistency;
  throw ConfigError("unknown physics variant '" + name + "'");
}

double dynamics_gap(double velocity, double depth, double a_max) {
  if (!(velocity > 0.0)) throw DomainError("dynamics_gap: velocity must be positive");
  if (depth < 0.0) throw DomainError("dynamics_gap: depth must be non-negative");
  return dynamics_term(velocity, depth, a_max).value;
}

double physics_residual(double velocity, double depth, const PolyCoeffs& poly, const PhysicsSettings& physics) {
  return physics_term(velocity, depth, poly, optimal_velocity(poly).energy, physics).value;
}

double energy_ratio(double velocity, const PolyCoeffs& poly) {
  return energy_term(velocity, poly, optimal_velocity(poly).energy).value;
}

double loss_physics(const MlpModel& model, const std::vector<TrainSample>& samples, const PolyTable& polys,
                    const PhysicsSettings& physics) {
  const Trace tr = run(model, depths_of(samples));
  return evaluate(tr.v, samples, polys, {1.0, 0.0}, physics).loss.physics;
}

double loss_energy(const MlpModel& model, const std::vector<TrainSample>& samples, const PolyTable& polys) {
  const Trace tr = run(model, depths_of(samples));
  return evaluate(tr.v, samples, polys, {0.0, 1.0}, {}).loss.energy;
}

LossBreakdown total_loss(const MlpModel& model, const std::vector<TrainSample>& samples, const PolyTable& polys,
                         const LossWeights& weights, const PhysicsSettings& physics) {
  const Trace tr = run(model, depths_of(samples));
  return evaluate(tr.v, samples, polys, weights, physics).loss;
}

LossGradient loss_gradient(const MlpModel& model, const std::vector<TrainSample>& samples, const PolyTable& polys,
                           const LossWeights& weights, const PhysicsSettings& physics) {
  const Trace tr = run(model, depths_of(samples));
  const Evaluated ev = evaluate(tr.v, samples, polys, weights, physics);
  return {ev.loss, backpropagate(model, tr, ev.dloss_dv)};
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw DomainError("train: learning rate must be positive");
  if (epochs < 1) throw DomainError("train: need at least one epoch");
  if (batch_size < 0) throw DomainError("train: batch size must be non-negative");
  if (!(grad_clip > 0.0)) throw DomainError("train: gradient clip must be positive");
}

TrainResult train(MlpModel model, const std::vector<TrainSample>& samples, const PolyTable& polys,
                  const LossWeights& weights, const TrainConfig& config) {
  config.validate();
  model.validate();
  if (samples.empty()) throw DomainError("train: no samples");
  if (weights.lambda_physics < 0.0 || weights.lambda_energy < 0.0)
    throw DomainError("train: loss weights must be non-negative");
  if (weights.lambda_physics > 0.0 || weights.lambda_energy > 0.0) {
    std::set<double> depths;
    for (const TrainSample& s : samples) depths.insert(s.depth);
    if (depths.size() < 4) throw DomainError("train: physics-guided training needs at least 4 distinct depths");
  }

  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEps = 1e-8;
  Eigen::VectorXd theta = model.parameters();
  Eigen::VectorXd m = Eigen::VectorXd::Zero(theta.size());
  Eigen::VectorXd s = Eigen::VectorXd::Zero(theta.size());
  Eigen::VectorXd s_max = Eigen::VectorXd::Zero(theta.size());
  const bool full_batch = config.batch_size == 0 || config.batch_size >= static_cast<int>(samples.size());
  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);

  TrainResult result;
  result.history.reserve(static_cast<std::size_t>(config.epochs));
  long step = 0;
  const auto adam_step = [&](Eigen::VectorXd grad) {
    const double norm = grad.norm();
    if (norm > config.grad_clip) grad *= config.grad_clip / norm;
    ++step;
    m = kBeta1 * m + (1.0 - kBeta1) * grad;
    s = kBeta2 * s + (1.0 - kBeta2) * grad.cwiseProduct(grad);
    const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
    const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));
    // AMSGrad: the running maximum of the second moment keeps per-parameter
    // steps from growing once gradients shrink, which plain Adam does not.
    s_max = s_max.cwiseMax(s / c2);
    theta.array() -= config.learning_rate * (m.array() / c1) / (s_max.array().sqrt() + kEps);
    model.set_parameters(theta);
  };

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    if (full_batch) {
      LossGradient lg = loss_gradient(model, samples, polys, weights, config.physics);
      if (!std::isfinite(lg.loss.total) || !lg.gradient.allFinite())
        throw TrainingError("training diverged at epoch " + std::to_string(epoch), epoch);
      result.history.push_back(lg.loss);
      adam_step(std::move(lg.gradient));
      continue;
    }
    const LossBreakdown loss = total_loss(model, samples, polys, weights, config.physics);
    if (!std::isfinite(loss.total))
      throw TrainingError("training diverged at epoch " + std::to_string(epoch), epoch);
    result.history.push_back(loss);
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size)) {
      std::vector<TrainSample> batch;
      for (std::size_t k = start; k < std::min(order.size(), start + config.batch_size); ++k)
        batch.push_back(samples[order[k]]);
      LossGradient lg = loss_gradient(model, batch, polys, weights, config.physics);
      if (!lg.gradient.allFinite())
        throw TrainingError("training diverged at epoch " + std::to_string(epoch), epoch);
      adam_step(std::move(lg.gradient));
    }
  }
  if (!model.parameters().allFinite())
    throw TrainingError("training produced non-finite weights", config.epochs);
  result.model = std::move(model);
  return result;
}

TrainResult train(const std::vector<TrainSample>& samples, const PolyTable& polys, const LossWeights& weights,
                  const TrainConfig& config) {
  MlpModel model = MlpModel::initialize(config.hidden, config.seed, config.d_max, config.v_floor, config.v_ceil);
  return train(std::move(model), samples, polys, weights, config);
}

}  // namespace evnav
