#include <benchmark/benchmark.h>

#include "evnav/energy_model.hpp"
#include "evnav/pgnn.hpp"
#include "evnav/planner.hpp"

namespace evnav {
namespace {

const PolyTable& table() {
  static const PolyTable t = [] {
    std::vector<PolyCoeffs> polys;
    for (int d = 2; d <= 9; ++d) polys.push_back(fit_energy_poly(generate_feasible_dataset({double(d)}, {}, {})));
    return PolyTable(polys);
  }();
  return t;
}

void BM_PgnnForward(benchmark::State& state) {
  const MlpModel model = MlpModel::initialize(default_hidden_layers(), 1);
  double d = 2.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(forward(model, d));
    d = d < 9.0 ? d + 0.01 : 2.0;
  }
}
BENCHMARK(BM_PgnnForward);

void BM_PgnnTrainEpoch(benchmark::State& state) {
  const auto samples = training_samples(table());
  TrainConfig cfg;
  cfg.epochs = 1;
  const MlpModel model = MlpModel::initialize(cfg.hidden, cfg.seed);
  for (auto _ : state) benchmark::DoNotOptimize(train(model, samples, table(), {}, cfg).model.layers.data());
}
BENCHMARK(BM_PgnnTrainEpoch)->Unit(benchmark::kMicrosecond);

void BM_FlightEnergy(benchmark::State& state) {
  const DroneDynamics dyn;
  const MotorParams mot;
  const double depth = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(simulate_flight_energy(depth, 2.0, dyn, mot));
}
BENCHMARK(BM_FlightEnergy)->Arg(2)->Arg(9)->Unit(benchmark::kMicrosecond);

void BM_FitAndOptimise(benchmark::State& state) {
  const auto samples = generate_feasible_dataset({5.0}, {}, {});
  for (auto _ : state) benchmark::DoNotOptimize(optimal_velocity(fit_energy_poly(samples)).velocity);
}
BENCHMARK(BM_FitAndOptimise)->Unit(benchmark::kMicrosecond);

void BM_PredictGate(benchmark::State& state) {
  double t = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(predict_gate_position(0.3, 2.0, t, 1.5).y_star);
    t = t < 2.0 ? t + 1e-3 : 0.0;
  }
}
BENCHMARK(BM_PredictGate);

}  // namespace
}  // namespace evnav
