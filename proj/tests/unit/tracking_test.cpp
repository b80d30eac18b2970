#include <gtest/gtest.h>

#include "evnav/errors.hpp"
#include "evnav/tracking.hpp"

namespace evnav {
namespace {

TEST(SynthesizeStream, StaticGateIsSilent) {
  SceneGate gate;
  gate.lateral_speed = 0.0;
  const auto s = synthesize_stream(gate, CameraParams{}, 0.1, 0.001, 10'000);
  EXPECT_TRUE(s.events.empty());
  EXPECT_EQ(s.truth.size(), 10u);
}

TEST(SynthesizeStream, TruthFollowsTheGate) {
  SceneGate gate;
  gate.lateral_speed = 2.0;
  const CameraParams cam;
  const auto s = synthesize_stream(gate, cam, 0.2, 0.001, 10'000);
  ASSERT_EQ(s.truth.size(), 20u);
  // Moving right in the world moves right in the image.
  EXPECT_GT(s.truth.back().box.x_min, s.truth.front().box.x_min);
  for (std::size_t i = 0; i < s.truth.size(); ++i) EXPECT_EQ(s.truth[i].t_us, static_cast<std::int64_t>(i) * 10'000);
}

TEST(SynthesizeStream, RejectsBadArguments) {
  EXPECT_THROW(synthesize_stream(SceneGate{}, CameraParams{}, 0.0, 0.001, 10'000), DomainError);
  EXPECT_THROW(synthesize_stream(SceneGate{}, CameraParams{}, 0.1, 0.0, 10'000), DomainError);
  EXPECT_THROW(synthesize_stream(SceneGate{}, CameraParams{}, 0.1, 0.001, 0), DomainError);
}

TEST(EvaluateTracking, MissedBinsScoreZero) {
  const std::vector<TimedBox> truth{{0, {1, 3, 1, 3}}, {10'000, {1, 3, 1, 3}}};
  const auto ev = evaluate_tracking({}, truth, LifConfig{}, 8, 8);
  EXPECT_EQ(ev.scored_bins, 2);
  EXPECT_EQ(ev.mean_iou, 0.0);
  EXPECT_EQ(ev.spike_bin_fraction, 0.0);
}

TEST(EvaluateTracking, PerfectDetectionScoresOne) {
  LifConfig lif;
  lif.beta = 0.0;
  lif.min_spike_pixels = 1;
  std::vector<Event> ev;
  for (int k = 0; k < 20; ++k) ev.push_back({100 + k, 4, 4, 1});
  // 20 events at one pixel: every neighbour sees 20/9 >= 1.75.
  const std::vector<TimedBox> truth{{0, {3, 5, 3, 5}}};
  const auto result = evaluate_tracking(ev, truth, lif, 10, 10);
  ASSERT_EQ(result.bins.size(), 1u);
  EXPECT_DOUBLE_EQ(result.mean_iou, 1.0);
  EXPECT_DOUBLE_EQ(result.peak_iou, 1.0);
  EXPECT_DOUBLE_EQ(result.spike_bin_fraction, 1.0);
}

TEST(EvaluateTracking, RejectsUnsortedEvents) {
  const std::vector<Event> ev{{5, 0, 0, 1}, {4, 0, 0, 1}};
  EXPECT_THROW(evaluate_tracking(ev, {}, LifConfig{}, 4, 4), DomainError);
}

TEST(EvaluateTracking, MeanIouDeclinesWithDepth) {
  LifConfig lif;
  double previous = 1.0;
  for (double depth : {2.0, 4.0, 6.0}) {
    SceneGate gate;
    gate.depth = depth;
    const auto s = synthesize_stream(gate, CameraParams{}, 0.3, 0.001, lif.bin_width_us);
    const auto ev = evaluate_tracking(s.events, s.truth, lif, 240, 180);
    EXPECT_LE(ev.mean_iou, previous + 1e-9) << "depth " << depth;
    previous = ev.mean_iou;
  }
}

}  // namespace
}  // namespace evnav
