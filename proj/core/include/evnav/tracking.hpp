#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "evnav/event_camera.hpp"
#include "evnav/io.hpp"
#include "evnav/snn_detector.hpp"

namespace evnav {

struct SyntheticStream {
  std::vector<Event> events;
  std::vector<TimedBox> truth;  // one box per bin where the gate is visible, taken at mid-bin
};

/// Gate seen from a camera at the origin looking down +x. Frames are rendered
/// every `step_s` seconds over [0, duration_s]; the first frame seeds the
/// reference, so a static scene yields no events.
SyntheticStream synthesize_stream(const SceneGate& gate, const CameraParams& camera, double duration_s,
                                  double step_s, std::int64_t bin_width_us);

struct BinScore {
  std::int64_t bin_start_us = 0;
  int spike_count = 0;
  std::optional<BoundingBox> box;
  std::optional<double> iou;  // only for bins with a ground-truth box
};

struct TrackEvaluation {
  std::vector<BinScore> bins;
  double mean_iou = 0.0;        // over bins with ground truth; a missed detection scores 0
  double peak_iou = 0.0;
  double spike_bin_fraction = 0.0;
  int scored_bins = 0;
};

/// Runs a fresh SnnDetector over consecutive bins from t = 0 up to the last
/// event or ground-truth box, whichever is later.
TrackEvaluation evaluate_tracking(const std::vector<Event>& events, const std::vector<TimedBox>& truth,
                                  const LifConfig& lif, int width, int height);

}  // namespace evnav
