#include "evnav/tracking.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "evnav/errors.hpp"

namespace evnav {

SyntheticStream synthesize_stream(const SceneGate& gate, const CameraParams& camera, double duration_s,
                                  double step_s, std::int64_t bin_width_us) {
  if (!(duration_s > 0.0 && step_s > 0.0)) throw DomainError("synthesize_stream: duration and step must be positive");
  if (bin_width_us <= 0) throw DomainError("synthesize_stream: bin width must be positive");
  const auto step_us = static_cast<std::int64_t>(std::llround(step_s * 1e6));
  const auto end_us = static_cast<std::int64_t>(std::llround(duration_s * 1e6));
  if (step_us <= 0) throw DomainError("synthesize_stream: step below one microsecond");

  SyntheticStream out;
  CameraModel model(camera);
  model.reset_reference(render_log_intensity(gate, camera, 0.0));
  for (std::int64_t t = 0; t < end_us; t += step_us) {
    const std::int64_t t1 = std::min(t + step_us, end_us);
    const auto batch = model.generate_events(render_log_intensity(gate, camera, t1 * 1e-6), t, t1);
    out.events.insert(out.events.end(), batch.begin(), batch.end());
  }
  for (std::int64_t bin = 0; bin + bin_width_us <= end_us; bin += bin_width_us) {
    const double mid = (static_cast<double>(bin) + 0.5 * static_cast<double>(bin_width_us)) * 1e-6;
    if (const auto box = mask_bbox(render_coverage(gate, camera, CameraPose{}, mid))) out.truth.push_back({bin, *box});
  }
  return out;
}

TrackEvaluation evaluate_tracking(const std::vector<Event>& events, const std::vector<TimedBox>& truth,
                                  const LifConfig& lif, int width, int height) {
  std::map<std::int64_t, BoundingBox> by_bin;
  for (const TimedBox& b : truth) by_bin[b.t_us] = b.box;

  std::int64_t last = events.empty() ? 0 : events.back().t;
  if (!by_bin.empty()) last = std::max(last, by_bin.rbegin()->first);
  for (std::size_t k = 1; k < events.size(); ++k) {
    if (events[k].t < events[k - 1].t) throw DomainError("evaluate_tracking: events are not sorted by time");
  }

  SnnDetector detector(lif, width, height);
  TrackEvaluation ev;
  std::size_t begin = 0;
  int spiking = 0;
  double iou_sum = 0.0;
  for (std::int64_t bin = 0; bin <= last; bin += lif.bin_width_us) {
    const std::int64_t end = bin + lif.bin_width_us;
    std::size_t stop = begin;
    while (stop < events.size() && events[stop].t < end) ++stop;
    const std::span<const Event> slice(events.data() + begin, stop - begin);
    const Detection det = detector.process_bin(slice, bin);
    begin = stop;

    BinScore score{bin, det.spike_count, det.box, std::nullopt};
    if (det.spike_count > 0) ++spiking;
    if (const auto it = by_bin.find(bin); it != by_bin.end()) {
      score.iou = det.box ? iou(*det.box, it->second) : 0.0;
      iou_sum += *score.iou;
      ev.peak_iou = std::max(ev.peak_iou, *score.iou);
      ++ev.scored_bins;
    }
    ev.bins.push_back(score);
  }
  if (ev.scored_bins > 0) ev.mean_iou = iou_sum / ev.scored_bins;
  if (!ev.bins.empty()) ev.spike_bin_fraction = static_cast<double>(spiking) / static_cast<double>(ev.bins.size());
  return ev;
}

}  // namespace evnav
