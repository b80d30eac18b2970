#include "evnav/snn_detector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "evnav/errors.hpp"

namespace evnav {

void LifConfig::validate() const {
  if (!(beta >= 0.0 && beta < 1.0)) throw DomainError("lif: beta must lie in [0, 1)");
  if (!(u_th > 0.0)) throw DomainError("lif: firing threshold must be positive");
  if (bin_width_us <= 0) throw DomainError("lif: bin width must be positive");
  if (min_spike_pixels < 1) throw DomainError("lif: min_spike_pixels must be at least 1");
}

Grid<int> accumulate(std::span<const Event> events, std::int64_t t_a_us, std::int64_t t_b_us, int width,
                     int height) {
  if (t_b_us <= t_a_us) throw DomainError("accumulate: window end must follow its start");
  Grid<int> counts(width, height, 0);
  for (const Event& e : events) {
    if (!counts.contains(e.x, e.y)) throw DomainError("accumulate: event outside the sensor");
    if (e.t < t_a_us || e.t >= t_b_us) continue;
    ++counts(e.x, e.y);
  }
  return counts;
}

Grid<double> convolve3x3(const Grid<int>& input, const Kernel3x3& kernel) {
  const int width = input.width();
  const int height = input.height();
  Grid<double> out(width, height, 0.0);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const int count = input(x, y);
      if (count == 0) continue;
      // Scatter: each input pixel contributes to its 3x3 neighbourhood.
      for (int dy = -1; dy <= 1; ++dy) {
        const int oy = y - dy;
        if (oy < 0 || oy >= height) continue;
        for (int dx = -1; dx <= 1; ++dx) {
          const int ox = x - dx;
          if (ox < 0 || ox >= width) continue;
          out(ox, oy) += kernel[dy + 1][dx + 1] * count;
        }
      }
    }
  }
  return out;
}

SpikeMap lif_step(MembraneGrid& state, const Grid<int>& input, const LifConfig& config) {
  if (!state.potential.same_shape(input)) throw DomainError("lif_step: grid dimensions disagree");
  const Grid<double> drive = convolve3x3(input, config.kernel);
  SpikeMap spikes(input.width(), input.height(), 0);
  auto potential = state.potential.values();
  auto in = drive.values();
  auto out = spikes.values();
  for (std::size_t i = 0; i < potential.size(); ++i) {
    const double u = config.beta * potential[i] + in[i];
    if (u >= config.u_th) {
      out[i] = 1;
      potential[i] = 0.0;
    } else {
      potential[i] = u;
    }
  }
  return spikes;
}

namespace {

template <typename T>
std::optional<BoundingBox> nonzero_box(const Grid<T>& grid, int min_pixels) {
  BoundingBox box{std::numeric_limits<int>::max(), -1, std::numeric_limits<int>::max(), -1};
  int count = 0;
  for (int y = 0; y < grid.height(); ++y) {
    for (int x = 0; x < grid.width(); ++x) {
      if (grid(x, y) == T{}) continue;
      ++count;
      box.x_min = std::min(box.x_min, x);
      box.x_max = std::max(box.x_max, x);
      box.y_min = std::min(box.y_min, y);
      box.y_max = std::max(box.y_max, y);
    }
  }
  if (count == 0 || count < min_pixels) return std::nullopt;
  return box;
}

}  // namespace

std::optional<BoundingBox> detect_bbox(const SpikeMap& spikes, const LifConfig& config) {
  return nonzero_box(spikes, config.min_spike_pixels);
}

std::optional<BoundingBox> mask_bbox(const Grid<double>& mask) { return nonzero_box(mask, 1); }

std::pair<int, int> bbox_center(const BoundingBox& box) {
  return {box.x_min + (box.x_max - box.x_min) / 2, box.y_min + (box.y_max - box.y_min) / 2};
}

double iou(const BoundingBox& a, const BoundingBox& b) {
  const double ix = std::max(0, std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min));
  const double iy = std::max(0, std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min));
  const double inter = ix * iy;
  const double area_a = static_cast<double>(a.x_max - a.x_min) * (a.y_max - a.y_min);
  const double area_b = static_cast<double>(b.x_max - b.x_min) * (b.y_max - b.y_min);
  const double uni = area_a + area_b - inter;
  if (uni <= 0.0) return a == b ? 1.0 : 0.0;
  return inter / uni;
}

SnnDetector::SnnDetector(LifConfig config, int width, int height)
    : config_((config.validate(), config)), width_(width), height_(height), membrane_(width, height) {}

Detection SnnDetector::process_bin(std::span<const Event> events, std::int64_t bin_start_us) {
  const std::int64_t bin_end = bin_start_us + config_.bin_width_us;
  const Grid<int> input = accumulate(events, bin_start_us, bin_end, width_, height_);
  const SpikeMap spikes = lif_step(membrane_, input, config_);
  Detection det;
  det.bin_start_us = bin_start_us;
  det.bin_end_us = bin_end;
  for (std::uint8_t s : spikes.values()) det.spike_count += s;
  det.box = detect_bbox(spikes, config_);
  return det;
}

std::vector<Detection> SnnDetector::process_stream(std::span<const Event> events, std::int64_t t_start_us) {
  std::vector<Detection> out;
  if (events.empty()) return out;
  const std::int64_t last = events.back().t;
  std::size_t begin = 0;
  for (std::int64_t bin = t_start_us; bin <= last; bin += config_.bin_width_us) {
    const std::int64_t end = bin + config_.bin_width_us;
    while (begin < events.size() && events[begin].t < bin) ++begin;
    std::size_t stop = begin;
    while (stop < events.size() && events[stop].t < end) ++stop;
    out.push_back(process_bin(events.subspan(begin, stop - begin), bin));
    begin = stop;
  }
  return out;
}

void SnnDetector::reset() { membrane_ = MembraneGrid(width_, height_); }

}  // namespace evnav
