#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "evnav/event_camera.hpp"
#include "evnav/snn_detector.hpp"

namespace evnav {

/// Event stream text format: header `# t_us,x,y,p`, then one `t_us,x,y,p` per line.
void write_events(std::ostream& out, const std::vector<Event>& events);
/// Throws ConfigError on malformed lines, reporting the line number.
std::vector<Event> read_events(std::istream& in);

/// Ground-truth box record: `t_us,x_min,x_max,y_min,y_max`. The box holds for
/// the bin that starts at t_us.
struct TimedBox {
  std::int64_t t_us = 0;
  BoundingBox box;
};

void write_boxes(std::ostream& out, const std::vector<TimedBox>& boxes);
std::vector<TimedBox> read_boxes(std::istream& in);

std::vector<Event> load_events(const std::string& path);
void save_events(const std::string& path, const std::vector<Event>& events);
std::vector<TimedBox> load_boxes(const std::string& path);
void save_boxes(const std::string& path, const std::vector<TimedBox>& boxes);

/// Splits one comma-separated line; surrounding blanks are trimmed.
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace evnav
