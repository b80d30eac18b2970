#include "evnav/io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "evnav/errors.hpp"

namespace evnav {
namespace {

bool skippable(const std::string& line) {
  const auto first = line.find_first_not_of(" \t\r");
  return first == std::string::npos || line[first] == '#';
}

template <typename T>
T parse_field(const std::string& text, int line_no) {
  T value{};
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end)
    throw ConfigError("line " + std::to_string(line_no) + ": cannot parse '" + text + "'");
  return value;
}

struct Row {
  int line_no = 0;
  std::vector<std::string> fields;
};

std::vector<Row> read_rows(std::istream& in, std::size_t columns) {
  std::vector<Row> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (skippable(line)) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != columns)
      throw ConfigError("line " + std::to_string(line_no) + ": expected " + std::to_string(columns) + " fields");
    rows.push_back({line_no, std::move(fields)});
  }
  return rows;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

}  // namespace

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    std::string field = line.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    fields.push_back(b == std::string::npos ? std::string{} : field.substr(b, e - b + 1));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return fields;
}

void write_events(std::ostream& out, const std::vector<Event>& events) {
  out << "# t_us,x,y,p\n";
  for (const Event& e : events) out << e.t << ',' << e.x << ',' << e.y << ',' << e.polarity << '\n';
}

std::vector<Event> read_events(std::istream& in) {
  const auto rows = read_rows(in, 4);
  std::vector<Event> events;
  events.reserve(rows.size());
  for (const auto& [line_no, row] : rows) {
    Event e{parse_field<std::int64_t>(row[0], line_no), parse_field<int>(row[1], line_no),
            parse_field<int>(row[2], line_no), parse_field<int>(row[3], line_no)};
    if (e.polarity != 1 && e.polarity != -1)
      throw ConfigError("line " + std::to_string(line_no) + ": polarity must be 1 or -1");
    if (e.t < 0 || e.x < 0 || e.y < 0)
      throw ConfigError("line " + std::to_string(line_no) + ": negative timestamp or coordinate");
    events.push_back(e);
  }
  return events;
}

void write_boxes(std::ostream& out, const std::vector<TimedBox>& boxes) {
  out << "# t_us,x_min,x_max,y_min,y_max\n";
  for (const TimedBox& b : boxes)
    out << b.t_us << ',' << b.box.x_min << ',' << b.box.x_max << ',' << b.box.y_min << ',' << b.box.y_max << '\n';
}

std::vector<TimedBox> read_boxes(std::istream& in) {
  const auto rows = read_rows(in, 5);
  std::vector<TimedBox> boxes;
  boxes.reserve(rows.size());
  for (const auto& [line_no, row] : rows) {
    TimedBox b;
    b.t_us = parse_field<std::int64_t>(row[0], line_no);
    b.box = {parse_field<int>(row[1], line_no), parse_field<int>(row[2], line_no), parse_field<int>(row[3], line_no),
             parse_field<int>(row[4], line_no)};
    if (b.box.x_min > b.box.x_max || b.box.y_min > b.box.y_max)
      throw ConfigError("line " + std::to_string(line_no) + ": box minimum exceeds maximum");
    boxes.push_back(b);
  }
  return boxes;
}

std::vector<Event> load_events(const std::string& path) {
  auto in = open_input(path);
  return read_events(in);
}

void save_events(const std::string& path, const std::vector<Event>& events) {
  auto out = open_output(path);
  write_events(out, events);
}

std::vector<TimedBox> load_boxes(const std::string& path) {
  auto in = open_input(path);
  return read_boxes(in);
}

void save_boxes(const std::string& path, const std::vector<TimedBox>& boxes) {
  auto out = open_output(path);
  write_boxes(out, boxes);
}

}  // namespace evnav
