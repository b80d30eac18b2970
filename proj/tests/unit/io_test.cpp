#include <sstream>

#include <gtest/gtest.h>

#include "evnav/errors.hpp"
#include "evnav/io.hpp"
#include "evnav/pgnn_io.hpp"
#include "test_support.hpp"

namespace evnav {
namespace {

TEST(SplitCsv, TrimsFields) {
  EXPECT_EQ(split_csv_line(" 1, 2 ,3"), (std::vector<std::string>{"1", "2", "3"}));
  EXPECT_EQ(split_csv_line("a,,b"), (std::vector<std::string>{"a", "", "b"}));
}

TEST(EventFile, RoundTrip) {
  const std::vector<Event> ev{{0, 1, 2, 1}, {15, 239, 179, -1}, {15, 0, 0, 1}};
  std::stringstream ss;
  write_events(ss, ev);
  EXPECT_EQ(ss.str().rfind("# t_us,x,y,p\n", 0), 0u);
  EXPECT_EQ(read_events(ss), ev);
}

TEST(EventFile, SkipsBlankAndCommentLines) {
  std::istringstream in("# t_us,x,y,p\n\n10,1,1,1\n# note\n20,2,2,-1\n");
  EXPECT_EQ(read_events(in).size(), 2u);
}

TEST(EventFile, ReportsLineOfBadRecord) {
  std::istringstream bad_polarity("# t_us,x,y,p\n1,1,1,1\n2,1,1,0\n");
  try {
    read_events(bad_polarity);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
  std::istringstream short_row("1,2,3\n");
  EXPECT_THROW(read_events(short_row), ConfigError);
  std::istringstream junk("1,2,x,1\n");
  EXPECT_THROW(read_events(junk), ConfigError);
}

TEST(BoxFile, RoundTrip) {
  const std::vector<TimedBox> boxes{{0, {1, 5, 2, 9}}, {10'000, {0, 0, 0, 0}}};
  std::stringstream ss;
  write_boxes(ss, boxes);
  const auto back = read_boxes(ss);
  ASSERT_EQ(back.size(), boxes.size());
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    EXPECT_EQ(back[i].t_us, boxes[i].t_us);
    EXPECT_EQ(back[i].box, boxes[i].box);
  }
  std::istringstream inverted("0,5,1,0,0\n");
  EXPECT_THROW(read_boxes(inverted), ConfigError);
}

TEST(EventFile, MissingFileIsConfigError) {
  EXPECT_THROW(load_events("/nonexistent/events.csv"), ConfigError);
}

TEST(EnergyTable, RoundTripsExactly) {
  const std::vector<EnergySample> s{{2.0, 0.1 + 0.2, 1234.5678901234567}, {9.0, 7.999999999, 1e-3}};
  std::stringstream ss;
  write_energy_table(ss, s);
  EXPECT_EQ(ss.str().rfind("depth_m,velocity_mps,energy_J\n", 0), 0u);
  const auto back = read_energy_table(ss);
  ASSERT_EQ(back.size(), 2u);
  for (std::size_t i = 0; i < s.size(); ++i) {
    EXPECT_EQ(back[i].depth, s[i].depth);
    EXPECT_EQ(back[i].velocity, s[i].velocity);
    EXPECT_EQ(back[i].energy, s[i].energy);
  }
  std::istringstream bad("depth_m,velocity_mps,energy_J\n1,2\n");
  EXPECT_THROW(read_energy_table(bad), ConfigError);
}

TEST(PolyJson, RoundTripsExactly) {
  PolyCoeffs p;
  p.c = {1.0 / 3.0, -2.5, 3.25, 1e-9, -7.0, 0.1};
  p.depth = 4.0;
  p.v_min = 0.6;
  p.v_max = 4.0;
  p.rms_residual = 0.01;
  const auto back = polys_from_json(polys_to_json({p}));
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].c, p.c);
  EXPECT_EQ(back[0].depth, p.depth);
  EXPECT_EQ(back[0].v_min, p.v_min);
  EXPECT_EQ(back[0].v_max, p.v_max);
  EXPECT_THROW(polys_from_json("{}"), ConfigError);
  EXPECT_THROW(polys_from_json("[{\"depth_m\": 1, \"v_min\": 0, \"v_max\": 1, \"coefficients\": [1, 2]}]"),
               ConfigError);
}

TEST(TextFile, WriteThenRead) {
  testing::TempDir dir("io");
  write_text_file(dir.file("a.txt"), "hello\n");
  EXPECT_EQ(read_text_file(dir.file("a.txt")), "hello\n");
  EXPECT_THROW(read_text_file(dir.file("missing.txt")), ConfigError);
}

}  // namespace
}  // namespace evnav
