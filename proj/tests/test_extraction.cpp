#include <gtest/gtest.h>

#include <filesystem>

#include "mergesim/extraction.hpp"
#include "support/fixtures.hpp"

using namespace mergesim;
using fixtures::actor;

namespace {

// Lag vehicle 10 m behind an on-ramp actor for `frames` frames at 10 Hz,
// optionally with a passing-lane follower throughout.
std::vector<Frame> pair_log(int frames, bool with_lag1) {
  std::vector<Frame> out;
  for (int k = 0; k < frames; ++k) {
    Frame f{k, 0.1 * k, {}};
    const double s = 100.0 + 1.5 * k;
    f.actors.push_back({actor("ma", -1, s, 15.0), "-", "-"});
    f.actors.push_back({actor("lag", 0, s - 10.0, 15.0), "-", "-"});
    if (with_lag1) f.actors.push_back({actor("p", 1, s - 30.0, 15.0), "-", "-"});
    out.push_back(std::move(f));
  }
  return out;
}

std::vector<MergeEvent> extract(const std::vector<Frame>& frames) {
  return extract_lag0_events(frames, fixtures::extraction_topology());
}

}  // namespace

TEST(Extraction, FixtureYieldsExpectedEvents) {
  const auto events = extract(fixtures::extraction_fixture());
  const auto expected = fixtures::extraction_expected();
  ASSERT_EQ(events.size(), expected.size());
  for (std::size_t i = 0; i < events.size(); ++i) {
    EXPECT_EQ(events[i].id, expected[i].id);
    EXPECT_EQ(to_string(events[i].label), expected[i].label);
  }
}

TEST(Extraction, LaneChangeEventEndsWithTransition) {
  const auto events = extract(fixtures::extraction_fixture());
  const MergeEvent& lc = events[1];
  ASSERT_EQ(lc.label, Action::ChangeLanes);
  EXPECT_EQ(lc.frames.back().roles.lag0.lane, kPassingLane);
  EXPECT_EQ(lc.decision_point(), lc.frames.size() - 1);
  EXPECT_EQ(lc.frames.back().frame, 70);
  EXPECT_EQ(events[0].decision_point(), events[0].frames.size());
}

TEST(Extraction, RolesAreResolved) {
  const auto events = extract(fixtures::extraction_fixture());
  const MergeEvent& q3 = events[2];
  for (const EventFrame& f : q3.frames) {
    EXPECT_EQ(f.roles.lag0.id, "q3");
    ASSERT_TRUE(f.roles.ma);
    EXPECT_EQ(f.roles.ma->id, "ma-q3");
    ASSERT_TRUE(f.roles.lag1);
    EXPECT_EQ(f.roles.lag1->id, "p-q3");
  }
}

TEST(Extraction, Lag1ThroughoutKeepsFullDuration) {
  const auto events = extract(pair_log(60, true));
  ASSERT_EQ(events.size(), 1u);
  EXPECT_NEAR(events[0].duration_s, 6.0, 1e-9);
  EXPECT_EQ(events[0].frames.size(), 60u);
}

TEST(Extraction, ShortWindowsRejected) {
  EXPECT_TRUE(extract(pair_log(40, false)).empty());
  EXPECT_TRUE(extract(pair_log(50, false)).empty());  // exactly 5 s is not longer
  EXPECT_EQ(extract(pair_log(51, false)).size(), 1u);
}

TEST(Extraction, BridgesShortDropouts) {
  auto frames = pair_log(100, false);
  for (int k : {30, 31}) frames[k].actors.pop_back();  // lag missing for two frames
  auto events = extract(frames);
  ASSERT_EQ(events.size(), 1u);
  EXPECT_EQ(events[0].frames.size(), 98u);
  EXPECT_NEAR(events[0].duration_s, 10.0, 1e-9);
  frames = pair_log(100, false);
  for (int k : {30, 31, 32}) frames[k].actors.pop_back();
  events = extract(frames);
  ASSERT_EQ(events.size(), 1u);  // 30 frames before the gap are too short, 67 after qualify
  EXPECT_EQ(events[0].frames.front().frame, 33);
}

TEST(Extraction, Idempotent) {
  const auto frames = fixtures::extraction_fixture();
  const auto a = extract(frames), b = extract(frames);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].id, b[i].id);
    EXPECT_EQ(format_trajectory_log(event_to_frames(a[i])), format_trajectory_log(event_to_frames(b[i])));
  }
}

TEST(Extraction, WriteAndLoadRoundTrip) {
  const auto events = extract(fixtures::extraction_fixture());
  const auto dir = std::filesystem::temp_directory_path() / "mergesim_events_test";
  std::filesystem::remove_all(dir);
  write_events(dir, events);
  EXPECT_TRUE(std::filesystem::exists(dir / "manifest.csv"));
  const auto back = load_events(dir);
  ASSERT_EQ(back.size(), events.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].id, events[i].id);
    EXPECT_EQ(back[i].label, events[i].label);
    EXPECT_NEAR(back[i].duration_s, events[i].duration_s, 5e-4);
    EXPECT_EQ(back[i].frames.size(), events[i].frames.size());
    EXPECT_EQ(back[i].decision_point(), events[i].decision_point());
    EXPECT_EQ(back[i].frames[3].roles.ma.has_value(), events[i].frames[3].roles.ma.has_value());
  }
  std::filesystem::remove_all(dir);
}

TEST(Extraction, LoadErrors) {
  const auto dir = std::filesystem::temp_directory_path() / "mergesim_events_bad";
  std::filesystem::remove_all(dir);
  EXPECT_THROW(load_events(dir), LogFormatError);
  std::filesystem::create_directories(dir);
  {
    std::ofstream os(dir / "manifest.csv");
    os << kManifestHeader << "\nevt,XX,6.0,sim,evt.csv\n";
  }
  EXPECT_THROW(load_events(dir), LogFormatError);
  std::filesystem::remove_all(dir);
}

TEST(Extraction, EventWithoutLag0Rejected) {
  std::vector<Frame> frames{Frame{0, 0.0, {{actor("x", 0, 0, 0), "MA", "-"}}}};
  EXPECT_THROW(frames_to_event(frames, "e", Action::KeepStraight, 1.0, "sim"), LogFormatError);
  EXPECT_THROW(frames_to_event({}, "e", Action::KeepStraight, 1.0, "sim"), LogFormatError);
}
