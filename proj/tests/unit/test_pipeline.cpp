#include <gtest/gtest.h>

#include <sstream>

#include "foi/error.hpp"
#include "foi/fixtures.hpp"
#include "foi/formats.hpp"
#include "foi/pipeline.hpp"

using namespace foi;

namespace {

ReferenceStore two_class_store() {
  ReferenceStore s(4);
  s.insert(Embedding{1, 0, 0, 0}, "crane vehicle", "c.jpg");
  s.insert(Embedding{0, 1, 0, 0}, "dust-proof net", "n.jpg");
  s.insert(Embedding{0, 0, 1, 0}, "greenhouse film", "g.jpg");
  return s;
}

FrameDetections frame_with(std::uint64_t idx, std::vector<Detection> d) {
  return {idx, idx * 40, std::move(d)};
}

Detection at(double x, double y, Embedding e) { return {{x, y, x + 10, y + 10}, std::move(e), 0.9, std::nullopt}; }

}  // namespace

TEST(Pipeline, CraneEntersCriticalZoneOnce) {
  const auto fx = fixtures::crane_fixture();
  PipelineConfig cfg;
  cfg.zones = {fx.zone};
  Session s(fx.store, cfg);
  std::vector<AlertEvent> entered;
  for (const auto& f : fx.frames) {
    for (const auto& a : s.process_frame(f).alerts) {
      if (a.kind == AlertKind::Entered) entered.push_back(a);
    }
  }
  ASSERT_EQ(entered.size(), 1u);
  EXPECT_EQ(entered[0].label, "crane vehicle");
  EXPECT_EQ(entered[0].zone, "critical");
  const auto reports = s.finalize();
  ASSERT_EQ(reports.size(), 1u);
  EXPECT_EQ(reports[0].final_label, "crane vehicle");
  EXPECT_EQ(reports[0].trail.size(), 6u);
}

TEST(Pipeline, OnlyTheNetEntersTheClearanceZone) {
  const auto fx = fixtures::net_fixture();
  PipelineConfig cfg;
  cfg.zones = {fx.zone};
  cfg.taxonomy = ClassTaxonomy::functional_behavior();
  Session s(fx.store, cfg);
  std::vector<AlertEvent> alerts;
  for (const auto& f : fx.frames) {
    const auto out = s.process_frame(f);
    alerts.insert(alerts.end(), out.alerts.begin(), out.alerts.end());
  }
  ASSERT_FALSE(alerts.empty());
  for (const auto& a : alerts) {
    EXPECT_EQ(a.track_id, 1u);
    EXPECT_EQ(a.label, "dust-proof net");
  }
  const auto entered = std::count_if(alerts.begin(), alerts.end(),
                                     [](const AlertEvent& a) { return a.kind == AlertKind::Entered; });
  EXPECT_EQ(entered, 1);
  const auto reports = s.finalize();
  ASSERT_EQ(reports.size(), 2u);
  EXPECT_EQ(reports[0].final_label, "dust-proof net");
  EXPECT_EQ(reports[0].aggregate_label, "non-rigid");
  EXPECT_EQ(reports[1].final_label, "tower crane");
  EXPECT_EQ(reports[1].aggregate_label, "construction machinery");
}

TEST(Pipeline, ZeroDetectionFrame) {
  const auto store = two_class_store();
  PipelineConfig cfg;
  cfg.zones = {{{0, 0, 100, 100}, "z"}};
  Session s(store, cfg);
  s.process_frame(frame_with(0, {at(500, 500, Embedding{1, 0, 0, 0})}));
  const auto out = s.process_frame(frame_with(1, {}));
  EXPECT_TRUE(out.result.assignments.empty());
  EXPECT_TRUE(out.alerts.empty());
  EXPECT_EQ(out.result.missed_tracks, std::vector<std::uint64_t>{1});
  EXPECT_EQ(s.tracker().find(1)->misses, 1u);
}

TEST(Pipeline, EnteredFiresOnceOverAHundredFrames) {
  const auto store = two_class_store();
  PipelineConfig cfg;
  cfg.zones = {{{0, 0, 100, 100}, "z"}};
  Session s(store, cfg);
  std::size_t entered = 0;
  for (std::uint64_t f = 0; f < 100; ++f) {
    for (const auto& a : s.process_frame(frame_with(f, {at(40, 40, Embedding{0, 1, 0, 0})})).alerts) {
      EXPECT_EQ(a.kind, AlertKind::Entered);
      EXPECT_EQ(a.frame_index, 0u);
      ++entered;
    }
  }
  EXPECT_EQ(entered, 1u);
}

TEST(Pipeline, EpisodeRearmsAfterLeavingForAWindow) {
  const auto store = two_class_store();
  PipelineConfig cfg;
  cfg.zones = {{{0, 0, 100, 100}, "z"}};
  cfg.approach_window = 3;
  cfg.tracker.iou_threshold = 0.0;
  Session s(store, cfg);
  // Inside, then outside (moving away) for 3 frames, then back inside.
  const double xs[] = {40, 40, 200, 220, 240, 40, 40};
  std::vector<std::uint64_t> entered_at;
  for (std::uint64_t f = 0; f < 7; ++f) {
    for (const auto& a : s.process_frame(frame_with(f, {at(xs[f], 40, Embedding{0, 1, 0, 0})})).alerts) {
      if (a.kind == AlertKind::Entered) entered_at.push_back(a.frame_index);
    }
  }
  EXPECT_EQ(entered_at, (std::vector<std::uint64_t>{0, 5}));
}

TEST(Pipeline, ApproachingBeforeEntering) {
  const auto store = two_class_store();
  PipelineConfig cfg;
  cfg.zones = {{{0, 0, 100, 100}, "z"}};
  cfg.tracker.iou_threshold = 0.0;
  Session s(store, cfg);
  std::vector<std::pair<std::uint64_t, AlertKind>> seen;
  const double xs[] = {300, 250, 200, 150, 90, 60};
  for (std::uint64_t f = 0; f < 6; ++f) {
    for (const auto& a : s.process_frame(frame_with(f, {at(xs[f], 40, Embedding{1, 0, 0, 0})})).alerts) {
      seen.emplace_back(a.frame_index, a.kind);
    }
  }
  ASSERT_EQ(seen.size(), 2u);
  EXPECT_EQ(seen[0], std::make_pair(std::uint64_t{1}, AlertKind::Approaching));
  EXPECT_EQ(seen[1], std::make_pair(std::uint64_t{4}, AlertKind::Entered));
}

TEST(Pipeline, ReportsFollowTheVoteTrail) {
  const auto store = two_class_store();
  Session s(store, {});
  const Embedding net{0, 1, 0, 0}, film{0, 0.1f, 1, 0};
  const Embedding trail[] = {net, film, net, net, film, net};
  for (std::uint64_t f = 0; f < 6; ++f) s.process_frame(frame_with(f, {at(10, 10, trail[f])}));
  const auto reports = s.finalize();
  ASSERT_EQ(reports.size(), 1u);
  EXPECT_EQ(reports[0].final_label, "dust-proof net");
  EXPECT_EQ(reports[0].support.at("dust-proof net").votes, 4u);
  EXPECT_EQ(reports[0].support.at("greenhouse film").votes, 2u);
  std::vector<Match> votes;
  for (const auto& t : reports[0].trail) votes.push_back({t.record_index, t.label, t.similarity});
  EXPECT_EQ(majority_vote(votes).label, reports[0].final_label);
  EXPECT_EQ(reports[0].first_frame, 0u);
  EXPECT_EQ(reports[0].last_frame, 5u);
  EXPECT_EQ(reports[0].trajectory.size(), 6u);
}

TEST(Pipeline, TrackWithoutVotesIsUnclassified) {
  Track t;
  t.id = 3;
  EXPECT_EQ(make_report(t, std::nullopt).final_label, kUnclassified);
}

TEST(Pipeline, Errors) {
  const auto store = two_class_store();
  Session s(store, {});
  s.process_frame(frame_with(3, {}));
  EXPECT_THROW(s.process_frame(frame_with(3, {})), InputError);
  EXPECT_THROW(s.process_frame(frame_with(4, {at(0, 0, Embedding{1, 0})})), DimensionMismatch);

  ReferenceStore empty(4);
  Session e(empty, {});
  EXPECT_NO_THROW(e.process_frame(frame_with(0, {})));
  EXPECT_THROW(e.process_frame(frame_with(1, {at(0, 0, Embedding{1, 0, 0, 0})})), InputError);

  PipelineConfig bad;
  bad.approach_window = 1;
  EXPECT_THROW(Session(store, bad), ContractViolation);
}

TEST(Pipeline, StageTimingsAddUp) {
  const auto fx = fixtures::net_fixture();
  std::ostringstream text;
  write_frames(fx.frames, text);
  std::istringstream lines(text.str());
  Session s(fx.store, {});
  std::string line;
  std::size_t n = 0;
  while (std::getline(lines, line)) {
    const auto t = s.process_line(line, ++n).timings;
    EXPECT_GE(t.parse_ns, 0);
    EXPECT_GE(t.associate_ns, 0);
    EXPECT_GE(t.classify_ns, 0);
    EXPECT_GE(t.alert_ns, 0);
    EXPECT_EQ(t.total_ns, t.parse_ns + t.associate_ns + t.classify_ns + t.alert_ns);
  }
  EXPECT_EQ(n, 6u);
}

TEST(Pipeline, DeterministicOutputs) {
  auto run = [] {
    const auto fx = fixtures::net_fixture();
    PipelineConfig cfg;
    cfg.zones = {fx.zone};
    Session s(fx.store, cfg);
    std::ostringstream out;
    for (const auto& f : fx.frames) write_events(s.process_frame(f).alerts, out);
    write_reports(s.finalize(), out);
    return out.str();
  };
  EXPECT_EQ(run(), run());
}
