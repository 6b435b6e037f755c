#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "foi/geometry.hpp"
#include "foi/reference_store.hpp"
#include "foi/tracker.hpp"

namespace foi {

struct FrameDetections {
  std::uint64_t frame_index = 0;
  std::uint64_t timestamp_ms = 0;
  std::vector<Detection> detections;
};

enum class AlertKind { Entered, Approaching };
const char* to_string(AlertKind k);

struct AlertEvent {
  std::uint64_t frame_index = 0;
  std::uint64_t track_id = 0;
  AlertKind kind = AlertKind::Entered;
  std::string zone;
  std::string label;
  double mean_similarity = 0.0;
};

struct TrailEntry {
  std::uint64_t frame_index = 0;
  std::uint64_t record_index = 0;
  std::string label;
  double similarity = 0.0;
};

inline constexpr const char* kUnclassified = "unclassified";

struct TrackReport {
  std::uint64_t track_id = 0;
  std::string final_label;
  std::optional<std::string> aggregate_label;
  std::map<std::string, LabelSupport> support;
  std::vector<TrailEntry> trail;
  std::uint64_t first_frame = 0;
  std::uint64_t last_frame = 0;
  std::vector<Point> trajectory;
  TrackState state = TrackState::Active;
};

struct PipelineConfig {
  TrackerConfig tracker;
  std::vector<Zone> zones;
  std::size_t approach_window = kDefaultApproachWindow;
  // When set, reports carry the coarse class of the final label.
  std::optional<ClassTaxonomy> taxonomy;
};

struct StageTimings {
  std::int64_t parse_ns = 0;
  std::int64_t associate_ns = 0;
  std::int64_t classify_ns = 0;
  std::int64_t alert_ns = 0;
  std::int64_t total_ns = 0;
};

// Retrieval result for one detection of the current frame.
struct DetectionLabel {
  std::size_t detection = 0;
  std::uint64_t track_id = 0;
  Match match;
};

struct FrameOutput {
  FrameResult result;
  std::vector<DetectionLabel> labels;
  std::vector<AlertEvent> alerts;
  StageTimings timings;
};

// One stream: tracker + per-frame retrieval votes + zone alert state.
// The store is borrowed and must outlive the session.
class Session {
 public:
  Session(const ReferenceStore& store, PipelineConfig cfg);

  FrameOutput process_frame(const FrameDetections& frame);
  // Parses one frame line and processes it; parse time is charged to the
  // parse stage.
  FrameOutput process_line(const std::string& line, std::size_t line_no);

  std::vector<TrackReport> finalize() const;

  const Tracker& tracker() const noexcept { return tracker_; }
  const PipelineConfig& config() const noexcept { return cfg_; }

 private:
  struct Episode {
    bool armed = true;
    std::size_t clear_frames = 0;
  };
  bool edge(Episode& ep, bool condition);

  const ReferenceStore& store_;
  PipelineConfig cfg_;
  Tracker tracker_;
  std::optional<std::uint64_t> last_frame_;
  // (track id, zone position, kind) -> episode
  std::map<std::tuple<std::uint64_t, std::size_t, AlertKind>, Episode> episodes_;
};

TrackReport make_report(const Track& track, const std::optional<ClassTaxonomy>& taxonomy);

}  // namespace foi
