#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "foi/pipeline.hpp"

namespace foi {

// Streaming reader for frame JSONL. Enforces the session dimension and
// strictly increasing frame indices; errors name the line and field.
class FrameReader {
 public:
  FrameReader(std::istream& in, std::size_t dim);
  std::optional<FrameDetections> next();
  std::size_t line() const noexcept { return line_; }

 private:
  std::istream& in_;
  std::size_t dim_;
  std::size_t line_ = 0;
  std::optional<std::uint64_t> last_frame_;
};

FrameDetections parse_frame(const std::string& text, std::size_t dim, std::size_t line);
std::vector<FrameDetections> read_frames(std::istream& in, std::size_t dim);
std::string format_frame(const FrameDetections& frame);
void write_frames(const std::vector<FrameDetections>& frames, std::ostream& out);

std::string format_event(const AlertEvent& event);
void write_events(const std::vector<AlertEvent>& events, std::ostream& out);
std::vector<AlertEvent> read_events(std::istream& in);

std::string format_report(const TrackReport& report);
void write_reports(const std::vector<TrackReport>& reports, std::ostream& out);

// Detection record used by evaluation files: ground truth (gt_label,
// gt_identity) and tracker output (label, track_id). Embeddings are optional
// here and not checked against a dimension.
struct AnnotatedDetection {
  BoundingBox box;
  double confidence = 1.0;
  std::optional<std::string> agg_class;
  std::optional<std::string> label;
  std::optional<std::uint64_t> track_id;
  std::optional<std::string> gt_label;
  std::optional<std::uint64_t> gt_identity;
  std::optional<std::vector<float>> embedding;
};

struct AnnotatedFrame {
  std::uint64_t frame_index = 0;
  std::uint64_t timestamp_ms = 0;
  std::vector<AnnotatedDetection> detections;
};

std::vector<AnnotatedFrame> read_annotated(std::istream& in);
std::string format_annotated(const AnnotatedFrame& frame);
void write_annotated(const std::vector<AnnotatedFrame>& frames, std::ostream& out);

}  // namespace foi
