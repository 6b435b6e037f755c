#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "foi/geometry.hpp"
#include "foi/reference_store.hpp"
#include "foi/vectorspace.hpp"

namespace foi {

struct Detection {
  BoundingBox box;
  Embedding embedding;
  double confidence = 1.0;
  // Coarse class reported by the detector. Advisory only.
  std::optional<std::string> agg_class;
};

enum class TrackState { Active, Lost };
enum class AssociationMode { IoU, Feature };

const char* to_string(TrackState s);
const char* to_string(AssociationMode m);

struct TrackerConfig {
  double iou_threshold = 0.5;
  // Values above 1 switch the appearance fallback off entirely.
  double feature_threshold = 0.70;
  std::size_t max_misses = 30;
  std::size_t buffer_size = 5;

  void validate() const;
};

struct Track {
  std::uint64_t id = 0;
  BoundingBox last_box;
  std::vector<Point> center_history;
  std::deque<Embedding> embedding_buffer;
  std::vector<Match> votes;
  std::vector<std::uint64_t> vote_frames;
  std::size_t misses = 0;
  TrackState state = TrackState::Active;
  std::uint64_t first_frame = 0;
  std::uint64_t last_frame = 0;  // last frame with a matched detection
};

// Best cosine similarity between e and any buffered embedding of the track.
double track_similarity(const Track& track, const Embedding& e);

struct Assignment {
  std::uint64_t track_id = 0;
  std::size_t detection = 0;
  AssociationMode mode = AssociationMode::IoU;
  double iou = 0.0;
  double similarity = 0.0;       // track_similarity at association time
  double last_similarity = 0.0;  // cosine against the most recent embedding
};

struct AssociationResult {
  std::vector<Assignment> assignments;
  std::vector<std::size_t> unmatched_detections;
  std::vector<std::uint64_t> unmatched_tracks;
};

// One-to-one matching of active tracks to detections:
//  1. greedy by descending IoU among overlapping pairs with IoU >=
//     iou_threshold; exact
//     IoU ties go to the higher track similarity, then the lower track id;
//  2. leftover detections against leftover tracks, greedy by descending
//     track similarity among pairs with similarity >= feature_threshold.
AssociationResult associate(std::span<const Track* const> tracks,
                            std::span<const Detection> detections, const TrackerConfig& cfg);

struct NewTrack {
  std::uint64_t track_id = 0;
  std::size_t detection = 0;
};

struct FrameResult {
  std::uint64_t frame_index = 0;
  std::vector<Assignment> assignments;
  std::vector<NewTrack> new_tracks;
  std::vector<std::uint64_t> missed_tracks;
  std::vector<std::uint64_t> lost_tracks;  // transitioned to Lost on this frame
};

// Single-stream tracker. Calls must be serialised; frame indices must
// strictly increase. Lost tracks are kept for reporting but never matched.
class Tracker {
 public:
  explicit Tracker(TrackerConfig cfg = {});

  FrameResult step(std::span<const Detection> detections, std::uint64_t frame_index);

  const TrackerConfig& config() const noexcept { return cfg_; }
  const std::vector<Track>& tracks() const noexcept { return tracks_; }
  const Track* find(std::uint64_t track_id) const;
  std::vector<const Track*> active_tracks() const;
  std::optional<std::uint64_t> last_frame() const noexcept { return last_frame_; }

  void append_vote(std::uint64_t track_id, std::uint64_t frame_index, Match match);

 private:
  Track* find_mutable(std::uint64_t track_id);

  TrackerConfig cfg_;
  std::vector<Track> tracks_;
  std::uint64_t next_id_ = 1;
  std::optional<std::uint64_t> last_frame_;
};

}  // namespace foi
