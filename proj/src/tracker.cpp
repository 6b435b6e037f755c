#include "foi/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include "foi/error.hpp"

namespace foi {

const char* to_string(TrackState s) { return s == TrackState::Active ? "Active" : "Lost"; }
const char* to_string(AssociationMode m) { return m == AssociationMode::IoU ? "IoU" : "Feature"; }

void TrackerConfig::validate() const {
  if (!(iou_threshold >= 0.0 && iou_threshold <= 1.0)) {
    throw ContractViolation("iou_threshold must lie in [0, 1]");
  }
  if (!(feature_threshold >= 0.0) || !std::isfinite(feature_threshold)) {
    throw ContractViolation("feature_threshold must be a finite non-negative number");
  }
  if (max_misses < 1) throw ContractViolation("max_misses must be at least 1");
  if (buffer_size < 1) throw ContractViolation("buffer_size must be at least 1");
}

double track_similarity(const Track& track, const Embedding& e) {
  if (track.embedding_buffer.empty()) throw ContractViolation("track has no buffered embeddings");
  double best = -1.0;
  for (const Embedding& b : track.embedding_buffer) best = std::max(best, cosine_similarity(b, e));
  return best;
}

namespace {

struct Candidate {
  std::size_t track;  // position in the tracks span
  std::size_t detection;
  double iou;
  double similarity;
};

}  // namespace

AssociationResult associate(std::span<const Track* const> tracks,
                            std::span<const Detection> detections, const TrackerConfig& cfg) {
  cfg.validate();
  AssociationResult out;
  std::vector<bool> track_used(tracks.size(), false);
  std::vector<bool> det_used(detections.size(), false);

  std::vector<std::vector<double>> ious(tracks.size(), std::vector<double>(detections.size()));
  for (std::size_t t = 0; t < tracks.size(); ++t) {
    for (std::size_t d = 0; d < detections.size(); ++d) {
      ious[t][d] = iou(tracks[t]->last_box, detections[d].box);
    }
  }

  auto commit = [&](const Candidate& c, AssociationMode mode) {
    const Track& track = *tracks[c.track];
    out.assignments.push_back({track.id, c.detection, mode, c.iou, c.similarity,
                               cosine_similarity(track.embedding_buffer.back(),
                                                 detections[c.detection].embedding)});
    track_used[c.track] = true;
    det_used[c.detection] = true;
  };

  // Stage 1: spatial overlap.
  std::vector<Candidate> spatial;
  for (std::size_t t = 0; t < tracks.size(); ++t) {
    for (std::size_t d = 0; d < detections.size(); ++d) {
      if (ious[t][d] >= cfg.iou_threshold && ious[t][d] > 0.0) {
        spatial.push_back({t, d, ious[t][d], track_similarity(*tracks[t], detections[d].embedding)});
      }
    }
  }
  std::sort(spatial.begin(), spatial.end(), [&](const Candidate& a, const Candidate& b) {
    return std::tuple(-a.iou, -a.similarity, tracks[a.track]->id, a.detection) <
           std::tuple(-b.iou, -b.similarity, tracks[b.track]->id, b.detection);
  });
  for (const Candidate& c : spatial) {
    if (!track_used[c.track] && !det_used[c.detection]) commit(c, AssociationMode::IoU);
  }

  // Stage 2: appearance fallback for what is left.
  std::vector<Candidate> appearance;
  for (std::size_t t = 0; t < tracks.size(); ++t) {
    if (track_used[t]) continue;
    for (std::size_t d = 0; d < detections.size(); ++d) {
      if (det_used[d]) continue;
      const double s = track_similarity(*tracks[t], detections[d].embedding);
      if (s >= cfg.feature_threshold) appearance.push_back({t, d, ious[t][d], s});
    }
  }
  std::sort(appearance.begin(), appearance.end(), [&](const Candidate& a, const Candidate& b) {
    return std::tuple(-a.similarity, tracks[a.track]->id, a.detection) <
           std::tuple(-b.similarity, tracks[b.track]->id, b.detection);
  });
  for (const Candidate& c : appearance) {
    if (!track_used[c.track] && !det_used[c.detection]) commit(c, AssociationMode::Feature);
  }

  for (std::size_t d = 0; d < detections.size(); ++d) {
    if (!det_used[d]) out.unmatched_detections.push_back(d);
  }
  for (std::size_t t = 0; t < tracks.size(); ++t) {
    if (!track_used[t]) out.unmatched_tracks.push_back(tracks[t]->id);
  }
  return out;
}

Tracker::Tracker(TrackerConfig cfg) : cfg_(cfg) { cfg_.validate(); }

const Track* Tracker::find(std::uint64_t track_id) const {
  // Ids are handed out sequentially from 1 and tracks are never removed.
  if (track_id == 0 || track_id > tracks_.size()) return nullptr;
  return &tracks_[track_id - 1];
}

Track* Tracker::find_mutable(std::uint64_t track_id) {
  return const_cast<Track*>(std::as_const(*this).find(track_id));
}

std::vector<const Track*> Tracker::active_tracks() const {
  std::vector<const Track*> out;
  for (const Track& t : tracks_) {
    if (t.state == TrackState::Active) out.push_back(&t);
  }
  return out;
}

void Tracker::append_vote(std::uint64_t track_id, std::uint64_t frame_index, Match match) {
  Track* t = find_mutable(track_id);
  if (t == nullptr) throw ContractViolation("unknown track id " + std::to_string(track_id));
  t->votes.push_back(std::move(match));
  t->vote_frames.push_back(frame_index);
}

FrameResult Tracker::step(std::span<const Detection> detections, std::uint64_t frame_index) {
  if (last_frame_ && frame_index <= *last_frame_) {
    throw ContractViolation("frame index " + std::to_string(frame_index) +
                            " does not follow " + std::to_string(*last_frame_));
  }
  for (const Detection& d : detections) require_valid(d.box);
  last_frame_ = frame_index;

  FrameResult result;
  result.frame_index = frame_index;

  const auto active = active_tracks();
  AssociationResult assoc = associate(active, detections, cfg_);

  for (const Assignment& a : assoc.assignments) {
    Track& t = *find_mutable(a.track_id);
    const Detection& d = detections[a.detection];
    t.last_box = d.box;
    t.center_history.push_back(center(d.box));
    t.embedding_buffer.push_back(d.embedding);
    while (t.embedding_buffer.size() > cfg_.buffer_size) t.embedding_buffer.pop_front();
    t.misses = 0;
    t.last_frame = frame_index;
  }
  result.assignments = std::move(assoc.assignments);

  for (std::uint64_t id : assoc.unmatched_tracks) {
    Track& t = *find_mutable(id);
    ++t.misses;
    result.missed_tracks.push_back(id);
    if (t.misses >= cfg_.max_misses) {
      t.state = TrackState::Lost;
      result.lost_tracks.push_back(id);
    }
  }

  // Reserve up front: new tracks must not invalidate references above, and
  // the `active` pointers are not used past this point.
  tracks_.reserve(tracks_.size() + assoc.unmatched_detections.size());
  for (std::size_t d : assoc.unmatched_detections) {
    Track t;
    t.id = next_id_++;
    t.last_box = detections[d].box;
    t.center_history.push_back(center(detections[d].box));
    t.embedding_buffer.push_back(detections[d].embedding);
    t.first_frame = frame_index;
    t.last_frame = frame_index;
    tracks_.push_back(std::move(t));
    result.new_tracks.push_back({tracks_.back().id, d});
  }
  return result;
}

}  // namespace foi
