#include "foi/pipeline.hpp"

#include <chrono>

#include "foi/error.hpp"
#include "foi/formats.hpp"

namespace foi {

namespace {

using Clock = std::chrono::steady_clock;

std::int64_t ns_between(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(b - a).count();
}

}  // namespace

const char* to_string(AlertKind k) { return k == AlertKind::Entered ? "Entered" : "Approaching"; }

Session::Session(const ReferenceStore& store, PipelineConfig cfg)
    : store_(store), cfg_(std::move(cfg)), tracker_(cfg_.tracker) {
  if (cfg_.approach_window < 2) throw ContractViolation("approach window must be at least 2");
  for (const Zone& z : cfg_.zones) require_valid(z.box);
}

bool Session::edge(Episode& ep, bool condition) {
  if (condition) {
    ep.clear_frames = 0;
    if (ep.armed) {
      ep.armed = false;
      return true;
    }
    return false;
  }
  if (!ep.armed && ++ep.clear_frames >= cfg_.approach_window) ep.armed = true;
  return false;
}

FrameOutput Session::process_frame(const FrameDetections& frame) {
  if (last_frame_ && frame.frame_index <= *last_frame_) {
    throw InputError("out-of-order frame " + std::to_string(frame.frame_index) + " after " +
                     std::to_string(*last_frame_));
  }
  for (const Detection& d : frame.detections) validate_embedding(d.embedding, store_.dim());
  if (!frame.detections.empty() && store_.empty()) {
    throw InputError("reference store is empty; cannot classify detections");
  }

  FrameOutput out;
  const auto t0 = Clock::now();
  out.result = tracker_.step(frame.detections, frame.frame_index);
  last_frame_ = frame.frame_index;
  const auto t1 = Clock::now();

  auto classify = [&](std::size_t detection, std::uint64_t track_id) {
    Match m = store_.classify_frame(frame.detections[detection].embedding);
    tracker_.append_vote(track_id, frame.frame_index, m);
    out.labels.push_back({detection, track_id, std::move(m)});
  };
  for (const Assignment& a : out.result.assignments) classify(a.detection, a.track_id);
  for (const NewTrack& n : out.result.new_tracks) classify(n.detection, n.track_id);
  std::sort(out.labels.begin(), out.labels.end(),
            [](const DetectionLabel& a, const DetectionLabel& b) { return a.detection < b.detection; });
  const auto t2 = Clock::now();

  for (const Track* track : tracker_.active_tracks()) {
    const Point& here = track->center_history.back();
    for (std::size_t z = 0; z < cfg_.zones.size(); ++z) {
      const Zone& zone = cfg_.zones[z];
      const bool inside = zone_contains(zone, here);
      const bool nearing = !inside && track->center_history.size() >= 2 &&
                           approaching(track->center_history, zone, cfg_.approach_window);

      std::optional<AlertKind> fired;
      if (edge(episodes_[{track->id, z, AlertKind::Entered}], inside)) fired = AlertKind::Entered;
      if (edge(episodes_[{track->id, z, AlertKind::Approaching}], nearing) && !fired) {
        fired = AlertKind::Approaching;
      }
      if (!fired) continue;

      AlertEvent ev;
      ev.frame_index = frame.frame_index;
      ev.track_id = track->id;
      ev.kind = *fired;
      ev.zone = zone.name;
      if (track->votes.empty()) {
        ev.label = kUnclassified;
      } else {
        const VoteSummary vs = majority_vote(track->votes);
        ev.label = vs.label;
        ev.mean_similarity = vs.support.at(vs.label).mean_similarity;
      }
      out.alerts.push_back(std::move(ev));
    }
  }
  const auto t3 = Clock::now();

  out.timings.associate_ns = ns_between(t0, t1);
  out.timings.classify_ns = ns_between(t1, t2);
  out.timings.alert_ns = ns_between(t2, t3);
  out.timings.total_ns = ns_between(t0, t3);
  return out;
}

FrameOutput Session::process_line(const std::string& line, std::size_t line_no) {
  const auto t0 = Clock::now();
  FrameDetections frame = parse_frame(line, store_.dim(), line_no);
  const auto t1 = Clock::now();
  FrameOutput out = process_frame(frame);
  out.timings.parse_ns = ns_between(t0, t1);
  out.timings.total_ns += out.timings.parse_ns;
  return out;
}

TrackReport make_report(const Track& track, const std::optional<ClassTaxonomy>& taxonomy) {
  TrackReport r;
  r.track_id = track.id;
  r.first_frame = track.first_frame;
  r.last_frame = track.last_frame;
  r.trajectory = track.center_history;
  r.state = track.state;
  for (std::size_t i = 0; i < track.votes.size(); ++i) {
    const Match& m = track.votes[i];
    r.trail.push_back({track.vote_frames[i], m.record_index, m.label, m.similarity});
  }
  if (track.votes.empty()) {
    r.final_label = kUnclassified;
  } else {
    VoteSummary vs = majority_vote(track.votes);
    r.final_label = vs.label;
    r.support = std::move(vs.support);
    if (taxonomy && taxonomy->maps(r.final_label)) r.aggregate_label = taxonomy->aggregate(r.final_label);
  }
  return r;
}

std::vector<TrackReport> Session::finalize() const {
  std::vector<TrackReport> out;
  out.reserve(tracker_.tracks().size());
  for (const Track& t : tracker_.tracks()) out.push_back(make_report(t, cfg_.taxonomy));
  return out;
}

}  // namespace foi
