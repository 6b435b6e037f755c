#pragma once

#include <map>
#include <optional>
#include <vector>

#include "foi/evalkit.hpp"
#include "foi/pipeline.hpp"
#include "foi/synth.hpp"

namespace foi::testing {

struct ScenarioScore {
  std::size_t id_switches = 0;
  std::size_t tracks = 0;
  std::size_t correct_labels = 0;
  std::vector<TrackReport> reports;
  std::vector<AlertEvent> alerts;
};

// Runs a generated scenario through a session and scores it against the
// generator's ground truth. A track's label is correct when it equals the
// ground-truth label it was bound to most often.
inline ScenarioScore score_scenario(const synth::Scenario& s, const PipelineConfig& cfg) {
  Session session(s.store, cfg);
  std::vector<std::vector<std::uint64_t>> identities;
  std::vector<std::vector<std::optional<std::uint64_t>>> bound;
  std::map<std::uint64_t, std::map<std::string, std::size_t>> truth_of_track;
  ScenarioScore score;

  for (std::size_t f = 0; f < s.frames.size(); ++f) {
    const FrameOutput out = session.process_frame(s.frames[f]);
    score.alerts.insert(score.alerts.end(), out.alerts.begin(), out.alerts.end());
    std::vector<std::optional<std::uint64_t>> track_of(s.frames[f].detections.size());
    for (const auto& l : out.labels) track_of[l.detection] = l.track_id;

    std::vector<std::uint64_t> ids;
    std::vector<std::optional<std::uint64_t>> tracks;
    const auto& gt = s.ground_truth[f].detections;
    for (std::size_t d = 0; d < gt.size(); ++d) {
      ids.push_back(*gt[d].gt_identity);
      tracks.push_back(track_of[d]);
      if (track_of[d]) ++truth_of_track[*track_of[d]][*gt[d].gt_label];
    }
    identities.push_back(std::move(ids));
    bound.push_back(std::move(tracks));
  }

  score.id_switches = eval::id_switches(identities, bound);
  score.reports = session.finalize();
  for (const auto& r : score.reports) {
    const auto& counts = truth_of_track.at(r.track_id);
    const auto best = std::max_element(counts.begin(), counts.end(),
                                       [](const auto& a, const auto& b) { return a.second < b.second; });
    ++score.tracks;
    if (best->first == r.final_label) ++score.correct_labels;
  }
  return score;
}

}  // namespace foi::testing
