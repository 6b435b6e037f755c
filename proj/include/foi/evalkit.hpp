#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "foi/geometry.hpp"

namespace foi::eval {

struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  ConfusionCounts& operator+=(const ConfusionCounts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    return *this;
  }
};

struct PrecisionRecallF1 {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Zero denominators yield 0 rather than NaN.
PrecisionRecallF1 precision_recall_f1(const ConfusionCounts& c);

struct ScoredBox {
  BoundingBox box;
  double confidence = 0.0;
  std::string label;
};

struct GroundTruthBox {
  BoundingBox box;
  std::string label;
};

struct MatchOutcome {
  ConfusionCounts counts;
  // Indexed like the input predictions.
  std::vector<bool> is_tp;
  std::vector<std::optional<std::size_t>> matched_gt;
};

// Predictions in descending confidence (ties keep input order) each take the
// unmatched same-label ground truth with the highest IoU >= iou_threshold.
MatchOutcome match_detections(std::span<const ScoredBox> preds, std::span<const GroundTruthBox> gts,
                              double iou_threshold = 0.5);

struct RankedFlag {
  double confidence = 0.0;
  bool tp = false;
};

// All-point interpolated area under the precision/recall curve.
// Requires n_ground_truth > 0.
double average_precision(std::span<const RankedFlag> flags, std::size_t n_ground_truth);

struct ImageDetections {
  std::vector<ScoredBox> preds;
  std::vector<GroundTruthBox> gts;
};

struct DatasetMetrics {
  ConfusionCounts counts;
  PrecisionRecallF1 prf;
  // Labels without ground truth have no AP and are left out of the mean.
  std::map<std::string, std::optional<double>> ap;
  double mean_ap = 0.0;
};

DatasetMetrics evaluate_dataset(std::span<const ImageDetections> images, double iou_threshold = 0.5);

// Frames where the track bound to a ground-truth identity differs from the
// previous binding of that identity. Both sequences are frame-aligned and
// each frame's vectors are aligned entry-by-entry; a missing track id leaves
// the binding unchanged.
std::size_t id_switches(std::span<const std::vector<std::uint64_t>> gt_identities,
                        std::span<const std::vector<std::optional<std::uint64_t>>> track_ids);

}  // namespace foi::eval
