#include "foi/evalkit.hpp"

#include <algorithm>
#include <numeric>

#include "foi/error.hpp"

namespace foi::eval {

PrecisionRecallF1 precision_recall_f1(const ConfusionCounts& c) {
  PrecisionRecallF1 r;
  if (c.tp + c.fp > 0) r.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  if (c.tp + c.fn > 0) r.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  if (r.precision + r.recall > 0.0) r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
  return r;
}

MatchOutcome match_detections(std::span<const ScoredBox> preds, std::span<const GroundTruthBox> gts,
                              double iou_threshold) {
  for (const auto& p : preds) require_valid(p.box);
  for (const auto& g : gts) require_valid(g.box);

  std::vector<std::size_t> order(preds.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return preds[a].confidence > preds[b].confidence;
  });

  MatchOutcome out;
  out.is_tp.assign(preds.size(), false);
  out.matched_gt.assign(preds.size(), std::nullopt);
  std::vector<bool> gt_taken(gts.size(), false);
  for (std::size_t p : order) {
    std::optional<std::size_t> best;
    double best_iou = -1.0;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (gt_taken[g] || gts[g].label != preds[p].label) continue;
      const double v = iou(preds[p].box, gts[g].box);
      if (v >= iou_threshold && v > best_iou) {
        best = g;
        best_iou = v;
      }
    }
    if (best) {
      gt_taken[*best] = true;
      out.is_tp[p] = true;
      out.matched_gt[p] = best;
      ++out.counts.tp;
    } else {
      ++out.counts.fp;
    }
  }
  out.counts.fn = static_cast<std::size_t>(std::count(gt_taken.begin(), gt_taken.end(), false));
  return out;
}

double average_precision(std::span<const RankedFlag> flags, std::size_t n_ground_truth) {
  if (n_ground_truth == 0) throw ContractViolation("average precision needs ground truth");
  std::vector<RankedFlag> ranked(flags.begin(), flags.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const RankedFlag& a, const RankedFlag& b) { return a.confidence > b.confidence; });

  std::vector<double> precision(ranked.size());
  std::vector<double> recall(ranked.size());
  std::size_t tp = 0;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    if (ranked[i].tp) ++tp;
    precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
    recall[i] = static_cast<double>(tp) / static_cast<double>(n_ground_truth);
  }
  // Precision envelope: best precision at any recall at or beyond this rank.
  for (std::size_t i = ranked.size(); i-- > 1;) precision[i - 1] = std::max(precision[i - 1], precision[i]);

  double ap = 0.0;
  double prev_recall = 0.0;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    ap += (recall[i] - prev_recall) * precision[i];
    prev_recall = recall[i];
  }
  return ap;
}

DatasetMetrics evaluate_dataset(std::span<const ImageDetections> images, double iou_threshold) {
  DatasetMetrics out;
  std::map<std::string, std::vector<RankedFlag>> flags;
  std::map<std::string, std::size_t> gt_count;
  for (const ImageDetections& img : images) {
    const MatchOutcome m = match_detections(img.preds, img.gts, iou_threshold);
    out.counts += m.counts;
    for (std::size_t p = 0; p < img.preds.size(); ++p) {
      flags[img.preds[p].label].push_back({img.preds[p].confidence, m.is_tp[p]});
    }
    for (const auto& g : img.gts) ++gt_count[g.label];
  }
  out.prf = precision_recall_f1(out.counts);

  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& [label, count] : gt_count) {
    const double ap = average_precision(flags[label], count);
    out.ap[label] = ap;
    sum += ap;
    ++n;
  }
  for (const auto& [label, f] : flags) {
    if (!gt_count.contains(label)) out.ap[label] = std::nullopt;
  }
  out.mean_ap = n ? sum / static_cast<double>(n) : 0.0;
  return out;
}

std::size_t id_switches(std::span<const std::vector<std::uint64_t>> gt_identities,
                        std::span<const std::vector<std::optional<std::uint64_t>>> track_ids) {
  if (gt_identities.size() != track_ids.size()) {
    throw ContractViolation("id_switches: sequences cover different numbers of frames");
  }
  std::map<std::uint64_t, std::uint64_t> binding;
  std::size_t switches = 0;
  for (std::size_t f = 0; f < gt_identities.size(); ++f) {
    if (gt_identities[f].size() != track_ids[f].size()) {
      throw ContractViolation("id_switches: frame " + std::to_string(f) + " is misaligned");
    }
    for (std::size_t i = 0; i < gt_identities[f].size(); ++i) {
      if (!track_ids[f][i]) continue;
      auto [it, inserted] = binding.try_emplace(gt_identities[f][i], *track_ids[f][i]);
      if (!inserted && it->second != *track_ids[f][i]) {
        ++switches;
        it->second = *track_ids[f][i];
      }
    }
  }
  return switches;
}

}  // namespace foi::eval
