#pragma once

#include <map>
#include <vector>

#include "evalkit/boxes.hpp"

namespace evalkit {

/// Per-image collections; the outer index is the image id.
using DetectionSet = std::vector<std::vector<Detection>>;
using GroundTruthSet = std::vector<std::vector<GroundTruth>>;

/// Greedy TP/FP assignment in confidence order (stable, input order breaks
/// ties). A detection is TP iff its class matches and IoU >= iou_thresh
/// against a still-unmatched ground truth; each GT matches at most once.
struct MatchResult {
  std::vector<int> ranked;  // indices into the input detections, best first
  std::vector<bool> tp;     // aligned with `ranked`
  int false_negatives = 0;
};

MatchResult classify_tp_fp(const std::vector<Detection>& dets,
                           const std::vector<GroundTruth>& gts, double iou_thresh);

struct PrPoint {
  double recall = 0;
  double precision = 0;
};

/// Cumulative precision/recall down a confidence-ranked TP/FP list.
/// n_gt == 0 yields an empty curve (AP defined as 0).
std::vector<PrPoint> precision_recall(const std::vector<bool>& ranked_tp, int n_gt);

/// PASCAL VOC 2007 11-point interpolated AP.
double average_precision_voc07(const std::vector<PrPoint>& curve);
/// COCO-style AP on the 101-point recall grid.
double average_precision_101pt(const std::vector<PrPoint>& curve);

struct EvalReport {
  std::map<int, double> per_class_ap;  // classes without ground truths excluded
  double map_value = 0.0;
  std::vector<double> iou_thresholds;
};

/// Arithmetic mean of per-class APs; rejects an empty map.
double mean_ap(const std::map<int, double>& per_class_ap);

/// VOC-2007 protocol: 11-point AP per class at one IoU threshold.
EvalReport evaluate_voc07(const DetectionSet& dets, const GroundTruthSet& gts,
                          double iou_thresh = 0.5);

/// COCO protocol: 101-point AP per class, averaged over the given thresholds.
EvalReport coco_map(const DetectionSet& dets, const GroundTruthSet& gts,
                    const std::vector<double>& thresholds);

/// {0.50, 0.55, ..., 0.95} as exact double literals.
const std::vector<double>& coco_thresholds();

}  // namespace evalkit
