#include "evalkit/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <stdexcept>

namespace evalkit {

namespace {

std::vector<int> rank_by_confidence(const std::vector<Detection>& dets) {
  std::vector<int> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&dets](int a, int b) {
    return dets[static_cast<size_t>(a)].confidence > dets[static_cast<size_t>(b)].confidence;
  });
  return order;
}

}  // namespace

MatchResult classify_tp_fp(const std::vector<Detection>& dets,
                           const std::vector<GroundTruth>& gts, double iou_thresh) {
  MatchResult result;
  result.ranked = rank_by_confidence(dets);
  result.tp.assign(dets.size(), false);
  std::vector<bool> gt_matched(gts.size(), false);

  for (size_t r = 0; r < result.ranked.size(); ++r) {
    const Detection& det = dets[static_cast<size_t>(result.ranked[r])];
    int best_gt = -1;
    double best_iou = 0.0;
    for (size_t g = 0; g < gts.size(); ++g) {
      if (gt_matched[g] || gts[g].class_id != det.class_id) continue;
      const double v = iou(det.box, gts[g].box);
      if (v > best_iou) {
        best_iou = v;
        best_gt = static_cast<int>(g);
      }
    }
    if (best_gt >= 0 && best_iou >= iou_thresh) {
      result.tp[r] = true;
      gt_matched[static_cast<size_t>(best_gt)] = true;
    }
  }
  result.false_negatives =
      static_cast<int>(std::count(gt_matched.begin(), gt_matched.end(), false));
  return result;
}

std::vector<PrPoint> precision_recall(const std::vector<bool>& ranked_tp, int n_gt) {
  if (n_gt < 0) throw std::invalid_argument("precision_recall: negative ground-truth count");
  std::vector<PrPoint> curve;
  if (n_gt == 0) return curve;
  curve.reserve(ranked_tp.size());
  int tp = 0, fp = 0;
  for (bool flag : ranked_tp) {
    flag ? ++tp : ++fp;
    curve.push_back({static_cast<double>(tp) / n_gt, static_cast<double>(tp) / (tp + fp)});
  }
  return curve;
}

namespace {

double interpolated_ap(const std::vector<PrPoint>& curve, int points) {
  if (curve.empty()) return 0.0;
  double total = 0.0;
  for (int i = 0; i < points; ++i) {
    const double r = static_cast<double>(i) / (points - 1);
    double best = 0.0;
    for (const PrPoint& p : curve) {
      if (p.recall >= r) best = std::max(best, p.precision);
    }
    total += best;
  }
  return total / points;
}

}  // namespace

double average_precision_voc07(const std::vector<PrPoint>& curve) {
  return interpolated_ap(curve, 11);
}

double average_precision_101pt(const std::vector<PrPoint>& curve) {
  return interpolated_ap(curve, 101);
}

double mean_ap(const std::map<int, double>& per_class_ap) {
  if (per_class_ap.empty()) {
    throw std::invalid_argument("mean_ap: no class has ground truths");
  }
  double total = 0.0;
  for (const auto& [cls, ap] : per_class_ap) total += ap;
  return total / static_cast<double>(per_class_ap.size());
}

namespace {

void check_sets(const DetectionSet& dets, const GroundTruthSet& gts) {
  if (dets.size() != gts.size()) {
    throw std::invalid_argument("evaluate: " + std::to_string(dets.size()) +
                                " detection images vs " + std::to_string(gts.size()) +
                                " ground-truth images");
  }
}

std::set<int> classes_with_gts(const GroundTruthSet& gts) {
  std::set<int> classes;
  for (const auto& image : gts) {
    for (const auto& gt : image) classes.insert(gt.class_id);
  }
  return classes;
}

/// Confidence-ranked TP flags for one class across all images. Matching is
/// per image: a detection may claim only a still-unmatched GT of its image.
std::vector<bool> ranked_class_tp(const DetectionSet& dets, const GroundTruthSet& gts,
                                  int class_id, double iou_thresh, int* n_gt_out) {
  struct Ref {
    double conf;
    int image;
    int index;
  };
  std::vector<Ref> refs;
  for (size_t img = 0; img < dets.size(); ++img) {
    for (size_t i = 0; i < dets[img].size(); ++i) {
      if (dets[img][i].class_id == class_id) {
        refs.push_back({dets[img][i].confidence, static_cast<int>(img), static_cast<int>(i)});
      }
    }
  }
  std::stable_sort(refs.begin(), refs.end(), [](const Ref& a, const Ref& b) {
    return a.conf > b.conf;
  });

  int n_gt = 0;
  std::vector<std::vector<bool>> matched(gts.size());
  for (size_t img = 0; img < gts.size(); ++img) {
    matched[img].assign(gts[img].size(), false);
    for (const auto& gt : gts[img]) {
      if (gt.class_id == class_id) ++n_gt;
    }
  }
  if (n_gt_out) *n_gt_out = n_gt;

  std::vector<bool> flags;
  flags.reserve(refs.size());
  for (const Ref& ref : refs) {
    const Detection& det = dets[static_cast<size_t>(ref.image)][static_cast<size_t>(ref.index)];
    const auto& image_gts = gts[static_cast<size_t>(ref.image)];
    int best_gt = -1;
    double best_iou = 0.0;
    for (size_t g = 0; g < image_gts.size(); ++g) {
      if (matched[static_cast<size_t>(ref.image)][g] || image_gts[g].class_id != class_id) continue;
      const double v = iou(det.box, image_gts[g].box);
      if (v > best_iou) {
        best_iou = v;
        best_gt = static_cast<int>(g);
      }
    }
    if (best_gt >= 0 && best_iou >= iou_thresh) {
      flags.push_back(true);
      matched[static_cast<size_t>(ref.image)][static_cast<size_t>(best_gt)] = true;
    } else {
      flags.push_back(false);
    }
  }
  return flags;
}

}  // namespace

EvalReport evaluate_voc07(const DetectionSet& dets, const GroundTruthSet& gts,
                          double iou_thresh) {
  check_sets(dets, gts);
  EvalReport report;
  report.iou_thresholds = {iou_thresh};
  for (int cls : classes_with_gts(gts)) {
    int n_gt = 0;
    const auto flags = ranked_class_tp(dets, gts, cls, iou_thresh, &n_gt);
    report.per_class_ap[cls] = average_precision_voc07(precision_recall(flags, n_gt));
  }
  report.map_value = mean_ap(report.per_class_ap);
  return report;
}

EvalReport coco_map(const DetectionSet& dets, const GroundTruthSet& gts,
                    const std::vector<double>& thresholds) {
  check_sets(dets, gts);
  if (thresholds.empty()) throw std::invalid_argument("coco_map: thresholds must be non-empty");
  EvalReport report;
  report.iou_thresholds = thresholds;
  for (int cls : classes_with_gts(gts)) {
    double total = 0.0;
    for (double thresh : thresholds) {
      int n_gt = 0;
      const auto flags = ranked_class_tp(dets, gts, cls, thresh, &n_gt);
      total += average_precision_101pt(precision_recall(flags, n_gt));
    }
    report.per_class_ap[cls] = total / static_cast<double>(thresholds.size());
  }
  report.map_value = mean_ap(report.per_class_ap);
  return report;
}

const std::vector<double>& coco_thresholds() {
  static const std::vector<double> thresholds{0.5,  0.55, 0.6,  0.65, 0.7,
                                              0.75, 0.8,  0.85, 0.9,  0.95};
  return thresholds;
}

}  // namespace evalkit
