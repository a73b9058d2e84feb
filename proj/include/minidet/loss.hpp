#pragma once

#include "minidet/anchors.hpp"
#include "minidet/model.hpp"

namespace minidet {

/// Anchors chosen for the confidence loss plus localization targets for the
/// positives. Selection is treated as constant by the loss graph.
struct LossSelection {
  struct Row {
    int image = 0;
    int anchor = 0;
    int label = 0;  // class id, or background for mined negatives
  };
  std::vector<Row> conf_rows;
  std::vector<Row> loc_rows;  // positives only
  std::vector<std::array<double, 4>> loc_targets;
  int num_positives = 0;
  int num_negatives = 0;
};

/// Hard-negative mining per image at 3:1 against positives (8 negatives when
/// an image has none), ranked by background cross-entropy of the current
/// logits; ties break toward the lower anchor index.
LossSelection select_training_anchors(const RawPredictions& preds,
                                      const std::vector<MatchTargets>& targets,
                                      int background_class);

struct DetectionLoss {
  ndkit::Var total;
  double conf_value = 0.0;
  double loc_value = 0.0;
  int num_positives = 0;
  int num_negatives = 0;
};

/// conf = cross-entropy summed over the selected rows, loc = smooth L1 over
/// the positives; total = (conf + loss_weight_loc * loc) / max(1, #positives).
DetectionLoss detection_loss(const RawPredictions& preds, const LossSelection& selection,
                             double loss_weight_loc);

/// match + mine + loss in one call.
DetectionLoss detection_loss(const RawPredictions& preds,
                             const std::vector<std::vector<evalkit::GroundTruth>>& gts,
                             const std::vector<Anchor>& anchors, int background_class,
                             double loss_weight_loc);

}  // namespace minidet
