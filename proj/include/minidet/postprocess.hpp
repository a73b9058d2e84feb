#pragma once

#include "evalkit/metrics.hpp"
#include "minidet/model.hpp"
#include "minidet/train.hpp"

namespace minidet {

struct PostprocessConfig {
  double conf_thresh = 0.05;
  double nms_iou = 0.45;
  int max_dets = 50;
};

/// Decode offsets to corner boxes clipped to the image, then per-class NMS
/// and a global top-k by confidence.
evalkit::DetectionSet postprocess(const RawPredictions& preds,
                                  const std::vector<Anchor>& anchors, const MiniDetConfig& cfg,
                                  const PostprocessConfig& pp = {});

/// Indices of the detections kept by greedy same-class NMS, in descending
/// confidence order.
std::vector<int> nms_keep(const std::vector<evalkit::Detection>& dets, double iou_thresh);

/// Batched inference over a dataset; one detection list per image.
evalkit::DetectionSet detect(const ModelState& model, const Dataset& data, const KeyMode& mode,
                             const PostprocessConfig& pp = {}, int batch_size = 16);

}  // namespace minidet
