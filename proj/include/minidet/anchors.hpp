#pragma once

#include <array>
#include <vector>

#include "evalkit/boxes.hpp"
#include "minidet/config.hpp"

namespace minidet {

struct Anchor {
  double cx = 0, cy = 0, w = 0, h = 0;
};

/// Anchor list in prediction order: F2 cells row-major x scales {0.3, 0.6},
/// then F3 cells row-major x scales {0.6, 0.9}.
std::vector<Anchor> make_anchors(const MiniDetConfig& cfg);

/// (dcx/w_a, dcy/h_a, ln(w_g/w_a), ln(h_g/h_a))
std::array<double, 4> encode_offsets(const evalkit::BoundingBox& gt, const Anchor& anchor);
/// Inverse of encode_offsets; corners are unclipped.
std::array<double, 4> decode_offsets(const std::array<double, 4>& offsets, const Anchor& anchor);

struct MatchTargets {
  std::vector<int> anchor_class;                // background_class when negative
  std::vector<std::array<double, 4>> offsets;   // valid where positive
  std::vector<char> positive;
  int num_positives = 0;
};

/// SSD-style matching: each GT claims its best-IoU anchor, then every anchor
/// with IoU >= iou_thresh joins the positives of its best GT.
MatchTargets match_anchors(const std::vector<evalkit::GroundTruth>& gts,
                           const std::vector<Anchor>& anchors, int background_class,
                           double iou_thresh = 0.5);

}  // namespace minidet
