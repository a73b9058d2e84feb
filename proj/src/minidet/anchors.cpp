#include "minidet/anchors.hpp"

#include <cmath>
#include <stdexcept>

namespace minidet {

std::vector<Anchor> make_anchors(const MiniDetConfig& cfg) {
  const double side = cfg.image_size;
  std::vector<Anchor> anchors;
  anchors.reserve(static_cast<size_t>(cfg.num_anchors()));
  const struct {
    int cells;
    double scales[2];
  } levels[2] = {{cfg.image_size / 4, {0.3, 0.6}}, {cfg.image_size / 8, {0.6, 0.9}}};
  for (const auto& level : levels) {
    const double stride = side / level.cells;
    for (int y = 0; y < level.cells; ++y) {
      for (int x = 0; x < level.cells; ++x) {
        for (double scale : level.scales) {
          const double size = scale * side;
          anchors.push_back({(x + 0.5) * stride, (y + 0.5) * stride, size, size});
        }
      }
    }
  }
  return anchors;
}

std::array<double, 4> encode_offsets(const evalkit::BoundingBox& gt, const Anchor& anchor) {
  const double gcx = 0.5 * (gt.x_min + gt.x_max);
  const double gcy = 0.5 * (gt.y_min + gt.y_max);
  return {(gcx - anchor.cx) / anchor.w, (gcy - anchor.cy) / anchor.h,
          std::log(gt.width() / anchor.w), std::log(gt.height() / anchor.h)};
}

std::array<double, 4> decode_offsets(const std::array<double, 4>& offsets, const Anchor& anchor) {
  // exp() clamp keeps a wild untrained head from overflowing
  const double cx = anchor.cx + offsets[0] * anchor.w;
  const double cy = anchor.cy + offsets[1] * anchor.h;
  const double w = anchor.w * std::exp(std::min(offsets[2], 10.0));
  const double h = anchor.h * std::exp(std::min(offsets[3], 10.0));
  return {cx - 0.5 * w, cy - 0.5 * h, cx + 0.5 * w, cy + 0.5 * h};
}

namespace {

evalkit::BoundingBox anchor_box(const Anchor& a) {
  return evalkit::BoundingBox::make(a.cx - 0.5 * a.w, a.cy - 0.5 * a.h, a.cx + 0.5 * a.w,
                                    a.cy + 0.5 * a.h);
}

}  // namespace

MatchTargets match_anchors(const std::vector<evalkit::GroundTruth>& gts,
                           const std::vector<Anchor>& anchors, int background_class,
                           double iou_thresh) {
  const int n = static_cast<int>(anchors.size());
  MatchTargets targets;
  targets.anchor_class.assign(static_cast<size_t>(n), background_class);
  targets.offsets.assign(static_cast<size_t>(n), {0, 0, 0, 0});
  targets.positive.assign(static_cast<size_t>(n), 0);
  if (gts.empty()) return targets;

  std::vector<std::vector<double>> overlap(gts.size());
  for (size_t g = 0; g < gts.size(); ++g) {
    overlap[g].resize(static_cast<size_t>(n));
    for (int a = 0; a < n; ++a) {
      overlap[g][static_cast<size_t>(a)] = evalkit::iou(gts[g].box, anchor_box(anchors[static_cast<size_t>(a)]));
    }
  }

  // anchor -> matched gt; -1 when background
  std::vector<int> assigned(static_cast<size_t>(n), -1);

  // threshold matches first: each anchor joins its best-IoU gt
  for (int a = 0; a < n; ++a) {
    int best_gt = -1;
    double best = 0.0;
    for (size_t g = 0; g < gts.size(); ++g) {
      if (overlap[g][static_cast<size_t>(a)] > best) {
        best = overlap[g][static_cast<size_t>(a)];
        best_gt = static_cast<int>(g);
      }
    }
    if (best_gt >= 0 && best >= iou_thresh) assigned[static_cast<size_t>(a)] = best_gt;
  }

  // forced matches: every gt claims its best anchor, overriding a threshold
  // match so that no gt is left without a positive
  for (size_t g = 0; g < gts.size(); ++g) {
    int best_anchor = 0;
    double best = -1.0;
    for (int a = 0; a < n; ++a) {
      if (overlap[g][static_cast<size_t>(a)] > best) {
        best = overlap[g][static_cast<size_t>(a)];
        best_anchor = a;
      }
    }
    assigned[static_cast<size_t>(best_anchor)] = static_cast<int>(g);
  }

  for (int a = 0; a < n; ++a) {
    const int g = assigned[static_cast<size_t>(a)];
    if (g < 0) continue;
    targets.positive[static_cast<size_t>(a)] = 1;
    targets.anchor_class[static_cast<size_t>(a)] = gts[static_cast<size_t>(g)].class_id;
    targets.offsets[static_cast<size_t>(a)] =
        encode_offsets(gts[static_cast<size_t>(g)].box, anchors[static_cast<size_t>(a)]);
    ++targets.num_positives;
  }
  return targets;
}

}  // namespace minidet
