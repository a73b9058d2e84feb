#include "minidet/postprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace minidet {

using evalkit::BoundingBox;
using evalkit::Detection;

std::vector<int> nms_keep(const std::vector<Detection>& dets, double iou_thresh) {
  std::vector<int> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&dets](int a, int b) {
    return dets[static_cast<size_t>(a)].confidence > dets[static_cast<size_t>(b)].confidence;
  });
  std::vector<int> keep;
  std::vector<bool> removed(dets.size(), false);
  for (size_t i = 0; i < order.size(); ++i) {
    const int a = order[i];
    if (removed[static_cast<size_t>(a)]) continue;
    keep.push_back(a);
    for (size_t j = i + 1; j < order.size(); ++j) {
      const int b = order[j];
      if (removed[static_cast<size_t>(b)]) continue;
      if (evalkit::iou(dets[static_cast<size_t>(a)].box, dets[static_cast<size_t>(b)].box) > iou_thresh) {
        removed[static_cast<size_t>(b)] = true;
      }
    }
  }
  return keep;
}

namespace {

void softmax_row(const double* row, int k, std::vector<double>& probs) {
  double m = row[0];
  for (int j = 1; j < k; ++j) m = std::max(m, row[j]);
  double denom = 0.0;
  for (int j = 0; j < k; ++j) {
    probs[static_cast<size_t>(j)] = std::exp(row[j] - m);
    denom += probs[static_cast<size_t>(j)];
  }
  for (int j = 0; j < k; ++j) probs[static_cast<size_t>(j)] /= denom;
}

}  // namespace

evalkit::DetectionSet postprocess(const RawPredictions& preds, const std::vector<Anchor>& anchors,
                                  const MiniDetConfig& cfg, const PostprocessConfig& pp) {
  const ndkit::Tensor& loc = preds.loc->value;
  const ndkit::Tensor& cls = preds.cls->value;
  const int batch = loc.dim(0), n = loc.dim(1), k = cls.dim(2);
  const double side = cfg.image_size;

  evalkit::DetectionSet result(static_cast<size_t>(batch));
  std::vector<double> probs(static_cast<size_t>(k));
  for (int bi = 0; bi < batch; ++bi) {
    // candidates per class, then per-class NMS
    std::vector<std::vector<Detection>> per_class(static_cast<size_t>(cfg.num_classes));
    for (int a = 0; a < n; ++a) {
      const double* cls_row = cls.data.data() + (static_cast<int64_t>(bi) * n + a) * k;
      softmax_row(cls_row, k, probs);
      const double* loc_row = loc.data.data() + (static_cast<int64_t>(bi) * n + a) * 4;
      std::array<double, 4> corners{};
      bool decoded = false;
      for (int c = 0; c < cfg.num_classes; ++c) {
        if (probs[static_cast<size_t>(c)] <= pp.conf_thresh) continue;
        if (!decoded) {
          corners = decode_offsets({loc_row[0], loc_row[1], loc_row[2], loc_row[3]},
                                   anchors[static_cast<size_t>(a)]);
          corners[0] = std::clamp(corners[0], 0.0, side);
          corners[1] = std::clamp(corners[1], 0.0, side);
          corners[2] = std::clamp(corners[2], 0.0, side);
          corners[3] = std::clamp(corners[3], 0.0, side);
          decoded = true;
        }
        if (!(corners[0] < corners[2]) || !(corners[1] < corners[3])) continue;  // clipped away
        per_class[static_cast<size_t>(c)].push_back(evalkit::make_detection(
            BoundingBox::make(corners[0], corners[1], corners[2], corners[3]), c,
            probs[static_cast<size_t>(c)]));
      }
    }

    std::vector<Detection> merged;
    for (auto& dets : per_class) {
      for (int idx : nms_keep(dets, pp.nms_iou)) merged.push_back(dets[static_cast<size_t>(idx)]);
    }
    std::stable_sort(merged.begin(), merged.end(), [](const Detection& a, const Detection& b) {
      return a.confidence > b.confidence;
    });
    if (static_cast<int>(merged.size()) > pp.max_dets) merged.resize(static_cast<size_t>(pp.max_dets));
    result[static_cast<size_t>(bi)] = std::move(merged);
  }
  return result;
}

evalkit::DetectionSet detect(const ModelState& model, const Dataset& data, const KeyMode& mode,
                             const PostprocessConfig& pp, int batch_size) {
  const std::vector<Anchor> anchors = make_anchors(model.config);
  const int side = model.config.image_size;
  evalkit::DetectionSet all;
  all.reserve(data.size());
  for (size_t start = 0; start < data.size(); start += static_cast<size_t>(batch_size)) {
    const int b = static_cast<int>(std::min<size_t>(static_cast<size_t>(batch_size), data.size() - start));
    ndkit::Tensor batch({b, 3, side, side});
    for (int i = 0; i < b; ++i) {
      const auto& img = data[start + static_cast<size_t>(i)].image;
      std::copy(img.data.begin(), img.data.end(),
                batch.data.begin() + static_cast<int64_t>(i) * 3 * side * side);
    }
    const RawPredictions preds = forward(model, batch, mode);
    auto dets = postprocess(preds, anchors, model.config, pp);
    for (auto& d : dets) all.push_back(std::move(d));
  }
  return all;
}

}  // namespace minidet
