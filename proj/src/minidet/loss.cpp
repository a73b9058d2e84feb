#include "minidet/loss.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace minidet {

namespace {

// negatives per image when it has no positives
constexpr int kNegativeFloor = 8;
constexpr int kNegPosRatio = 3;

/// -log softmax(row)[background], stabilized.
double background_ce(const double* row, int k, int background_class) {
  double m = row[0];
  for (int j = 1; j < k; ++j) m = std::max(m, row[j]);
  double denom = 0.0;
  for (int j = 0; j < k; ++j) denom += std::exp(row[j] - m);
  return m + std::log(denom) - row[background_class];
}

}  // namespace

LossSelection select_training_anchors(const RawPredictions& preds,
                                      const std::vector<MatchTargets>& targets,
                                      int background_class) {
  const ndkit::Tensor& cls = preds.cls->value;
  if (cls.rank() != 3) {
    throw std::invalid_argument("select_training_anchors: cls must be [b,n,k]");
  }
  const int batch = cls.dim(0), n = cls.dim(1), k = cls.dim(2);
  if (static_cast<int>(targets.size()) != batch) {
    throw std::invalid_argument("select_training_anchors: " + std::to_string(targets.size()) +
                                " target sets for batch of " + std::to_string(batch));
  }

  LossSelection sel;
  for (int bi = 0; bi < batch; ++bi) {
    const MatchTargets& t = targets[static_cast<size_t>(bi)];
    if (static_cast<int>(t.anchor_class.size()) != n) {
      throw std::invalid_argument("select_training_anchors: target anchor count mismatch");
    }
    for (int a = 0; a < n; ++a) {
      if (!t.positive[static_cast<size_t>(a)]) continue;
      sel.conf_rows.push_back({bi, a, t.anchor_class[static_cast<size_t>(a)]});
      sel.loc_rows.push_back({bi, a, t.anchor_class[static_cast<size_t>(a)]});
      sel.loc_targets.push_back(t.offsets[static_cast<size_t>(a)]);
    }
    sel.num_positives += t.num_positives;

    const int want = t.num_positives > 0 ? kNegPosRatio * t.num_positives : kNegativeFloor;
    std::vector<std::pair<double, int>> candidates;  // (loss, anchor)
    candidates.reserve(static_cast<size_t>(n));
    for (int a = 0; a < n; ++a) {
      if (t.positive[static_cast<size_t>(a)]) continue;
      const double* row = cls.data.data() + (static_cast<int64_t>(bi) * n + a) * k;
      candidates.emplace_back(background_ce(row, k, background_class), a);
    }
    const int take = std::min<int>(want, static_cast<int>(candidates.size()));
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const auto& x, const auto& y) { return x.first > y.first; });
    for (int i = 0; i < take; ++i) {
      sel.conf_rows.push_back({bi, candidates[static_cast<size_t>(i)].second, background_class});
      ++sel.num_negatives;
    }
  }
  return sel;
}

DetectionLoss detection_loss(const RawPredictions& preds, const LossSelection& sel,
                             double loss_weight_loc) {
  DetectionLoss out;
  out.num_positives = sel.num_positives;
  out.num_negatives = sel.num_negatives;

  std::vector<std::pair<int, int>> conf_index;
  std::vector<int> labels;
  conf_index.reserve(sel.conf_rows.size());
  for (const auto& row : sel.conf_rows) {
    conf_index.emplace_back(row.image, row.anchor);
    labels.push_back(row.label);
  }
  if (conf_index.empty()) {
    throw std::invalid_argument("detection_loss: empty anchor selection");
  }
  // cross-entropy summed over the selected rows; with the positive-count
  // normalization below this is the standard SSD confidence term
  const ndkit::Var conf = ndkit::scale(
      ndkit::softmax_cross_entropy(ndkit::gather_rows(preds.cls, conf_index), labels),
      static_cast<double>(conf_index.size()));

  ndkit::Var total;
  if (!sel.loc_rows.empty()) {
    std::vector<std::pair<int, int>> loc_index;
    loc_index.reserve(sel.loc_rows.size());
    ndkit::Tensor loc_target({static_cast<int>(sel.loc_rows.size()), 4});
    for (size_t i = 0; i < sel.loc_rows.size(); ++i) {
      loc_index.emplace_back(sel.loc_rows[i].image, sel.loc_rows[i].anchor);
      for (int j = 0; j < 4; ++j) loc_target.at2(static_cast<int>(i), j) = sel.loc_targets[i][static_cast<size_t>(j)];
    }
    const ndkit::Var loc = ndkit::smooth_l1(ndkit::gather_rows(preds.loc, loc_index), loc_target);
    out.loc_value = loc->scalar();
    total = ndkit::add(conf, ndkit::scale(loc, loss_weight_loc));
  } else {
    out.loc_value = 0.0;
    total = conf;
  }
  out.conf_value = conf->scalar();
  out.total = ndkit::scale(total, 1.0 / std::max(1, sel.num_positives));
  return out;
}

DetectionLoss detection_loss(const RawPredictions& preds,
                             const std::vector<std::vector<evalkit::GroundTruth>>& gts,
                             const std::vector<Anchor>& anchors, int background_class,
                             double loss_weight_loc) {
  std::vector<MatchTargets> targets;
  targets.reserve(gts.size());
  for (const auto& image_gts : gts) {
    targets.push_back(match_anchors(image_gts, anchors, background_class));
  }
  return detection_loss(preds, select_training_anchors(preds, targets, background_class),
                        loss_weight_loc);
}

}  // namespace minidet
