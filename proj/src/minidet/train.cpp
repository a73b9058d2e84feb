#include "minidet/train.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "cipher/key.hpp"
#include "ndkit/rng.hpp"

namespace minidet {

TrainResult train(ModelState& model, const Dataset& data, const TrainConfig& tc,
                  const KeyMode& mode) {
  tc.validate();
  if (data.empty()) throw std::invalid_argument("train: empty dataset");
  if (static_cast<int>(data.size()) < tc.batch_size) {
    throw std::invalid_argument("train: dataset smaller than one batch");
  }

  const std::vector<Anchor> anchors = make_anchors(model.config);
  const int bg = model.config.background_class();

  // anchors and ground truths are fixed, so matching is done once per image
  std::vector<MatchTargets> all_targets;
  all_targets.reserve(data.size());
  for (const auto& sample : data) {
    all_targets.push_back(match_anchors(sample.gts, anchors, bg));
  }

  if (mode.kind == KeyMode::Kind::Keyed) {
    model.key_fingerprint = cipher::key_fingerprint(mode.key);
  }

  ndkit::Rng batch_rng(ndkit::derive_seed(tc.seed, "batches"));
  std::vector<int> order = batch_rng.permutation(static_cast<int>(data.size()));
  size_t cursor = 0;

  const int side = model.config.image_size;
  ndkit::Tensor batch({tc.batch_size, 3, side, side});
  std::vector<MatchTargets> batch_targets(static_cast<size_t>(tc.batch_size));

  TrainResult result;
  auto params = model.param_ptrs();
  double total_seconds = 0.0;

  for (int iter = 0; iter < tc.iterations; ++iter) {
    // next batch; reshuffle at epoch boundaries, dropping short remainders
    if (cursor + static_cast<size_t>(tc.batch_size) > order.size()) {
      order = batch_rng.permutation(static_cast<int>(data.size()));
      cursor = 0;
    }
    for (int i = 0; i < tc.batch_size; ++i) {
      const int src = order[cursor + static_cast<size_t>(i)];
      const Sample& sample = data[static_cast<size_t>(src)];
      std::copy(sample.image.data.begin(), sample.image.data.end(),
                batch.data.begin() + static_cast<int64_t>(i) * 3 * side * side);
      batch_targets[static_cast<size_t>(i)] = all_targets[static_cast<size_t>(src)];
    }
    cursor += static_cast<size_t>(tc.batch_size);

    const auto t0 = std::chrono::steady_clock::now();
    const RawPredictions preds = forward(model, batch, mode);
    const LossSelection sel = select_training_anchors(preds, batch_targets, bg);
    const DetectionLoss loss = detection_loss(preds, sel, tc.loss_weight_loc);
    const double loss_value = loss.total->scalar();
    if (!std::isfinite(loss_value)) {
      throw std::runtime_error("training diverged at iteration " + std::to_string(iter) +
                               " (loss is not finite)");
    }
    ndkit::backward(loss.total);
    ndkit::sgd_step(params, {tc.lr_at(iter), tc.momentum, tc.weight_decay});
    const auto t1 = std::chrono::steady_clock::now();
    total_seconds += std::chrono::duration<double>(t1 - t0).count();

    if (iter % tc.log_every == 0) result.loss_log.emplace_back(iter, loss_value);
  }

  if (tc.iterations > 0) result.mean_seconds_per_iteration = total_seconds / tc.iterations;
  model.loss_log = result.loss_log;
  model.mean_seconds_per_iteration = result.mean_seconds_per_iteration;
  return result;
}

}  // namespace minidet
