#pragma once

#include "minidet/loss.hpp"
#include "ndkit/tensor.hpp"

namespace minidet {

struct Sample {
  ndkit::Tensor image;  // [3, 64, 64]
  std::vector<evalkit::GroundTruth> gts;
};
using Dataset = std::vector<Sample>;

struct TrainResult {
  std::vector<std::pair<int, double>> loss_log;  // every log_every iterations
  double mean_seconds_per_iteration = 0.0;
};

/// Runs tc.iterations SGD steps; deterministic given seeds (timing excluded).
/// Aborts with a diagnostic naming the iteration if the loss goes non-finite.
TrainResult train(ModelState& model, const Dataset& data, const TrainConfig& tc,
                  const KeyMode& mode);

}  // namespace minidet
