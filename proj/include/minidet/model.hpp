#pragma once

#include <string>
#include <utility>
#include <vector>

#include "minidet/config.hpp"
#include "ndkit/optim.hpp"

namespace minidet {

/// All trainable state plus experiment bookkeeping. Checkpoints never store
/// the key itself, only its fingerprint.
struct ModelState {
  MiniDetConfig config;
  uint64_t init_seed = 0;
  std::string key_fingerprint = "none";
  std::vector<ndkit::Param> params;  // fixed declaration order
  std::vector<std::pair<int, double>> loss_log;
  double mean_seconds_per_iteration = 0.0;

  std::vector<ndkit::Param*> param_ptrs();
  int64_t parameter_count() const;
  ndkit::Param& param(const std::string& name);
  const ndkit::Param& param(const std::string& name) const;
};

ModelState build_model(const MiniDetConfig& cfg, uint64_t seed);

struct RawPredictions {
  ndkit::Var loc;  // [b, n_anchors, 4]
  ndkit::Var cls;  // [b, n_anchors, num_classes + 1]
};

/// Intermediate activations, for tests; fN_used is fN after the optional
/// permutation layer.
struct ForwardTaps {
  ndkit::Var f1, f1_used, f2, f2_used, f3, f3_used;
};

RawPredictions forward(const ModelState& model, const ndkit::Tensor& images,
                       const KeyMode& mode, ForwardTaps* taps = nullptr);

void save_checkpoint(const std::string& dir, const ModelState& model);
ModelState load_checkpoint(const std::string& dir);

}  // namespace minidet
