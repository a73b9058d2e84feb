#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cipher/key.hpp"

namespace minidet {

enum class FeatureMap { F1, F2, F3 };

int feature_map_channels(FeatureMap map);  // 16 / 32 / 64
const char* feature_map_name(FeatureMap map);
FeatureMap feature_map_from_name(const std::string& name);

enum class EncryptionKind { None, CpFeature, ShfInput };

const char* encryption_kind_name(EncryptionKind kind);
EncryptionKind encryption_kind_from_name(const std::string& name);

/// Fixed toy architecture: 3x64x64 input, feature maps F1 16x32x32,
/// F2 32x16x16, F3 64x8x8, detection heads on F2 and F3 with two square
/// anchors per cell. Only the encryption placement varies.
struct MiniDetConfig {
  int image_size = 64;
  int num_classes = 3;  // plus one background logit
  EncryptionKind kind = EncryptionKind::None;
  std::optional<FeatureMap> encrypted_map;  // CpFeature only
  int shf_block = 1;                        // ShfInput only

  int background_class() const { return num_classes; }
  int num_anchors() const;  // 2*(16^2 + 8^2) = 640
  void validate() const;
};

struct LrPhase {
  int until_iteration = 0;  // exclusive bound
  double lr = 0.0;
};

struct TrainConfig {
  int iterations = 4000;
  std::vector<LrPhase> lr_schedule;
  double momentum = 0.9;
  double weight_decay = 0.0005;
  int batch_size = 16;
  uint64_t seed = 0;
  double loss_weight_loc = 1.0;
  int log_every = 100;

  double lr_at(int iteration) const;
  void validate() const;
};

/// Three-phase schedule: 2/3 of the run at 1e-3, then 1e-4, then 1e-5.
TrainConfig default_train_config(int iterations, uint64_t seed);

/// Evaluation-time key handling: correct key, no encryption, or none at all
/// because the model was trained unprotected.
struct KeyMode {
  enum class Kind { Plain, NoEnc, Keyed };
  Kind kind = Kind::Plain;
  cipher::PermutationKey key;               // Keyed only
  std::optional<FeatureMap> apply_at;       // override the model's declared location

  static KeyMode plain();
  static KeyMode no_enc();
  static KeyMode keyed(cipher::PermutationKey key, std::optional<FeatureMap> apply_at = {});
};

}  // namespace minidet
