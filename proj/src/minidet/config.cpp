#include "minidet/config.hpp"

#include <algorithm>
#include <stdexcept>

namespace minidet {

int feature_map_channels(FeatureMap map) {
  switch (map) {
    case FeatureMap::F1: return 16;
    case FeatureMap::F2: return 32;
    case FeatureMap::F3: return 64;
  }
  throw std::invalid_argument("unknown feature map");
}

const char* feature_map_name(FeatureMap map) {
  switch (map) {
    case FeatureMap::F1: return "F1";
    case FeatureMap::F2: return "F2";
    case FeatureMap::F3: return "F3";
  }
  throw std::invalid_argument("unknown feature map");
}

FeatureMap feature_map_from_name(const std::string& name) {
  if (name == "F1") return FeatureMap::F1;
  if (name == "F2") return FeatureMap::F2;
  if (name == "F3") return FeatureMap::F3;
  throw std::invalid_argument("unknown feature map \"" + name + "\"");
}

const char* encryption_kind_name(EncryptionKind kind) {
  switch (kind) {
    case EncryptionKind::None: return "none";
    case EncryptionKind::CpFeature: return "cp_feature";
    case EncryptionKind::ShfInput: return "shf_input";
  }
  throw std::invalid_argument("unknown encryption kind");
}

EncryptionKind encryption_kind_from_name(const std::string& name) {
  if (name == "none") return EncryptionKind::None;
  if (name == "cp_feature") return EncryptionKind::CpFeature;
  if (name == "shf_input") return EncryptionKind::ShfInput;
  throw std::invalid_argument("unknown encryption kind \"" + name + "\"");
}

int MiniDetConfig::num_anchors() const {
  const int f2_cells = (image_size / 4) * (image_size / 4);
  const int f3_cells = (image_size / 8) * (image_size / 8);
  return 2 * (f2_cells + f3_cells);
}

void MiniDetConfig::validate() const {
  if (image_size != 64) throw std::invalid_argument("config: image size is fixed at 64");
  if (num_classes < 1) throw std::invalid_argument("config: need at least one class");
  switch (kind) {
    case EncryptionKind::None:
      if (encrypted_map) throw std::invalid_argument("config: encrypted_map set without CP");
      break;
    case EncryptionKind::CpFeature:
      if (!encrypted_map) throw std::invalid_argument("config: CP requires an encrypted map");
      if (feature_map_channels(*encrypted_map) < 16) {
        throw std::invalid_argument("config: encrypted map must have at least 16 channels");
      }
      break;
    case EncryptionKind::ShfInput:
      if (encrypted_map) throw std::invalid_argument("config: SHF encrypts the input, not a map");
      if (shf_block < 1 || image_size % shf_block != 0) {
        throw std::invalid_argument("config: image size not divisible by SHF block " +
                                    std::to_string(shf_block));
      }
      break;
  }
}

double TrainConfig::lr_at(int iteration) const {
  for (const LrPhase& phase : lr_schedule) {
    if (iteration < phase.until_iteration) return phase.lr;
  }
  return lr_schedule.back().lr;
}

void TrainConfig::validate() const {
  if (iterations < 0) throw std::invalid_argument("train config: negative iteration count");
  if (batch_size < 1) throw std::invalid_argument("train config: batch size must be positive");
  if (log_every < 1) throw std::invalid_argument("train config: log_every must be positive");
  if (lr_schedule.empty()) throw std::invalid_argument("train config: empty lr schedule");
  int prev = 0;
  for (size_t i = 0; i < lr_schedule.size(); ++i) {
    if (lr_schedule[i].until_iteration <= prev && i > 0) {
      throw std::invalid_argument("train config: lr schedule bounds must strictly increase");
    }
    prev = lr_schedule[i].until_iteration;
  }
}

TrainConfig default_train_config(int iterations, uint64_t seed) {
  TrainConfig tc;
  tc.iterations = iterations;
  tc.seed = seed;
  const int first = iterations * 2 / 3;
  const int second = first + (iterations - first) / 2;
  if (first >= 1 && second > first && iterations > second) {
    tc.lr_schedule = {{first, 1e-3}, {second, 1e-4}, {iterations, 1e-5}};
  } else {
    // runs too short for three phases keep the initial rate throughout
    tc.lr_schedule = {{std::max(iterations, 1), 1e-3}};
  }
  return tc;
}

KeyMode KeyMode::plain() { return KeyMode{Kind::Plain, {}, {}}; }

KeyMode KeyMode::no_enc() { return KeyMode{Kind::NoEnc, {}, {}}; }

KeyMode KeyMode::keyed(cipher::PermutationKey key, std::optional<FeatureMap> apply_at) {
  return KeyMode{Kind::Keyed, std::move(key), apply_at};
}

}  // namespace minidet
