#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bench/dataset.hpp"
#include "bench/manifest.hpp"
#include "minidet/model.hpp"
#include "minidet/postprocess.hpp"

namespace bench {

enum class Mode { Baseline, ShfInput, CpFeature };

const char* mode_name(Mode mode);
Mode mode_from_name(const std::string& name);

struct EvalProtocol {
  bool correct = true;
  bool no_enc = true;
  int incorrect_samples = 20;  // 0 disables the Incorrect column
};

struct ExperimentConfig {
  Mode mode = Mode::Baseline;
  int shf_block = 1;                                   // ShfInput
  minidet::FeatureMap cp_map = minidet::FeatureMap::F2;  // CpFeature
  DatasetSpec dataset;
  minidet::TrainConfig train;
  EvalProtocol protocol;
  uint64_t seed = 0;  // master seed; key/init/incorrect streams derive from it

  minidet::MiniDetConfig model_config() const;
  nlohmann::json to_json() const;
  static ExperimentConfig from_json(const nlohmann::json& j);
  std::string config_hash() const;
  /// Row label for result tables: baseline, shf_m4, cp_f2, ...
  std::string mode_label() const;
};

struct ModeResult {
  std::string key_mode;  // correct / noenc / incorrect / plain
  double map = 0.0;
  int samples = 1;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<ModeResult> rows;
  std::vector<std::pair<int, double>> loss_log;
  double mean_seconds_per_iteration = 0.0;
  std::string run_dir;

  double map_for(const std::string& key_mode) const;
};

/// Encrypt every image of a dataset with SHF (used for the encrypted-input
/// baseline; M = 1 degenerates to an RGB channel permutation).
minidet::Dataset encrypt_images(const minidet::Dataset& data,
                                const cipher::PermutationKey& key, int block);

/// mAP (VOC-2007, IoU 0.5) of a model on a test set under one key mode.
double eval_map(const minidet::ModelState& model, const minidet::Dataset& test,
                const minidet::KeyMode& mode);

/// The key a CpFeature/ShfInput experiment trains with.
cipher::PermutationKey experiment_key(const ExperimentConfig& cfg);

/// Trains per the config, evaluates each requested key mode, and writes the
/// run directory (manifest, results CSV/JSON, checkpoint, loss log) under
/// out_root/<config_hash>. Returns the rows in Correct / No-enc / Incorrect
/// order.
ExperimentResult run_experiment(const ExperimentConfig& cfg, const std::string& out_root,
                                const minidet::Dataset* train_override = nullptr,
                                const minidet::Dataset* test_override = nullptr);

struct DepthTrendRow {
  minidet::FeatureMap map;
  double correct = 0.0;
  double no_enc = 0.0;
  double incorrect_mean = 0.0;
};

struct DepthTrend {
  std::vector<DepthTrendRow> rows;  // shallow to deep
  bool no_enc_nondecreasing = false;
};

/// Expects one CpFeature result per feature map, shallow to deep.
DepthTrend depth_trend(const std::vector<ExperimentResult>& results);
void write_depth_trend_csv(const std::string& path, const DepthTrend& trend);

void write_results_csv(const std::string& path, const std::string& mode_label,
                       const std::vector<ModeResult>& rows);
std::vector<ModeResult> read_results_csv(const std::string& path);

}  // namespace bench
