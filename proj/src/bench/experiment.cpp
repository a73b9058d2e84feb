#include "bench/experiment.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "bench/reports.hpp"
#include "cipher/permute.hpp"
#include "evalkit/metrics.hpp"
#include "minidet/json_io.hpp"
#include "ndkit/rng.hpp"

namespace bench {

namespace fs = std::filesystem;
using minidet::KeyMode;

const char* mode_name(Mode mode) {
  switch (mode) {
    case Mode::Baseline: return "baseline";
    case Mode::ShfInput: return "shf_input";
    case Mode::CpFeature: return "cp_feature";
  }
  throw std::invalid_argument("unknown experiment mode");
}

Mode mode_from_name(const std::string& name) {
  if (name == "baseline") return Mode::Baseline;
  if (name == "shf_input") return Mode::ShfInput;
  if (name == "cp_feature") return Mode::CpFeature;
  throw std::invalid_argument("unknown experiment mode \"" + name + "\"");
}

minidet::MiniDetConfig ExperimentConfig::model_config() const {
  minidet::MiniDetConfig mc;
  switch (mode) {
    case Mode::Baseline:
      break;
    case Mode::ShfInput:
      mc.kind = minidet::EncryptionKind::ShfInput;
      mc.shf_block = shf_block;
      break;
    case Mode::CpFeature:
      mc.kind = minidet::EncryptionKind::CpFeature;
      mc.encrypted_map = cp_map;
      break;
  }
  mc.validate();
  return mc;
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j;
  j["mode"] = mode_name(mode);
  j["shf_block"] = shf_block;
  j["cp_map"] = feature_map_name(cp_map);
  {
    nlohmann::json d;
    d["n_train"] = dataset.n_train;
    d["n_test"] = dataset.n_test;
    d["image_size"] = dataset.image_size;
    d["min_objects"] = dataset.min_objects;
    d["max_objects"] = dataset.max_objects;
    d["min_size"] = dataset.min_size;
    d["max_size"] = dataset.max_size;
    d["background_low"] = dataset.background_low;
    d["background_high"] = dataset.background_high;
    d["color_low"] = dataset.color_low;
    d["color_high"] = dataset.color_high;
    d["pixel_noise"] = dataset.pixel_noise;
    d["max_pairwise_iou"] = dataset.max_pairwise_iou;
    d["seed"] = std::to_string(dataset.seed);
    j["dataset"] = std::move(d);
  }
  j["train"] = minidet::train_config_to_json(train);
  j["protocol"] = {{"correct", protocol.correct},
                   {"no_enc", protocol.no_enc},
                   {"incorrect_samples", protocol.incorrect_samples}};
  j["seed"] = std::to_string(seed);
  return j;
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  ExperimentConfig cfg;
  cfg.mode = mode_from_name(j.at("mode").get<std::string>());
  cfg.shf_block = j.at("shf_block").get<int>();
  cfg.cp_map = minidet::feature_map_from_name(j.at("cp_map").get<std::string>());
  {
    const auto& d = j.at("dataset");
    cfg.dataset.n_train = d.at("n_train").get<int>();
    cfg.dataset.n_test = d.at("n_test").get<int>();
    cfg.dataset.image_size = d.at("image_size").get<int>();
    cfg.dataset.min_objects = d.at("min_objects").get<int>();
    cfg.dataset.max_objects = d.at("max_objects").get<int>();
    cfg.dataset.min_size = d.at("min_size").get<double>();
    cfg.dataset.max_size = d.at("max_size").get<double>();
    cfg.dataset.background_low = d.at("background_low").get<double>();
    cfg.dataset.background_high = d.at("background_high").get<double>();
    cfg.dataset.color_low = d.at("color_low").get<double>();
    cfg.dataset.color_high = d.at("color_high").get<double>();
    cfg.dataset.pixel_noise = d.at("pixel_noise").get<double>();
    cfg.dataset.max_pairwise_iou = d.at("max_pairwise_iou").get<double>();
    cfg.dataset.seed = std::stoull(d.at("seed").get<std::string>());
  }
  cfg.train = minidet::train_config_from_json(j.at("train"));
  cfg.protocol.correct = j.at("protocol").at("correct").get<bool>();
  cfg.protocol.no_enc = j.at("protocol").at("no_enc").get<bool>();
  cfg.protocol.incorrect_samples = j.at("protocol").at("incorrect_samples").get<int>();
  cfg.seed = std::stoull(j.at("seed").get<std::string>());
  return cfg;
}

std::string ExperimentConfig::config_hash() const { return json_hash(to_json()); }

std::string ExperimentConfig::mode_label() const {
  switch (mode) {
    case Mode::Baseline: return "baseline";
    case Mode::ShfInput: return "shf_m" + std::to_string(shf_block);
    case Mode::CpFeature: {
      std::string name = feature_map_name(cp_map);
      std::transform(name.begin(), name.end(), name.begin(), ::tolower);
      return "cp_" + name;
    }
  }
  throw std::invalid_argument("unknown experiment mode");
}

double ExperimentResult::map_for(const std::string& key_mode) const {
  for (const auto& row : rows) {
    if (row.key_mode == key_mode) return row.map;
  }
  throw std::invalid_argument("no result row for key mode \"" + key_mode + "\"");
}

minidet::Dataset encrypt_images(const minidet::Dataset& data, const cipher::PermutationKey& key,
                                int block) {
  minidet::Dataset out;
  out.reserve(data.size());
  for (const auto& sample : data) {
    out.push_back({cipher::encrypt_shf(sample.image, block, key), sample.gts});
  }
  return out;
}

double eval_map(const minidet::ModelState& model, const minidet::Dataset& test,
                const KeyMode& mode) {
  const evalkit::DetectionSet dets = minidet::detect(model, test, mode);
  evalkit::GroundTruthSet gts;
  gts.reserve(test.size());
  for (const auto& sample : test) gts.push_back(sample.gts);
  return evalkit::evaluate_voc07(dets, gts).map_value;
}

cipher::PermutationKey experiment_key(const ExperimentConfig& cfg) {
  const uint64_t key_seed = ndkit::derive_seed(cfg.seed, "key");
  switch (cfg.mode) {
    case Mode::ShfInput:
      return cipher::keygen(3 * cfg.shf_block * cfg.shf_block, key_seed);
    case Mode::CpFeature:
      return cipher::keygen(minidet::feature_map_channels(cfg.cp_map), key_seed);
    case Mode::Baseline:
      break;
  }
  throw std::invalid_argument("baseline experiments have no key");
}

namespace {

void write_loss_log_csv(const std::string& path, const std::vector<std::pair<int, double>>& log) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "iteration,loss\n";
  for (const auto& [iter, loss] : log) out << iter << "," << format_double(loss) << "\n";
}

}  // namespace

void write_results_csv(const std::string& path, const std::string& mode_label,
                       const std::vector<ModeResult>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "mode,key_mode,map,samples\n";
  for (const auto& row : rows) {
    out << mode_label << "," << row.key_mode << "," << format_double(row.map) << ","
        << row.samples << "\n";
  }
}

std::vector<ModeResult> read_results_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::string line;
  if (!std::getline(in, line) || line != "mode,key_mode,map,samples") {
    throw std::runtime_error(path + ": unexpected results header");
  }
  std::vector<ModeResult> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string mode, key_mode, map_str, samples_str;
    std::getline(ls, mode, ',');
    std::getline(ls, key_mode, ',');
    std::getline(ls, map_str, ',');
    std::getline(ls, samples_str, ',');
    rows.push_back({key_mode, std::stod(map_str), std::stoi(samples_str)});
  }
  return rows;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, const std::string& out_root,
                                const minidet::Dataset* train_override,
                                const minidet::Dataset* test_override) {
  cfg.dataset.validate();
  cfg.train.validate();
  const minidet::MiniDetConfig model_cfg = cfg.model_config();

  const minidet::Dataset train_data =
      train_override ? *train_override : make_split(cfg.dataset, "train");
  const minidet::Dataset test_data =
      test_override ? *test_override : make_split(cfg.dataset, "test");

  minidet::ModelState model = build_model(model_cfg, ndkit::derive_seed(cfg.seed, "model"));

  cipher::PermutationKey key;
  if (cfg.mode != Mode::Baseline) key = experiment_key(cfg);

  try {
    switch (cfg.mode) {
      case Mode::Baseline:
        minidet::train(model, train_data, cfg.train, KeyMode::plain());
        break;
      case Mode::CpFeature:
        minidet::train(model, train_data, cfg.train, KeyMode::keyed(key));
        break;
      case Mode::ShfInput: {
        const minidet::Dataset encrypted = encrypt_images(train_data, key, cfg.shf_block);
        minidet::train(model, encrypted, cfg.train, KeyMode::plain());
        model.key_fingerprint = cipher::key_fingerprint(key);
        break;
      }
    }
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(std::string(e.what()) + " [experiment " + cfg.mode_label() +
                             ", config " + cfg.config_hash() + "]");
  }

  ExperimentResult result;
  result.config = cfg;
  result.loss_log = model.loss_log;
  result.mean_seconds_per_iteration = model.mean_seconds_per_iteration;

  if (cfg.mode == Mode::Baseline) {
    result.rows.push_back({"plain", eval_map(model, test_data, KeyMode::plain()), 1});
  } else if (cfg.mode == Mode::CpFeature) {
    if (cfg.protocol.correct) {
      result.rows.push_back({"correct", eval_map(model, test_data, KeyMode::keyed(key)), 1});
    }
    if (cfg.protocol.no_enc) {
      result.rows.push_back({"noenc", eval_map(model, test_data, KeyMode::no_enc()), 1});
    }
    if (cfg.protocol.incorrect_samples > 0) {
      const auto keys = cipher::random_keys(cfg.protocol.incorrect_samples, key.length(),
                                            ndkit::derive_seed(cfg.seed, "incorrect"));
      double total = 0.0;
      for (const auto& wrong : keys) total += eval_map(model, test_data, KeyMode::keyed(wrong));
      result.rows.push_back({"incorrect", total / static_cast<double>(keys.size()),
                             cfg.protocol.incorrect_samples});
    }
  } else {
    if (cfg.protocol.correct) {
      const minidet::Dataset enc = encrypt_images(test_data, key, cfg.shf_block);
      result.rows.push_back({"correct", eval_map(model, enc, KeyMode::plain()), 1});
    }
    if (cfg.protocol.no_enc) {
      result.rows.push_back({"noenc", eval_map(model, test_data, KeyMode::plain()), 1});
    }
    if (cfg.protocol.incorrect_samples > 0) {
      const auto keys = cipher::random_keys(cfg.protocol.incorrect_samples, key.length(),
                                            ndkit::derive_seed(cfg.seed, "incorrect"));
      double total = 0.0;
      for (const auto& wrong : keys) {
        const minidet::Dataset enc = encrypt_images(test_data, wrong, cfg.shf_block);
        total += eval_map(model, enc, KeyMode::plain());
      }
      result.rows.push_back({"incorrect", total / static_cast<double>(keys.size()),
                             cfg.protocol.incorrect_samples});
    }
  }

  // run directory
  const std::string hash = cfg.config_hash();
  const fs::path run_dir = fs::path(out_root) / hash;
  fs::create_directories(run_dir);
  result.run_dir = run_dir.string();

  write_results_csv((run_dir / "results.csv").string(), cfg.mode_label(), result.rows);
  {
    nlohmann::json j;
    j["config_hash"] = hash;
    j["mode"] = cfg.mode_label();
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : result.rows) {
      rows.push_back({{"key_mode", row.key_mode}, {"map", row.map}, {"samples", row.samples}});
    }
    j["rows"] = std::move(rows);
    j["mean_seconds_per_iteration"] = result.mean_seconds_per_iteration;
    std::ofstream out(run_dir / "results.json", std::ios::binary);
    out << j.dump(2) << "\n";
  }
  write_loss_log_csv((run_dir / "loss_log.csv").string(), result.loss_log);
  save_checkpoint((run_dir / "checkpoint").string(), model);
  if (cfg.mode != Mode::Baseline) {
    const cipher::KeySpec spec = cfg.mode == Mode::CpFeature
                                     ? cipher::cp_spec(key.length())
                                     : cipher::shf_spec(3, cfg.shf_block);
    cipher::write_key_file((run_dir / "key.json").string(), key, spec);
  }

  Manifest manifest;
  manifest.config_hash = hash;
  manifest.config = cfg.to_json();
  for (const auto& entry : fs::recursive_directory_iterator(run_dir)) {
    if (entry.is_regular_file() && entry.path().filename() != "manifest.json") {
      manifest.files.emplace_back(fs::relative(entry.path(), run_dir).generic_string(),
                                  file_digest(entry.path().string()));
    }
  }
  std::sort(manifest.files.begin(), manifest.files.end());
  write_manifest((run_dir / "manifest.json").string(), manifest);
  return result;
}

DepthTrend depth_trend(const std::vector<ExperimentResult>& results) {
  if (results.size() != 3) throw std::invalid_argument("depth_trend: expected three results");
  DepthTrend trend;
  for (const auto& r : results) {
    if (r.config.mode != Mode::CpFeature) {
      throw std::invalid_argument("depth_trend: all results must be CpFeature experiments");
    }
    trend.rows.push_back({r.config.cp_map, r.map_for("correct"), r.map_for("noenc"),
                          r.map_for("incorrect")});
  }
  trend.no_enc_nondecreasing = true;
  for (size_t i = 1; i < trend.rows.size(); ++i) {
    if (trend.rows[i].no_enc < trend.rows[i - 1].no_enc) trend.no_enc_nondecreasing = false;
  }
  return trend;
}

void write_depth_trend_csv(const std::string& path, const DepthTrend& trend) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "map,correct,noenc,incorrect_mean\n";
  for (const auto& row : trend.rows) {
    out << feature_map_name(row.map) << "," << format_double(row.correct) << ","
        << format_double(row.no_enc) << "," << format_double(row.incorrect_mean) << "\n";
  }
}

}  // namespace bench
