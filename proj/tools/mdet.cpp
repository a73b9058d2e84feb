#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>

#include "bench/attack.hpp"
#include "bench/dataset.hpp"
#include "bench/experiment.hpp"
#include "bench/reports.hpp"
#include "cipher/keyspace.hpp"
#include "evalkit/jsonl.hpp"
#include "minidet/json_io.hpp"
#include "minidet/postprocess.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json load_config_file(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("config file not found: " + path);
  return json::parse(in);
}

void require_file(const std::string& path, const char* what) {
  if (!fs::exists(path)) {
    throw std::invalid_argument(std::string(what) + " not found: " + path);
  }
}

bench::DatasetSpec dataset_spec_from(const json& cfg) {
  bench::DatasetSpec spec;
  spec.n_train = cfg.value("n_train", spec.n_train);
  spec.n_test = cfg.value("n_test", spec.n_test);
  spec.min_objects = cfg.value("min_objects", spec.min_objects);
  spec.max_objects = cfg.value("max_objects", spec.max_objects);
  spec.min_size = cfg.value("min_size", spec.min_size);
  spec.max_size = cfg.value("max_size", spec.max_size);
  spec.pixel_noise = cfg.value("pixel_noise", spec.pixel_noise);
  if (cfg.contains("seed")) spec.seed = std::stoull(cfg.at("seed").get<std::string>());
  return spec;
}

minidet::KeyMode key_mode_from_flags(const minidet::ModelState& model, const std::string& mode,
                                     const std::string& key_path, const std::string& apply_at) {
  if (mode == "plain") return minidet::KeyMode::plain();
  if (mode == "noenc") return minidet::KeyMode::no_enc();
  if (mode == "keyed" || mode == "correct") {
    if (key_path.empty()) throw std::invalid_argument("--key is required for key mode " + mode);
    require_file(key_path, "key file");
    auto [key, spec] = cipher::read_key_file(key_path);
    std::optional<minidet::FeatureMap> at;
    if (!apply_at.empty()) at = minidet::feature_map_from_name(apply_at);
    (void)model;
    return minidet::KeyMode::keyed(std::move(key), at);
  }
  throw std::invalid_argument("unknown key mode \"" + mode + "\"");
}

/// mAP of a checkpoint on a dataset split under one key mode; handles both
/// CP models (key applied at the feature map) and SHF models (test images
/// encrypted before the forward pass).
double eval_checkpoint(const minidet::ModelState& model, const minidet::Dataset& test,
                       const minidet::KeyMode& mode, const std::vector<double>& thresholds,
                       evalkit::EvalReport* report_out,
                       evalkit::DetectionSet* dets_out) {
  minidet::Dataset encrypted;
  const minidet::Dataset* eval_set = &test;
  minidet::KeyMode forward_mode = mode;
  if (model.config.kind == minidet::EncryptionKind::ShfInput &&
      mode.kind == minidet::KeyMode::Kind::Keyed) {
    encrypted = bench::encrypt_images(test, mode.key, model.config.shf_block);
    eval_set = &encrypted;
    forward_mode = minidet::KeyMode::plain();
  }
  const auto dets = minidet::detect(model, *eval_set, forward_mode);
  evalkit::GroundTruthSet gts;
  for (const auto& sample : test) gts.push_back(sample.gts);
  const evalkit::EvalReport report =
      thresholds.size() == 1 ? evalkit::evaluate_voc07(dets, gts, thresholds[0])
                             : evalkit::coco_map(dets, gts, thresholds);
  if (report_out) *report_out = report;
  if (dets_out) *dets_out = dets;
  return report.map_value;
}

int cmd_keygen(std::string config, int length, uint64_t seed, std::string kind, int block,
               const std::string& out) {
  const json cfg = load_config_file(config);
  if (cfg.contains("L")) length = cfg.at("L").get<int>();
  if (cfg.contains("kind")) kind = cfg.at("kind").get<std::string>();
  if (cfg.contains("M")) block = cfg.at("M").get<int>();
  if (cfg.contains("seed")) seed = std::stoull(cfg.at("seed").get<std::string>());
  if (out.empty()) throw std::invalid_argument("--out is required");
  if (length < 1) throw std::invalid_argument("--L must be positive");
  const cipher::Kind k = cipher::kind_from_name(kind);
  if (length % (block * block) != 0) {
    throw std::invalid_argument("L must be divisible by M*M");
  }
  cipher::KeySpec spec;
  spec.kind = k;
  spec.block = block;
  spec.channels = length / (block * block);
  spec.validate();
  const auto key = cipher::keygen(length, seed);
  cipher::write_key_file(out, key, spec);
  const auto space = cipher::key_space(spec);
  std::cout << "wrote " << out << " (L=" << length << ", key space " << space.exact
            << " ~ 2^" << space.log2 << ")\n";
  return 0;
}

int cmd_synth(const std::string& config, uint64_t seed, bool seed_set, const std::string& out,
              int n_train, int n_test) {
  if (out.empty()) throw std::invalid_argument("--out is required");
  bench::DatasetSpec spec = dataset_spec_from(load_config_file(config));
  if (seed_set) spec.seed = seed;
  if (n_train >= 0) spec.n_train = n_train;
  if (n_test >= 0) spec.n_test = n_test;
  bench::write_dataset(out, spec);
  std::cout << "wrote dataset to " << out << " (train " << spec.n_train << ", test "
            << spec.n_test << ", digest " << bench::directory_digest(out) << ")\n";
  return 0;
}

bench::ExperimentConfig experiment_config_from_flags(const json& file_cfg,
                                                     const std::string& data_dir,
                                                     const std::string& mode,
                                                     const std::string& map, int block,
                                                     int iterations, int batch, uint64_t seed,
                                                     bool seed_set, int incorrect) {
  bench::ExperimentConfig cfg;
  if (!file_cfg.empty() && file_cfg.contains("mode")) {
    cfg = bench::ExperimentConfig::from_json(file_cfg);
  }
  if (!data_dir.empty()) {
    require_file((fs::path(data_dir) / "dataset.json").string(), "dataset manifest");
    cfg.dataset = bench::read_dataset_spec(data_dir);
  }
  if (!mode.empty()) {
    if (mode == "baseline") cfg.mode = bench::Mode::Baseline;
    else if (mode == "shf") cfg.mode = bench::Mode::ShfInput;
    else if (mode == "cp") cfg.mode = bench::Mode::CpFeature;
    else throw std::invalid_argument("unknown mode \"" + mode + "\"");
  }
  if (!map.empty()) cfg.cp_map = minidet::feature_map_from_name(map);
  if (block > 0) cfg.shf_block = block;
  if (seed_set) {
    cfg.seed = seed;
    cfg.train.seed = ndkit::derive_seed(seed, "train");
  }
  if (iterations > 0) cfg.train = minidet::default_train_config(iterations, cfg.train.seed);
  if (batch > 0) cfg.train.batch_size = batch;
  if (incorrect >= 0) cfg.protocol.incorrect_samples = incorrect;
  return cfg;
}

int cmd_train(const bench::ExperimentConfig& cfg, const std::string& data_dir,
              const std::string& out) {
  if (out.empty()) throw std::invalid_argument("--out is required");
  std::optional<minidet::Dataset> train_data, test_data;
  if (!data_dir.empty()) {
    train_data = bench::load_split(data_dir, "train");
    test_data = bench::load_split(data_dir, "test");
  }
  const auto result = bench::run_experiment(cfg, out, train_data ? &*train_data : nullptr,
                                            test_data ? &*test_data : nullptr);
  std::cout << "run " << result.run_dir << "\n";
  for (const auto& row : result.rows) {
    std::cout << "  " << row.key_mode << ": mAP " << row.map << " (n=" << row.samples << ")\n";
  }
  return 0;
}

int cmd_eval(const std::string& model_dir, const std::string& data_dir,
             const std::string& key_mode, const std::string& key_path,
             const std::string& apply_at, bool coco, const std::string& out) {
  require_file((fs::path(model_dir) / "model.json").string(), "checkpoint");
  require_file((fs::path(data_dir) / "dataset.json").string(), "dataset manifest");
  const auto model = minidet::load_checkpoint(model_dir);
  const auto test = bench::load_split(data_dir, "test");
  const auto mode = key_mode_from_flags(model, key_mode, key_path, apply_at);
  const std::vector<double> thresholds = coco ? evalkit::coco_thresholds()
                                              : std::vector<double>{0.5};
  evalkit::EvalReport report;
  evalkit::DetectionSet dets;
  const double map = eval_checkpoint(model, test, mode, thresholds, &report, &dets);
  std::cout << "mAP" << (coco ? "@[0.5:0.95]" : "@0.5") << " = " << map << "\n";
  if (!out.empty()) {
    fs::create_directories(out);
    evalkit::write_detections_jsonl((fs::path(out) / "detections.jsonl").string(), dets);
    json j;
    j["map"] = map;
    j["key_mode"] = key_mode;
    j["iou_thresholds"] = report.iou_thresholds;
    json per_class = json::object();
    for (const auto& [cls, ap] : report.per_class_ap) {
      per_class[bench::shape_class_name(cls)] = ap;
    }
    j["per_class_ap"] = std::move(per_class);
    std::ofstream js(fs::path(out) / "eval.json", std::ios::binary);
    js << j.dump(2) << "\n";
  }
  return 0;
}

int cmd_attack(const std::string& model_dir, const std::string& data_dir, int n, uint64_t seed,
               const std::string& out) {
  if (out.empty()) throw std::invalid_argument("--out is required");
  require_file((fs::path(model_dir) / "model.json").string(), "checkpoint");
  require_file((fs::path(data_dir) / "dataset.json").string(), "dataset manifest");
  const auto model = minidet::load_checkpoint(model_dir);
  const auto test = bench::load_split(data_dir, "test");
  const auto report = bench::random_key_attack(model, test, n, seed);
  fs::create_directories(out);
  bench::write_attack_csv((fs::path(out) / "attack.csv").string(), report);
  bench::write_boxplot_stats_csv((fs::path(out) / "boxplot_stats.csv").string(),
                                 "random_key_attack", report);
  json j;
  j["n"] = n;
  j["min"] = report.min;
  j["q1"] = report.q1;
  j["median"] = report.median;
  j["q3"] = report.q3;
  j["max"] = report.max;
  j["whisker_low"] = report.whisker_low;
  j["whisker_high"] = report.whisker_high;
  j["outliers"] = report.outliers;
  std::ofstream js(fs::path(out) / "attack.json", std::ios::binary);
  js << j.dump(2) << "\n";
  std::cout << "attack over " << n << " keys: median mAP " << report.median << " (min "
            << report.min << ", max " << report.max << ")\n";
  return 0;
}

int cmd_sweep(const std::string& mode, const std::string& data_dir, int iterations, int batch,
              uint64_t seed, bool seed_set, int incorrect, const std::string& out) {
  if (out.empty()) throw std::invalid_argument("--out is required");
  if (mode != "shf" && mode != "cp") {
    throw std::invalid_argument("sweep --mode must be shf or cp");
  }
  fs::create_directories(out);

  std::vector<bench::ExperimentConfig> cfgs;
  if (mode == "shf") {
    for (int m : {1, 2, 4, 8, 16}) {
      auto cfg = experiment_config_from_flags(json::object(), data_dir, "shf", "", m, iterations,
                                              batch, seed, seed_set, incorrect);
      cfgs.push_back(cfg);
    }
  } else {
    for (const char* map : {"F1", "F2", "F3"}) {
      auto cfg = experiment_config_from_flags(json::object(), data_dir, "cp", map, 0, iterations,
                                              batch, seed, seed_set, incorrect);
      cfgs.push_back(cfg);
    }
  }

  std::optional<minidet::Dataset> train_data, test_data;
  if (!data_dir.empty()) {
    train_data = bench::load_split(data_dir, "train");
    test_data = bench::load_split(data_dir, "test");
  }

  std::vector<bench::ExperimentResult> results;
  std::vector<std::pair<std::string, std::vector<bench::ModeResult>>> tables;
  for (const auto& cfg : cfgs) {
    auto result = bench::run_experiment(cfg, out, train_data ? &*train_data : nullptr,
                                        test_data ? &*test_data : nullptr);
    std::cout << cfg.mode_label() << ": ";
    for (const auto& row : result.rows) std::cout << row.key_mode << "=" << row.map << " ";
    std::cout << "\n";
    tables.emplace_back(cfg.mode_label(), result.rows);
    results.push_back(std::move(result));
  }

  // wide summary: one row per swept configuration
  {
    std::ofstream sum(fs::path(out) / "summary.csv", std::ios::binary);
    sum << "mode,correct,noenc,incorrect,samples\n";
    for (const auto& r : results) {
      sum << r.config.mode_label() << "," << bench::format_double(r.map_for("correct")) << ","
          << bench::format_double(r.map_for("noenc")) << ","
          << bench::format_double(r.map_for("incorrect")) << ","
          << r.config.protocol.incorrect_samples << "\n";
    }
  }
  if (mode == "cp") {
    bench::write_depth_trend_csv((fs::path(out) / "depth_trend.csv").string(),
                                 bench::depth_trend(results));
  }
  std::ofstream md(fs::path(out) / "summary.md", std::ios::binary);
  md << bench::results_markdown(tables);
  return 0;
}

int cmd_report(const std::string& in, const std::string& out) {
  if (in.empty() || out.empty()) throw std::invalid_argument("--in and --out are required");
  require_file(in, "input directory");

  std::vector<std::pair<std::string, std::vector<bench::ModeResult>>> tables;
  std::vector<fs::path> attack_csvs;
  for (const auto& entry : fs::recursive_directory_iterator(in)) {
    if (!entry.is_regular_file()) continue;
    if (entry.path().filename() == "results.csv") {
      std::string label = entry.path().parent_path().filename().string();
      std::ifstream res(entry.path(), std::ios::binary);
      std::string header, first;
      std::getline(res, header);
      if (std::getline(res, first) && !first.empty()) {
        label = first.substr(0, first.find(','));
      }
      tables.emplace_back(label, bench::read_results_csv(entry.path().string()));
    } else if (entry.path().filename() == "attack.csv") {
      attack_csvs.push_back(entry.path());
    }
  }
  std::sort(tables.begin(), tables.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  if (tables.empty() && attack_csvs.empty()) {
    throw std::invalid_argument("no results.csv or attack.csv under " + in);
  }

  std::ofstream md(out, std::ios::binary);
  if (!md) throw std::runtime_error("cannot write " + out);
  md << "# Results\n\n";
  if (!tables.empty()) md << bench::results_markdown(tables) << "\n";
  for (const auto& csv : attack_csvs) {
    const auto report = bench::summarize_attack(bench::read_attack_csv(csv.string()));
    const std::string stats_path = (fs::path(out).parent_path() /
                                    (csv.parent_path().filename().string() + "_boxplot.csv"))
                                       .string();
    bench::write_boxplot_stats_csv(stats_path, csv.parent_path().filename().string(), report);
    md << "Attack " << csv.parent_path().filename().string() << ": median "
       << report.median << ", IQR [" << report.q1 << ", " << report.q3 << "], boxplot stats in "
       << stats_path << "\n";
  }
  std::cout << "wrote " << out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mdet: keyed access control for a toy object detector"};
  app.require_subcommand(1);

  std::string config, out, in, data_dir, model_dir, key_path, kind = "CP", key_mode = "plain";
  std::string mode, map, apply_at;
  uint64_t seed = 0;
  bool coco = false;
  int length = 0, block = 1, train_block = 0, n = 100, iterations = 0, batch = 0, incorrect = -1;
  int n_train = -1, n_test = -1;

  auto* keygen = app.add_subcommand("keygen", "generate a permutation key file");
  keygen->add_option("--L", length, "permutation length");
  keygen->add_option("--seed", seed);
  keygen->add_option("--kind", kind, "CP or SHF");
  keygen->add_option("--M", block, "block size (SHF)");
  keygen->add_option("--out", out);
  keygen->add_option("--config", config);

  auto* synth = app.add_subcommand("synth", "generate the synthetic shapes dataset");
  synth->add_option("--seed", seed);
  synth->add_option("--out", out);
  synth->add_option("--config", config);
  synth->add_option("--n-train", n_train);
  synth->add_option("--n-test", n_test);

  auto* train = app.add_subcommand("train", "train a model and evaluate key modes");
  train->add_option("--data", data_dir, "dataset directory from synth");
  train->add_option("--mode", mode, "baseline | shf | cp");
  train->add_option("--map", map, "encrypted feature map (cp)");
  train->add_option("--M", train_block, "block size (shf)");
  train->add_option("--iterations", iterations);
  train->add_option("--batch", batch);
  train->add_option("--incorrect", incorrect, "incorrect-key samples in the eval protocol");
  train->add_option("--seed", seed);
  train->add_option("--out", out);
  train->add_option("--config", config, "experiment config JSON");

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  eval->add_option("--model", model_dir)->required();
  eval->add_option("--data", data_dir)->required();
  eval->add_option("--key-mode", key_mode, "plain | noenc | keyed");
  eval->add_option("--key", key_path, "key file for keyed mode");
  eval->add_option("--apply-at", apply_at, "apply the key at this map instead");
  eval->add_flag("--coco", coco, "COCO-style mAP over IoU 0.5:0.95");
  eval->add_option("--seed", seed);
  eval->add_option("--out", out);
  eval->add_option("--config", config);

  auto* attack = app.add_subcommand("attack", "random-key attack on a protected model");
  attack->add_option("--model", model_dir)->required();
  attack->add_option("--data", data_dir)->required();
  attack->add_option("--n", n, "number of random keys");
  attack->add_option("--seed", seed);
  attack->add_option("--out", out);
  attack->add_option("--config", config);

  auto* sweep = app.add_subcommand("sweep", "SHF block-size or CP feature-map battery");
  sweep->add_option("--mode", mode, "shf | cp")->required();
  sweep->add_option("--data", data_dir);
  sweep->add_option("--iterations", iterations);
  sweep->add_option("--batch", batch);
  sweep->add_option("--incorrect", incorrect);
  sweep->add_option("--seed", seed);
  sweep->add_option("--out", out);
  sweep->add_option("--config", config);

  auto* report = app.add_subcommand("report", "render result tables to markdown");
  report->add_option("--in", in);
  report->add_option("--seed", seed);
  report->add_option("--out", out);
  report->add_option("--config", config);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n" << app.help() << "\n";
    return 1;
  }

  try {
    if (*keygen) return cmd_keygen(config, length, seed, kind, block, out);
    if (*synth) return cmd_synth(config, seed, synth->count("--seed") > 0, out, n_train, n_test);
    if (*train) {
      const auto cfg = experiment_config_from_flags(load_config_file(config), data_dir, mode,
                                                    map, train_block, iterations, batch, seed,
                                                    train->count("--seed") > 0, incorrect);
      return cmd_train(cfg, data_dir, out);
    }
    if (*eval) return cmd_eval(model_dir, data_dir, key_mode, key_path, apply_at, coco, out);
    if (*attack) return cmd_attack(model_dir, data_dir, n, seed, out);
    if (*sweep) {
      return cmd_sweep(mode, data_dir, iterations, batch, seed, sweep->count("--seed") > 0,
                       incorrect, out);
    }
    if (*report) return cmd_report(in, out);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
