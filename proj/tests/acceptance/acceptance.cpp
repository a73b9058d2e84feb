// Acceptance suite: runs the toolkit's release checks end to end and prints
// one PASS/FAIL line per criterion. Heavy experiment runs are cached under
// the working directory by config hash, so a re-run after an interrupted
// session resumes where it left off (delete acceptance_runs/ for a cold run).
//
// Usage: acceptance [criterion ids...]   (default: all)

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "bench/attack.hpp"
#include "bench/dataset.hpp"
#include "bench/experiment.hpp"
#include "bench/reports.hpp"
#include "cipher/keyspace.hpp"
#include "cipher/permute.hpp"
#include "evalkit/metrics.hpp"
#include "minidet/loss.hpp"
#include "minidet/postprocess.hpp"
#include "support/composite_gradcheck.hpp"
#include "support/gradcheck.hpp"
#include "support/instances.hpp"
#include "support/map_oracle.hpp"

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;
using ndkit::Rng;
using ndkit::Tensor;

namespace {

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << (detail.str().empty() ? "" : "; ") << what;
    }
  }
};

// ---------------------------------------------------------------------------
// shared experiment runs (criteria 5-10)
// ---------------------------------------------------------------------------

constexpr uint64_t kDatasetSeed = 20240601;
constexpr uint64_t kBaselineSeed = 0xACCE5501;
constexpr uint64_t kCpF2Seed = 0xACCE5502;
constexpr uint64_t kShfSeed = 0xACCE5503;
constexpr uint64_t kDepthSeed = 0xACCE5504;
constexpr uint64_t kAttackSeed = 0xACCE5505;

bench::DatasetSpec acceptance_dataset_spec() {
  bench::DatasetSpec spec;
  spec.n_train = 2000;
  spec.n_test = 200;
  spec.seed = kDatasetSeed;
  return spec;
}

bench::ExperimentConfig make_config(bench::Mode mode, uint64_t seed, int iterations,
                                    int incorrect) {
  bench::ExperimentConfig cfg;
  cfg.mode = mode;
  cfg.dataset = acceptance_dataset_spec();
  cfg.train = minidet::default_train_config(iterations, ndkit::derive_seed(seed, "train"));
  cfg.protocol.incorrect_samples = incorrect;
  cfg.seed = seed;
  return cfg;
}

struct SharedRuns {
  minidet::Dataset train, test;
  std::string root = "acceptance_runs";

  const minidet::Dataset& train_data() {
    if (train.empty()) train = bench::make_split(acceptance_dataset_spec(), "train");
    return train;
  }
  const minidet::Dataset& test_data() {
    if (test.empty()) test = bench::make_split(acceptance_dataset_spec(), "test");
    return test;
  }

  bench::ExperimentResult run(const bench::ExperimentConfig& cfg, bool allow_cache = true) {
    const fs::path run_dir = fs::path(root) / cfg.config_hash();
    if (allow_cache && fs::exists(run_dir / "results.json")) {
      std::printf("    [cached %s from %s]\n", cfg.mode_label().c_str(), run_dir.string().c_str());
      bench::ExperimentResult result;
      result.config = cfg;
      result.run_dir = run_dir.string();
      std::ifstream in(run_dir / "results.json", std::ios::binary);
      const nlohmann::json j = nlohmann::json::parse(in);
      for (const auto& row : j.at("rows")) {
        result.rows.push_back({row.at("key_mode").get<std::string>(),
                               row.at("map").get<double>(), row.at("samples").get<int>()});
      }
      result.mean_seconds_per_iteration = j.at("mean_seconds_per_iteration").get<double>();
      std::ifstream log(run_dir / "loss_log.csv", std::ios::binary);
      std::string line;
      std::getline(log, line);
      while (std::getline(log, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        result.loss_log.emplace_back(std::stoi(line.substr(0, comma)),
                                     std::stod(line.substr(comma + 1)));
      }
      return result;
    }
    const auto t0 = Clock::now();
    auto result = bench::run_experiment(cfg, root, &train_data(), &test_data());
    std::printf("    [ran %s in %.1f s: ", cfg.mode_label().c_str(), seconds_since(t0));
    for (const auto& row : result.rows) std::printf("%s=%.4f ", row.key_mode.c_str(), row.map);
    std::printf("]\n");
    return result;
  }
};

SharedRuns g_runs;

bench::ExperimentResult baseline_run() {
  return g_runs.run(make_config(bench::Mode::Baseline, kBaselineSeed, 4000, 20));
}

bench::ExperimentResult cp_f2_run() {
  return g_runs.run(make_config(bench::Mode::CpFeature, kCpF2Seed, 4000, 20));
}

// ---------------------------------------------------------------------------
// criterion 1: cipher correctness over >= 1000 randomized cases, < 10 s
// ---------------------------------------------------------------------------

Outcome criterion1() {
  Outcome out;
  const auto t0 = Clock::now();
  Rng rng(11);
  for (int trial = 0; trial < 1000; ++trial) {
    const int c = rng.uniform_int(1, 12);
    const int m = rng.uniform_int(1, 4);
    const int h = m * rng.uniform_int(1, 4);
    const int w = m * rng.uniform_int(1, 4);
    const bool use_shf = rng.next_below(2) == 1;
    const cipher::KeySpec spec = use_shf ? cipher::shf_spec(c, m) : cipher::cp_spec(c);
    const auto key = cipher::keygen(spec.length(), rng.next_u64());

    std::vector<int> sorted(key.alpha);
    std::sort(sorted.begin(), sorted.end());
    bool bijective = true;
    for (int i = 0; i < spec.length(); ++i) bijective &= sorted[static_cast<size_t>(i)] == i;
    out.require(bijective, "key not bijective");

    Tensor x({c, h, w});
    Tensor y({c, h, w});
    for (double& v : x.data) v = rng.uniform(-4, 4);
    for (double& v : y.data) v = rng.uniform(-4, 4);

    const Tensor enc = cipher::encrypt(x, spec, key);
    out.require(cipher::decrypt(enc, spec, key).data == x.data, "round trip failed");

    // linearity: encrypt(a*x + b*y) = a*encrypt(x) + b*encrypt(y), exactly
    const double a = rng.uniform(-2, 2), b = rng.uniform(-2, 2);
    Tensor mix({c, h, w});
    for (int64_t i = 0; i < mix.numel(); ++i) {
      mix.data[static_cast<size_t>(i)] =
          a * x.data[static_cast<size_t>(i)] + b * y.data[static_cast<size_t>(i)];
    }
    const Tensor enc_mix = cipher::encrypt(mix, spec, key);
    const Tensor enc_y = cipher::encrypt(y, spec, key);
    bool linear = true;
    for (int64_t i = 0; i < mix.numel(); ++i) {
      linear &= enc_mix.data[static_cast<size_t>(i)] ==
                a * enc.data[static_cast<size_t>(i)] + b * enc_y.data[static_cast<size_t>(i)];
    }
    out.require(linear, "linearity failed");

    // norm preservation: global multiset of values is invariant
    ndkit::DoubleVec sx(x.data), se(enc.data);
    std::sort(sx.begin(), sx.end());
    std::sort(se.begin(), se.end());
    out.require(sx == se, "value multiset changed");

    // SHF at M=1 equals CP with the same key
    if (!use_shf || m == 1) {
      const auto key_c = cipher::keygen(c, rng.next_u64());
      out.require(cipher::encrypt_shf(x, 1, key_c).data == cipher::encrypt_cp(x, key_c).data,
                  "SHF(M=1) != CP");
    }
    if (!out.pass) break;
  }
  const double elapsed = seconds_since(t0);
  out.require(elapsed < 10.0, "runtime " + std::to_string(elapsed) + " s >= 10 s");
  out.detail << " (" << elapsed << " s)";
  return out;
}

// ---------------------------------------------------------------------------
// criterion 2: key-space checks
// ---------------------------------------------------------------------------

Outcome criterion2() {
  Outcome out;
  out.require(cipher::key_space(cipher::shf_spec(3, 1)).exact == "6", "3! != 6");
  const double log2_256 = cipher::key_space(cipher::cp_spec(256)).log2;
  out.require(1683.0 <= log2_256 && log2_256 <= 1685.0,
              "log2(256!) = " + std::to_string(log2_256));

  for (int c = 2; c <= 8; ++c) {
    Tensor x({c, 1, 1});
    for (int i = 0; i < c; ++i) x.data[static_cast<size_t>(i)] = i + 1;
    std::vector<int> alpha(static_cast<size_t>(c));
    for (int i = 0; i < c; ++i) alpha[static_cast<size_t>(i)] = i;
    std::set<ndkit::DoubleVec> outputs;
    int64_t count = 0;
    do {
      cipher::PermutationKey key;
      key.alpha = alpha;
      outputs.insert(cipher::encrypt_cp(x, key).data);
      ++count;
    } while (std::next_permutation(alpha.begin(), alpha.end()));
    int64_t fact = 1;
    for (int i = 2; i <= c; ++i) fact *= i;
    out.require(count == fact && static_cast<int64_t>(outputs.size()) == fact,
                "distinct outputs for c=" + std::to_string(c));
  }
  return out;
}

// ---------------------------------------------------------------------------
// criterion 3: gradient suite, >= 100 instances per op + composite, < 60 s
// ---------------------------------------------------------------------------

Tensor random_tensor_safe(const ndkit::Shape& shape, Rng& rng) {
  Tensor t(shape);
  for (double& v : t.data) {
    const double mag = rng.uniform(0.1, 2.0);
    v = rng.next_below(2) ? mag : -mag;
  }
  return t;
}

Tensor random_tensor(const ndkit::Shape& shape, Rng& rng) {
  Tensor t(shape);
  for (double& v : t.data) v = rng.uniform(-2.0, 2.0);
  return t;
}

Outcome criterion3() {
  Outcome out;
  const auto t0 = Clock::now();
  int conv_ok = 0, relu_ok = 0, pool_ok = 0, sl1_ok = 0, ce_ok = 0, perm_ok = 0, plumb_ok = 0;

  for (uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(ndkit::derive_seed(301, seed));
    {
      const int b = rng.uniform_int(1, 2), ci = rng.uniform_int(1, 3), co = rng.uniform_int(1, 3);
      const int h = rng.uniform_int(3, 6), w = rng.uniform_int(3, 6);
      const int k = rng.uniform_int(1, 3);
      const int stride = rng.uniform_int(1, 2), pad = rng.uniform_int(0, 1);
      if (h + 2 * pad >= k && w + 2 * pad >= k) {
        auto x = ndkit::leaf(random_tensor({b, ci, h, w}, rng));
        auto wv = ndkit::leaf(random_tensor({co, ci, k, k}, rng));
        auto bv = ndkit::leaf(random_tensor({co}, rng));
        const auto res = testsupport::gradcheck(
            {x, wv, bv}, [&] { return ndkit::sum(ndkit::conv2d(x, wv, bv, stride, pad)); });
        out.require(res.ok, "conv2d seed " + std::to_string(seed) + ": " + res.detail);
        ++conv_ok;
      }
    }
    {
      auto x = ndkit::leaf(random_tensor_safe({rng.uniform_int(1, 4), rng.uniform_int(1, 6)}, rng));
      const auto res = testsupport::gradcheck({x}, [&] { return ndkit::sum(ndkit::relu(x)); });
      out.require(res.ok, "relu seed " + std::to_string(seed));
      ++relu_ok;
    }
    {
      auto x = ndkit::leaf(random_tensor_safe({1, rng.uniform_int(1, 2), 4, 4}, rng));
      const auto res = testsupport::gradcheck({x}, [&] { return ndkit::sum(ndkit::maxpool2d(x)); });
      out.require(res.ok, "maxpool seed " + std::to_string(seed));
      ++pool_ok;
    }
    {
      const int n = rng.uniform_int(1, 8);
      Tensor target({n});
      auto pred = ndkit::leaf(Tensor({n}));
      for (int i = 0; i < n; ++i) {
        target.data[static_cast<size_t>(i)] = rng.uniform(-1, 1);
        const double d = rng.next_below(2) ? rng.uniform(-0.8, 0.8) : rng.uniform(1.2, 3.0);
        pred->value.data[static_cast<size_t>(i)] = target.data[static_cast<size_t>(i)] + d;
      }
      const auto res = testsupport::gradcheck({pred}, [&] { return ndkit::smooth_l1(pred, target); });
      out.require(res.ok, "smooth_l1 seed " + std::to_string(seed));
      ++sl1_ok;
    }
    {
      const int n = rng.uniform_int(1, 5), k = rng.uniform_int(2, 5);
      std::vector<int> labels;
      for (int i = 0; i < n; ++i) labels.push_back(rng.uniform_int(0, k - 1));
      auto logits = ndkit::leaf(random_tensor({n, k}, rng));
      const auto res = testsupport::gradcheck(
          {logits}, [&] { return ndkit::softmax_cross_entropy(logits, labels); });
      out.require(res.ok, "softmax_ce seed " + std::to_string(seed));
      ++ce_ok;
    }
    {
      const int c = rng.uniform_int(2, 8);
      auto x = ndkit::leaf(random_tensor({c, 2, 2}, rng));
      const auto key = cipher::keygen(c, rng.next_u64());
      Tensor weights = random_tensor({c, 2, 2}, rng);
      const auto res = testsupport::gradcheck({x}, [&] {
        return ndkit::sum(ndkit::mul(cipher::channel_permute(x, key), ndkit::constant(weights)));
      });
      out.require(res.ok, "channel_permute seed " + std::to_string(seed));
      ++perm_ok;
    }
    {
      auto a = ndkit::leaf(random_tensor({2, 3, 2}, rng));
      auto b = ndkit::leaf(random_tensor({2, 2, 2}, rng));
      const std::vector<std::pair<int, int>> rows{{0, rng.uniform_int(0, 4)},
                                                  {1, rng.uniform_int(0, 4)}};
      const auto res = testsupport::gradcheck({a, b}, [&] {
        return ndkit::scale(ndkit::sum(ndkit::gather_rows(ndkit::concat_rows(a, b), rows)), 0.5);
      });
      out.require(res.ok, "plumbing seed " + std::to_string(seed));
      ++plumb_ok;
    }
    if (!out.pass) break;
  }

  // composite detection loss on the real model, selection frozen per instance
  int composite_checked = 0, composite_skipped = 0;
  minidet::MiniDetConfig cfg;
  cfg.kind = minidet::EncryptionKind::CpFeature;
  cfg.encrypted_map = minidet::FeatureMap::F2;
  bench::DatasetSpec dspec;
  dspec.n_train = 100;
  dspec.n_test = 0;
  dspec.seed = 303;
  for (uint64_t seed = 0; seed < 100 && out.pass; ++seed) {
    auto model = minidet::build_model(cfg, ndkit::derive_seed(304, seed));
    const auto key = cipher::keygen(32, ndkit::derive_seed(305, seed));
    const auto sample = bench::make_sample(dspec, "train", static_cast<int>(seed));
    Tensor batch({1, 3, 64, 64});
    std::copy(sample.image.data.begin(), sample.image.data.end(), batch.data.begin());
    const auto anchors = minidet::make_anchors(cfg);
    const int bg = cfg.background_class();

    const auto preds0 = minidet::forward(model, batch, minidet::KeyMode::keyed(key));
    const std::vector<minidet::MatchTargets> targets{
        minidet::match_anchors(sample.gts, anchors, bg)};
    const auto sel = minidet::select_training_anchors(preds0, targets, bg);

    std::vector<ndkit::Var> leaves;
    for (auto& p : model.params) leaves.push_back(p.var);
    const auto build = [&] {
      return minidet::detection_loss(minidet::forward(model, batch, minidet::KeyMode::keyed(key)),
                                     sel, 1.0)
          .total;
    };
    Rng coord_rng(ndkit::derive_seed(306, seed));
    const auto res = testsupport::composite_gradcheck(leaves, build, 1, coord_rng, 1e-5, 1e-5);
    out.require(res.failures == 0, "composite seed " + std::to_string(seed) + ": " + res.detail);
    composite_checked += res.checked;
    composite_skipped += res.skipped_kink;
  }
  out.require(composite_checked >= 100, "too few composite coordinates checked");

  const double elapsed = seconds_since(t0);
  out.require(elapsed < 60.0, "runtime " + std::to_string(elapsed) + " s >= 60 s");
  out.detail << " (" << conv_ok << "/" << relu_ok << "/" << pool_ok << "/" << sl1_ok << "/"
             << ce_ok << "/" << perm_ok << "/" << plumb_ok << " per-op instances, "
             << composite_checked << " composite coords, " << composite_skipped
             << " kink-skipped, " << elapsed << " s)";
  return out;
}

// ---------------------------------------------------------------------------
// criterion 4: metric oracle equivalence + hand-derived fixtures
// ---------------------------------------------------------------------------

Outcome criterion4() {
  Outcome out;

  out.require(evalkit::iou(evalkit::BoundingBox::make(0, 0, 2, 2),
                           evalkit::BoundingBox::make(1, 1, 3, 3)) == 1.0 / 7.0,
              "IoU fixture != 1/7");

  const auto curve = evalkit::precision_recall({true, false, true}, 2);
  out.require(curve.size() == 3 && curve[0].recall == 0.5 && curve[0].precision == 1.0 &&
                  curve[1].recall == 0.5 && curve[1].precision == 0.5 &&
                  curve[2].recall == 1.0 && curve[2].precision == 2.0 / 3.0,
              "PR fixture mismatch");

  const double ap = evalkit::average_precision_voc07({{0.5, 1.0}, {1.0, 0.5}});
  out.require(std::abs(ap - 8.5 / 11.0) < 1e-15, "11-point AP fixture != 8.5/11");

  int done = 0;
  uint64_t attempt = 0;
  while (done < 500) {
    Rng rng(ndkit::derive_seed(401, attempt++));
    const auto inst = testsupport::random_eval_instance(rng);
    if (!inst.has_gts()) continue;
    const double lib_voc = evalkit::evaluate_voc07(inst.dets, inst.gts).map_value;
    const double orc_voc = testsupport::oracle_map(inst.odets, inst.ogts, 0.5, 11);
    out.require(std::abs(lib_voc - orc_voc) <= 1e-9,
                "voc mismatch at instance " + std::to_string(attempt));
    const double lib_coco =
        evalkit::coco_map(inst.dets, inst.gts, evalkit::coco_thresholds()).map_value;
    const double orc_coco =
        testsupport::oracle_coco_map(inst.odets, inst.ogts, evalkit::coco_thresholds());
    out.require(std::abs(lib_coco - orc_coco) <= 1e-9,
                "coco mismatch at instance " + std::to_string(attempt));
    if (!out.pass) break;
    ++done;
  }
  out.detail << " (" << done << " instances)";
  return out;
}

// ---------------------------------------------------------------------------
// criterion 5: toy access-control experiment (Table 3 analog)
// ---------------------------------------------------------------------------

Outcome criterion5() {
  Outcome out;
  const auto base = baseline_run();
  const auto cp = cp_f2_run();
  const double baseline = base.map_for("plain");
  const double correct = cp.map_for("correct");
  const double noenc = cp.map_for("noenc");
  const double incorrect = cp.map_for("incorrect");

  out.require(correct >= baseline - 0.05, "Correct(K) below Baseline - 0.05");
  out.require(noenc <= 0.5 * baseline, "No-enc above 0.5 x Baseline");
  out.require(incorrect <= 0.5 * baseline, "Incorrect above 0.5 x Baseline");

  // both runs must actually converge: loss at iteration 2000 below iteration 0
  for (const auto* run : {&base, &cp}) {
    double at0 = 0, at2000 = 0;
    for (const auto& [iter, loss] : run->loss_log) {
      if (iter == 0) at0 = loss;
      if (iter == 2000) at2000 = loss;
    }
    out.require(at2000 < at0, "loss at iteration 2000 not below iteration 0");
  }
  out.detail << " (baseline " << baseline << ", correct " << correct << ", noenc " << noenc
             << ", incorrect " << incorrect << ")";
  return out;
}

// ---------------------------------------------------------------------------
// criterion 6: SHF-input experiment (Table 2 analog)
// ---------------------------------------------------------------------------

Outcome criterion6() {
  Outcome out;
  auto cfg1 = make_config(bench::Mode::ShfInput, kShfSeed, 2000, 20);
  cfg1.shf_block = 1;
  auto cfg16 = make_config(bench::Mode::ShfInput, kShfSeed, 2000, 20);
  cfg16.shf_block = 16;

  const auto m1 = g_runs.run(cfg1);
  const auto m16 = g_runs.run(cfg16);
  const double c1 = m1.map_for("correct");
  const double i1 = m1.map_for("incorrect");
  const double c16 = m16.map_for("correct");

  out.require(std::abs(c1 - i1) <= 0.1, "|Correct - Incorrect| at M=1 above 0.1");
  out.require(c16 <= 0.5 * c1, "Correct at M=16 above 0.5 x Correct at M=1");
  out.detail << " (M=1 correct " << c1 << " incorrect " << i1 << "; M=16 correct " << c16 << ")";
  return out;
}

// ---------------------------------------------------------------------------
// criterion 7: depth trend
// ---------------------------------------------------------------------------

Outcome criterion7() {
  Outcome out;
  auto cfg_f1 = make_config(bench::Mode::CpFeature, kDepthSeed, 2000, 20);
  cfg_f1.cp_map = minidet::FeatureMap::F1;
  auto cfg_f3 = make_config(bench::Mode::CpFeature, kDepthSeed, 2000, 20);
  cfg_f3.cp_map = minidet::FeatureMap::F3;

  const auto f1 = g_runs.run(cfg_f1);
  const auto f3 = g_runs.run(cfg_f3);
  const auto f2 = cp_f2_run();

  const auto trend = bench::depth_trend({f1, f2, f3});
  bench::write_depth_trend_csv((fs::path(g_runs.root) / "depth_trend.csv").string(), trend);
  for (const auto& row : trend.rows) {
    out.require(row.correct >= 0.0 && row.correct <= 1.0 && row.no_enc >= 0.0 &&
                    row.no_enc <= 1.0 && row.incorrect_mean >= 0.0 && row.incorrect_mean <= 1.0,
                "entry outside [0,1]");
  }
  out.require(f3.map_for("noenc") > f1.map_for("noenc"),
              "No-enc mAP not strictly greater for F3 than F1");
  out.detail << " (noenc F1 " << f1.map_for("noenc") << ", F2 " << f2.map_for("noenc") << ", F3 "
             << f3.map_for("noenc") << "; nondecreasing shallow->deep: "
             << (trend.no_enc_nondecreasing ? "yes" : "no") << ")";
  return out;
}

// ---------------------------------------------------------------------------
// criterion 8: random-key attack with 100 keys (Fig. 7 analog)
// ---------------------------------------------------------------------------

Outcome criterion8() {
  Outcome out;
  const auto cp = cp_f2_run();
  const auto model = minidet::load_checkpoint((fs::path(cp.run_dir) / "checkpoint").string());
  const auto t0 = Clock::now();
  const auto report = bench::random_key_attack(model, g_runs.test_data(), 100, kAttackSeed);
  const double correct = cp.map_for("correct");

  const std::string csv = (fs::path(g_runs.root) / "attack.csv").string();
  bench::write_attack_csv(csv, report);
  bench::write_boxplot_stats_csv((fs::path(g_runs.root) / "attack_boxplot.csv").string(),
                                 "cp_f2_attack", report);
  const auto reread = bench::summarize_attack(bench::read_attack_csv(csv));
  out.require(reread.min == report.min && reread.q1 == report.q1 &&
                  reread.median == report.median && reread.q3 == report.q3 &&
                  reread.max == report.max && reread.whisker_low == report.whisker_low &&
                  reread.whisker_high == report.whisker_high,
              "five-number summary not recomputable from raw CSV");

  out.require(report.median <= 0.5 * correct, "median attack mAP above 0.5 x Correct(K)");
  out.detail << " (median " << report.median << " vs correct " << correct << ", q1 " << report.q1
             << ", q3 " << report.q3 << ", " << seconds_since(t0) << " s)";
  return out;
}

// ---------------------------------------------------------------------------
// criterion 9: per-iteration overhead
// ---------------------------------------------------------------------------

Outcome criterion9() {
  Outcome out;
  const auto base = baseline_run();
  const auto cp = cp_f2_run();
  const auto report = bench::timing_report(base, cp);
  bench::write_timing_json((fs::path(g_runs.root) / "timing.json").string(), report);
  out.require(report.ratio <= 1.5, "keyed/plain ratio above 1.5");
  out.detail << " (plain " << report.plain_seconds_per_iteration << " s/iter, keyed "
             << report.keyed_seconds_per_iteration << " s/iter, ratio " << report.ratio << ")";

  const auto table =
      bench::convergence_report({{"baseline", base.loss_log}, {"cp_f2", cp.loss_log}}, 500);
  bench::write_convergence_csv((fs::path(g_runs.root) / "convergence.csv").string(), table);
  return out;
}

// ---------------------------------------------------------------------------
// criterion 10: manifest determinism
// ---------------------------------------------------------------------------

Outcome criterion10() {
  Outcome out;
  const auto base = baseline_run();
  const auto cp = cp_f2_run();

  // re-run both halves of criterion 5 from their manifests into a fresh root
  const std::string rerun_root = "acceptance_runs_rerun";
  fs::remove_all(rerun_root);
  const auto base_cfg = bench::ExperimentConfig::from_json(
      bench::read_manifest((fs::path(base.run_dir) / "manifest.json").string()).config);
  const auto cp_cfg = bench::ExperimentConfig::from_json(
      bench::read_manifest((fs::path(cp.run_dir) / "manifest.json").string()).config);
  const auto base2 = bench::run_experiment(base_cfg, rerun_root, &g_runs.train_data(),
                                           &g_runs.test_data());
  const auto cp2 = bench::run_experiment(cp_cfg, rerun_root, &g_runs.train_data(),
                                         &g_runs.test_data());

  out.require(base2.rows.size() == base.rows.size(), "baseline row count changed");
  for (size_t i = 0; i < base.rows.size(); ++i) {
    out.require(base2.rows[i].map == base.rows[i].map,
                "baseline mAP not bit-identical (" + base.rows[i].key_mode + ")");
  }
  out.require(cp2.rows.size() == cp.rows.size(), "cp row count changed");
  for (size_t i = 0; i < cp.rows.size(); ++i) {
    out.require(cp2.rows[i].map == cp.rows[i].map,
                "cp mAP not bit-identical (" + cp.rows[i].key_mode + ")");
  }
  out.require(cp2.loss_log == cp.loss_log, "cp loss log changed");
  std::ostringstream vals;
  vals << " (baseline " << base2.map_for("plain") << "; cp correct " << cp2.map_for("correct")
       << ", noenc " << cp2.map_for("noenc") << ", incorrect " << cp2.map_for("incorrect") << ")";
  out.detail << vals.str();
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  struct Entry {
    int id;
    const char* name;
    Outcome (*fn)();
  };
  const Entry entries[] = {
      {1, "cipher correctness suite (1000 randomized cases, < 10 s)", criterion1},
      {2, "key-space checks (3! = 6, 256! ~ 2^1684, CP enumeration)", criterion2},
      {3, "gradient suite (100 instances per op + composite, < 60 s)", criterion3},
      {4, "metric oracle equivalence (500 instances + fixtures)", criterion4},
      {5, "toy access-control experiment (Table 3 analog)", criterion5},
      {6, "SHF-input experiment (Table 2 analog)", criterion6},
      {7, "depth trend (No-enc F3 > F1)", criterion7},
      {8, "random-key attack (100 keys, Fig. 7 analog)", criterion8},
      {9, "per-iteration overhead (ratio <= 1.5)", criterion9},
      {10, "manifest determinism (bit-identical mAP)", criterion10},
  };

  int failures = 0;
  for (const Entry& entry : entries) {
    if (!only.empty() && !only.count(entry.id)) continue;
    std::printf("criterion %d: %s\n", entry.id, entry.name);
    std::fflush(stdout);
    Outcome out;
    try {
      out = entry.fn();
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail << "exception: " << e.what();
    }
    std::printf("[%s] criterion %d%s\n", out.pass ? "PASS" : "FAIL", entry.id,
                out.detail.str().c_str());
    std::fflush(stdout);
    if (!out.pass) ++failures;
  }
  if (failures) std::printf("%d criterion(s) FAILED\n", failures);
  else std::printf("all criteria passed\n");
  return failures == 0 ? 0 : 1;
}
