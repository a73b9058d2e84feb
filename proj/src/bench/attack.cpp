#include "bench/attack.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "bench/experiment.hpp"
#include "bench/reports.hpp"
#include "ndkit/rng.hpp"

namespace bench {

namespace {

double quantile(const std::vector<double>& sorted, double p) {
  const size_t n = sorted.size();
  if (n == 1) return sorted[0];
  const double pos = p * static_cast<double>(n - 1);
  const size_t lo = static_cast<size_t>(pos);
  const size_t hi = std::min(lo + 1, n - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

AttackReport summarize_attack(std::vector<double> per_key_map) {
  if (per_key_map.empty()) throw std::invalid_argument("summarize_attack: empty sample");
  AttackReport report;
  report.per_key_map = std::move(per_key_map);
  std::vector<double> sorted(report.per_key_map);
  std::sort(sorted.begin(), sorted.end());
  report.min = sorted.front();
  report.max = sorted.back();
  report.q1 = quantile(sorted, 0.25);
  report.median = quantile(sorted, 0.5);
  report.q3 = quantile(sorted, 0.75);
  const double iqr = report.q3 - report.q1;
  report.whisker_low = report.q1 - 1.5 * iqr;
  report.whisker_high = report.q3 + 1.5 * iqr;
  for (double v : sorted) {
    if (v < report.whisker_low || v > report.whisker_high) report.outliers.push_back(v);
  }
  return report;
}

AttackReport random_key_attack(const minidet::ModelState& model, const minidet::Dataset& test,
                               int n, uint64_t seed) {
  if (model.config.kind != minidet::EncryptionKind::CpFeature || !model.config.encrypted_map) {
    throw std::invalid_argument("random_key_attack: model has no encrypted feature map");
  }
  if (n < 1) throw std::invalid_argument("random_key_attack: need at least one key");
  const int length = minidet::feature_map_channels(*model.config.encrypted_map);
  std::vector<double> maps;
  maps.reserve(static_cast<size_t>(n));
  for (const auto& key : cipher::random_keys(n, length, seed)) {
    maps.push_back(eval_map(model, test, minidet::KeyMode::keyed(key)));
  }
  return summarize_attack(std::move(maps));
}

void write_attack_csv(const std::string& path, const AttackReport& report) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "key_index,map\n";
  for (size_t i = 0; i < report.per_key_map.size(); ++i) {
    out << i << "," << format_double(report.per_key_map[i]) << "\n";
  }
}

std::vector<double> read_attack_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::string line;
  if (!std::getline(in, line) || line != "key_index,map") {
    throw std::runtime_error(path + ": unexpected attack CSV header");
  }
  std::vector<double> values;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    values.push_back(std::stod(line.substr(comma + 1)));
  }
  return values;
}

}  // namespace bench
