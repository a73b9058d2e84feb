#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "minidet/model.hpp"
#include "minidet/train.hpp"

namespace bench {

/// Boxplot statistics over per-key mAP values. Quartiles use linear
/// interpolation on the sorted sample (R type 7); whisker bounds are
/// [Q1 - 1.5*IQR, Q3 + 1.5*IQR].
struct AttackReport {
  std::vector<double> per_key_map;
  double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
  double whisker_low = 0, whisker_high = 0;
  std::vector<double> outliers;
};

AttackReport summarize_attack(std::vector<double> per_key_map);

/// Evaluates the protected model under n random keys applied at its
/// encrypted map. Rejects models without one.
AttackReport random_key_attack(const minidet::ModelState& model, const minidet::Dataset& test,
                               int n, uint64_t seed);

void write_attack_csv(const std::string& path, const AttackReport& report);
std::vector<double> read_attack_csv(const std::string& path);

}  // namespace bench
