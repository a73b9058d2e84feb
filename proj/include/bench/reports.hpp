#pragma once

#include <string>
#include <vector>

#include "bench/attack.hpp"
#include "bench/experiment.hpp"

namespace bench {

/// Round-trip-exact decimal rendering of a double.
std::string format_double(double v);

struct TimingReport {
  double plain_seconds_per_iteration = 0.0;
  double keyed_seconds_per_iteration = 0.0;
  double ratio = 0.0;
  std::string os;
  std::string cpu;
  int cores = 0;
  std::vector<int> lr_phase_boundaries;  // from the keyed run's schedule
};

TimingReport timing_report(const ExperimentResult& plain, const ExperimentResult& keyed);
void write_timing_json(const std::string& path, const TimingReport& report);

struct ConvergenceTable {
  std::vector<std::string> run_names;
  std::vector<int> iterations;              // shared checkpoints
  std::vector<std::vector<double>> losses;  // [run][checkpoint]
};

/// Aligns loss logs at shared iteration checkpoints (every `checkpoint_every`
/// iterations); rejects logs that do not cover the same checkpoints.
ConvergenceTable convergence_report(
    const std::vector<std::pair<std::string, std::vector<std::pair<int, double>>>>& logs,
    int checkpoint_every = 500);
void write_convergence_csv(const std::string& path, const ConvergenceTable& table);

/// Markdown rendering of a results table plus boxplot five-number summary CSV
/// for external plotting.
std::string results_markdown(const std::vector<std::pair<std::string, std::vector<ModeResult>>>& tables);
void write_boxplot_stats_csv(const std::string& path, const std::string& label,
                             const AttackReport& report);

}  // namespace bench
