#include "bench/reports.hpp"

#include <sys/utsname.h>

#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace bench {

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

namespace {

std::string read_cpu_model() {
  std::ifstream in("/proc/cpuinfo");
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("model name", 0) == 0) {
      const auto colon = line.find(':');
      if (colon != std::string::npos) {
        size_t start = colon + 1;
        while (start < line.size() && line[start] == ' ') ++start;
        return line.substr(start);
      }
    }
  }
  return "unknown";
}

std::string read_os_description() {
  utsname u{};
  if (uname(&u) == 0) {
    return std::string(u.sysname) + " " + u.release + " " + u.machine;
  }
  return "unknown";
}

}  // namespace

TimingReport timing_report(const ExperimentResult& plain, const ExperimentResult& keyed) {
  TimingReport report;
  report.plain_seconds_per_iteration = plain.mean_seconds_per_iteration;
  report.keyed_seconds_per_iteration = keyed.mean_seconds_per_iteration;
  if (plain.mean_seconds_per_iteration <= 0.0) {
    throw std::invalid_argument("timing_report: plain run has no timing data");
  }
  report.ratio = keyed.mean_seconds_per_iteration / plain.mean_seconds_per_iteration;
  report.os = read_os_description();
  report.cpu = read_cpu_model();
  report.cores = static_cast<int>(std::thread::hardware_concurrency());
  for (const auto& phase : keyed.config.train.lr_schedule) {
    report.lr_phase_boundaries.push_back(phase.until_iteration);
  }
  return report;
}

void write_timing_json(const std::string& path, const TimingReport& report) {
  nlohmann::json j;
  j["plain_seconds_per_iteration"] = report.plain_seconds_per_iteration;
  j["keyed_seconds_per_iteration"] = report.keyed_seconds_per_iteration;
  j["ratio"] = report.ratio;
  j["environment"] = {{"os", report.os}, {"cpu", report.cpu}, {"cores", report.cores}};
  j["lr_phase_boundaries"] = report.lr_phase_boundaries;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << "\n";
}

ConvergenceTable convergence_report(
    const std::vector<std::pair<std::string, std::vector<std::pair<int, double>>>>& logs,
    int checkpoint_every) {
  if (logs.size() < 2) throw std::invalid_argument("convergence_report: need at least two logs");
  ConvergenceTable table;

  std::vector<std::map<int, double>> by_iter;
  for (const auto& [name, log] : logs) {
    table.run_names.push_back(name);
    std::map<int, double> m;
    for (const auto& [iter, loss] : log) {
      if (iter % checkpoint_every == 0) m[iter] = loss;
    }
    by_iter.push_back(std::move(m));
  }

  for (const auto& [iter, loss] : by_iter[0]) {
    bool shared = true;
    for (size_t r = 1; r < by_iter.size(); ++r) {
      if (!by_iter[r].count(iter)) shared = false;
    }
    if (shared) table.iterations.push_back(iter);
  }
  if (table.iterations.empty()) {
    throw std::invalid_argument("convergence_report: logs share no checkpoints");
  }
  for (const auto& m : by_iter) {
    std::vector<double> row;
    row.reserve(table.iterations.size());
    for (int iter : table.iterations) row.push_back(m.at(iter));
    table.losses.push_back(std::move(row));
  }
  return table;
}

void write_convergence_csv(const std::string& path, const ConvergenceTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "iteration";
  for (const auto& name : table.run_names) out << "," << name;
  out << "\n";
  for (size_t i = 0; i < table.iterations.size(); ++i) {
    out << table.iterations[i];
    for (size_t r = 0; r < table.losses.size(); ++r) out << "," << format_double(table.losses[r][i]);
    out << "\n";
  }
}

std::string results_markdown(
    const std::vector<std::pair<std::string, std::vector<ModeResult>>>& tables) {
  std::ostringstream os;
  os << "| mode | key mode | mAP | samples |\n";
  os << "|------|----------|-----|---------|\n";
  for (const auto& [label, rows] : tables) {
    for (const auto& row : rows) {
      os << "| " << label << " | " << row.key_mode << " | ";
      os.precision(4);
      os << std::fixed << row.map;
      os.unsetf(std::ios_base::floatfield);
      os << " | " << row.samples << " |\n";
    }
  }
  return os.str();
}

void write_boxplot_stats_csv(const std::string& path, const std::string& label,
                             const AttackReport& report) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "label,min,q1,median,q3,max,whisker_low,whisker_high,n_outliers\n";
  out << label << "," << format_double(report.min) << "," << format_double(report.q1) << ","
      << format_double(report.median) << "," << format_double(report.q3) << ","
      << format_double(report.max) << "," << format_double(report.whisker_low) << ","
      << format_double(report.whisker_high) << "," << report.outliers.size() << "\n";
}

}  // namespace bench
