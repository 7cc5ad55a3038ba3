#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "noir/config.hpp"
#include "noir/protocol.hpp"

namespace noir {

struct BenchmarkRow {
  std::string task;  // task id, or "ALL" for the cross-task row
  ProtocolMode mode = ProtocolMode::Noir2;
  int trials = 0;
  double success_rate = 0.0;
  double mean_time_s = 0.0;
  double mean_human_time_s = 0.0;
  double time_reduction_pct = 0.0;   // mean total time vs Noir1
  double reduction_pct = 0.0;        // mean human time vs Noir1
  bool identities_hold = true;
};

struct BenchmarkSummary {
  std::vector<BenchmarkRow> rows;  // task-major, modes in request order, then the ALL rows
  std::vector<TrialReport> reports;
};

/// 100 * (1 - after / before).
double reduction_percent(double before, double after);

/// Seed s of n runs with trial seed derive_seed(base.seed, s + 1). Decoders are
/// calibrated once per mode; Noir2Learning trials share one demo per task
/// captured from a fully decoded trial on the nominal layout.
BenchmarkSummary run_benchmark(const ProtocolConfig& base, const std::vector<std::string>& tasks,
                               const std::vector<ProtocolMode>& modes, int n_seeds);

void write_benchmark_csv(std::ostream& os, const BenchmarkSummary& s);
void write_benchmark_table(std::ostream& os, const BenchmarkSummary& s);

}  // namespace noir
