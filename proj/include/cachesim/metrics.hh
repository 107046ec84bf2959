#pragma once

#include <cstdint>
#include <vector>

namespace cachesim {

// Per-core work accounting over the measured window.
struct CoreWindow {
  uint64_t instructions = 0;
  double cycles = 0;
};

// Everything a finished run contributes to a baseline/technique comparison.
struct RunMetricsInput {
  std::vector<CoreWindow> cores;
  double energy_total_j = 0;
  double makespan_cycles = 0;
  uint64_t accesses = 0;      // L2 accesses
  uint64_t misses = 0;        // L2 misses
  double active_ratio = 1.0;  // time-weighted powered fraction
};

struct ComparisonMetrics {
  double pct_energy_saved = 0;
  double weighted_speedup = 0;  // arithmetic mean of per-core IPC ratios
  double fair_speedup = 0;      // harmonic mean of per-core IPC ratios
  double active_ratio = 0;      // of the technique run
  double apki_delta = 0;        // accesses/kilo-instruction, absolute change
  double mpki_delta = 0;        // misses/kilo-instruction, absolute change
  double pct_edp_saved = 0;     // EDP = energy x makespan cycles
};

// Both runs must cover identical per-core instruction windows.
ComparisonMetrics metrics(const RunMetricsInput& base, const RunMetricsInput& tech);

// Suite aggregation: geometric mean for the speedups, arithmetic mean for
// everything else.
ComparisonMetrics aggregate_metrics(const std::vector<ComparisonMetrics>& per_workload);

}  // namespace cachesim
