#include "cachesim/metrics.hh"

#include <cmath>

#include "cachesim/errors.hh"

namespace cachesim {

ComparisonMetrics metrics(const RunMetricsInput& base, const RunMetricsInput& tech) {
  if (base.cores.size() != tech.cores.size())
    throw ConfigError("runs have different core counts");
  size_t n = base.cores.size();
  CS_CHECK(n >= 1, "empty run");
  double ratio_sum = 0, inv_ratio_sum = 0;
  uint64_t instr_base = 0, instr_tech = 0;
  for (size_t i = 0; i < n; ++i) {
    if (base.cores[i].instructions != tech.cores[i].instructions)
      throw ConfigError("instruction windows differ between runs");
    CS_CHECK(base.cores[i].cycles > 0 && tech.cores[i].cycles > 0, "zero-cycle core window");
    double ipc_b = double(base.cores[i].instructions) / base.cores[i].cycles;
    double ipc_t = double(tech.cores[i].instructions) / tech.cores[i].cycles;
    CS_CHECK(ipc_b > 0 && ipc_t > 0, "non-positive IPC");
    ratio_sum += ipc_t / ipc_b;
    inv_ratio_sum += ipc_b / ipc_t;
    instr_base += base.cores[i].instructions;
    instr_tech += tech.cores[i].instructions;
  }

  ComparisonMetrics m;
  m.weighted_speedup = ratio_sum / double(n);
  m.fair_speedup = double(n) / inv_ratio_sum;
  CS_CHECK(base.energy_total_j > 0, "baseline energy must be positive");
  m.pct_energy_saved = (base.energy_total_j - tech.energy_total_j) * 100.0 / base.energy_total_j;
  m.active_ratio = tech.active_ratio;
  CS_CHECK(instr_base > 0, "zero-instruction window");
  double apki_b = double(base.accesses) * 1000.0 / double(instr_base);
  double apki_t = double(tech.accesses) * 1000.0 / double(instr_tech);
  m.apki_delta = apki_t - apki_b;
  double mpki_b = double(base.misses) * 1000.0 / double(instr_base);
  double mpki_t = double(tech.misses) * 1000.0 / double(instr_tech);
  m.mpki_delta = mpki_t - mpki_b;
  double edp_b = base.energy_total_j * base.makespan_cycles;
  double edp_t = tech.energy_total_j * tech.makespan_cycles;
  CS_CHECK(edp_b > 0, "baseline EDP must be positive");
  m.pct_edp_saved = (edp_b - edp_t) * 100.0 / edp_b;
  return m;
}

ComparisonMetrics aggregate_metrics(const std::vector<ComparisonMetrics>& per_workload) {
  CS_CHECK(!per_workload.empty(), "nothing to aggregate");
  ComparisonMetrics agg;
  double log_ws = 0, log_fs = 0;
  for (const ComparisonMetrics& m : per_workload) {
    CS_CHECK(m.weighted_speedup > 0 && m.fair_speedup > 0, "non-positive speedup");
    log_ws += std::log(m.weighted_speedup);
    log_fs += std::log(m.fair_speedup);
    agg.pct_energy_saved += m.pct_energy_saved;
    agg.active_ratio += m.active_ratio;
    agg.apki_delta += m.apki_delta;
    agg.mpki_delta += m.mpki_delta;
    agg.pct_edp_saved += m.pct_edp_saved;
  }
  double n = double(per_workload.size());
  agg.weighted_speedup = std::exp(log_ws / n);
  agg.fair_speedup = std::exp(log_fs / n);
  agg.pct_energy_saved /= n;
  agg.active_ratio /= n;
  agg.apki_delta /= n;
  agg.mpki_delta /= n;
  agg.pct_edp_saved /= n;
  return agg;
}

}  // namespace cachesim
