#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cachesim/geometry.hh"

namespace cachesim {

// Memory-subsystem energy constants. Dynamic energies are nanojoules per
// access, leakage is watts, frequency is hertz.
struct EnergyParams {
  double e_dyn_l2_nj = 0.289;   // per L2 access (a miss costs twice a hit)
  double p_leak_l2_w = 1.39;
  double e_dyn_dram_nj = 70.0;  // per DRAM access
  double p_leak_dram_w = 0.18;
  double e_dyn_rce_nj = 0.005;  // per profiler access
  double p_leak_rce_w = 0.006;
  double e_chi_nj = 0.002;      // per block power transition
  double p_off = 0.03;          // residual leakage of a gated block
  double upsilon = 0.05;        // leakage overhead of the gating circuitry
  double g_f = 0.03;            // tag fraction of dynamic access energy
  double d_f = 0.97;            // data fraction (g_f + d_f = 1)
  double frequency_hz = 2.8e9;
};

// Throws ConfigError on out-of-range fields.
void validate(const EnergyParams& p);

// Named parameter sets from CACTI runs: "cacti32nm-4mb" (RCE tabulated for 2
// cores), "cacti32nm-8mb" (RCE for 4 cores), "cacti45nm-2mb" (one-core RCE,
// 1.5 GHz). RCE energy scales linearly with the core count, so the tabulated
// row is rescaled to `cores`.
EnergyParams energy_preset(const std::string& name, uint32_t cores);
std::vector<std::string> energy_preset_names();

// Aggregate counters for one accounting window (an interval or a whole run).
struct IntervalStats {
  uint64_t instructions = 0;
  double cycles = 0;         // wall clock of the window, in cycles
  uint64_t l2_hits = 0;
  uint64_t l2_misses = 0;
  uint64_t load_misses = 0;
  uint64_t writebacks = 0;   // dirty evictions + flush writebacks
  uint64_t rce_accesses = 0;
  uint64_t transitions = 0;  // block power state changes
  double active_fraction = 1.0;  // F_A: powered fraction of the cache
  double active_ways = 8;        // W: ways serviced per lookup
  uint32_t assoc = 8;

  uint64_t dram_accesses() const { return l2_misses + writebacks; }
  double time_seconds(double frequency_hz) const { return cycles / frequency_hz; }
};

struct EnergyBreakdown {
  double le_l2 = 0;   // L2 leakage
  double de_l2 = 0;   // L2 dynamic
  double e_dram = 0;  // DRAM leakage + dynamic
  double e_tran = 0;  // block transitions (included in e_algo)
  double e_algo = 0;  // technique overhead: transitions + profiler
  double total = 0;   // le_l2 + de_l2 + e_dram + e_algo, summed in this order
};

enum class EnergyMode { Baseline, Technique };

// Baseline mode prices a plain cache: no gating (F_A=1, no gating overhead),
// all ways live, and no technique hardware (e_algo = 0).
EnergyBreakdown energy(const IntervalStats& s, const EnergyParams& p, EnergyMode mode);

// Stall cycles per load miss; 0 when there were no load misses.
double spm(double stall_cycles, double load_misses);

// Predicted window length if the same work ran with a configuration that
// would produce `load_misses_at_config` load misses.
double estimate_cycles(double base_cycles, double spm_value, double load_misses_at_config);

// Ground-truth core clock: instructions*base_cpi + load_misses*penalty*overlap.
double simulate_cycles(double instructions, double load_misses, double base_cpi,
                       double miss_penalty, double overlap);

// Idle time after which a block's accumulated leakage equals one DRAM access:
// e_dyn_dram * frequency * total_blocks / p_leak_l2.
double decay_interval_cycles(const EnergyParams& p, const CacheGeometry& g);

}  // namespace cachesim
