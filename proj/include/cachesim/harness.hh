#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cachesim/cache.hh"
#include "cachesim/coloring.hh"
#include "cachesim/energy.hh"
#include "cachesim/geometry.hh"
#include "cachesim/metrics.hh"
#include "cachesim/policies.hh"
#include "cachesim/trace.hh"

namespace cachesim {

// Reconfiguration policy driving a scenario.
enum class PolicyKind {
  None,        // plain run, no profiler, no reconfiguration
  Master,      // per-core color allocation, banded candidate search
  Palette,     // shared color count, candidate fan around the current size
  Encache,     // set/way rectangle chosen under a miss-rate guard
  CashierMsm,  // shared color count under an absolute slack budget
  CashierPsm,  // shared color count under a proportional slowdown budget
  Manager,     // per-core allocation protecting one target core's QoS
  Dct,         // per-line decay: gate lines idle longer than an interval
  Wac          // way count steered by the LRU-position hit ratio
};

std::string policy_name(PolicyKind k);
// Throws ConfigError on an unknown name.
PolicyKind policy_from_name(const std::string& name);

// When interval boundaries fall. Exactly one mode is active.
struct IntervalSpec {
  enum class Mode {
    Cycles,             // every `count` wall cycles
    Instructions,       // every `count` retired instructions (summed over cores)
    TargetInstructions  // every `count` instructions of the target core,
                        // snapped to the next `poll_cycles` wall multiple
  };
  Mode mode = Mode::Cycles;
  uint64_t count = 5'000'000;
  uint64_t poll_cycles = 1'000;  // TargetInstructions only
};

// Cycle charges applied to every core on top of simulated execution.
struct OverheadCycles {
  uint64_t algo_curve = 500;  // per boundary decision of a curve-search policy
  uint64_t algo_decay = 300;  // per decay sweep
  uint64_t algo_way = 20;     // per way-ratio check
  uint64_t reconfig = 600;    // whenever a decision changes the cache
};

// What the reference run shares the cache like.
enum class BaselineKind {
  Shared,      // all colors visible to every core
  StaticEqual  // fixed equal color split, no reconfiguration
};

struct ScenarioConfig {
  CacheGeometry geometry;
  ReplPolicy repl = ReplPolicy::LRU;
  PolicyKind policy = PolicyKind::None;
  EnergyParams params;
  std::string preset;  // informational echo; empty when params were explicit
  IntervalSpec interval;
  uint64_t sampling = 64;  // profiler set-sampling ratio (power of two)
  BaselineKind baseline = BaselineKind::Shared;
  OverheadCycles overheads;
  uint64_t seed = 0;           // echoed into reports for provenance
  uint32_t skip_intervals = 0; // drop this many leading intervals from totals
  MasterParams master;
  PaletteParams palette;
  EncacheParams encache;
  CashierParams cashier;
  ManagerParams manager;
  WacParams wac;
  // Idle threshold for the decay policy, in cycles. 0 derives it from the
  // energy parameters (break-even between leakage saved and refetch cost).
  double decay_cycles = 0;
};

// Throws ConfigError when fields are inconsistent.
void validate(const ScenarioConfig& c);

// Per-core slice of one interval, sufficient to replay the cycle ledger.
struct CoreIntervalStats {
  uint64_t instructions = 0;
  uint64_t accesses = 0;
  uint64_t hits = 0;
  uint64_t misses = 0;
  uint64_t load_misses = 0;
  uint64_t writebacks = 0;    // evictions by this core's accesses
  double compute_cycles = 0;  // instructions*cpi + load_misses*penalty*overlap
  double overhead_cycles = 0; // policy + reconfiguration charges
  double clock_end = 0;       // core clock after this interval
};

struct IntervalRecord {
  uint64_t index = 0;
  // Cache shape during the interval. Coloring policies fill `colors` (one
  // count per mapping table); rectangle policies fill the other two.
  std::vector<uint32_t> colors;
  uint64_t active_sets = 0;
  uint32_t active_ways = 0;
  double wall_start = 0;  // wall clock at the interval's start, cycles
  double wall_end = 0;
  IntervalStats stats;     // window totals, including boundary flush effects
  EnergyBreakdown energy;
  std::string decision;    // human-readable action taken at the boundary
  uint64_t evaluated_configs = 0;
  uint64_t flush_writebacks = 0;  // subset of stats.writebacks
  std::vector<CoreIntervalStats> per_core;
};

struct RunReport {
  std::string policy;
  std::string fingerprint;  // trace identity; compare() requires equality
  uint32_t cores = 0;
  uint64_t trace_events = 0;
  ScenarioConfig config;
  std::vector<IntervalRecord> intervals;
  // Aggregates over intervals[skip_intervals..]; each energy component is the
  // sum of the per-interval components and `total` is their fresh sum.
  IntervalStats totals;
  EnergyBreakdown energy_totals;
  double makespan_cycles = 0;  // wall clock spent in the counted window
  std::vector<CoreWindow> core_windows;
  double active_ratio = 1.0;   // time-weighted powered-line fraction
  double wall_seconds = 0;     // host time; excluded from determinism
};

// Simulate `trace_path` under `c`. Deterministic apart from wall_seconds.
RunReport run(const ScenarioConfig& c, const std::string& trace_path);

// Reference run: policy disabled, baseline energy accounting, cache shaped
// by c.baseline. Equivalent to run() with PolicyKind::None except that the
// StaticEqual baseline splits colors evenly instead of sharing them.
RunReport run_baseline(const ScenarioConfig& c, const std::string& trace_path);

// Relative metrics of `tech` against `base`. Throws InvariantError when the
// two reports describe different traces.
ComparisonMetrics compare(const RunReport& base, const RunReport& tech);

// The metrics() input corresponding to a report's counted window.
RunMetricsInput metrics_input(const RunReport& r);

}  // namespace cachesim
