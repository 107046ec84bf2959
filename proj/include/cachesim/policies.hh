#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "cachesim/cache.hh"
#include "cachesim/energy.hh"
#include "cachesim/profiler.hh"

namespace cachesim {

// ---------------------------------------------------------------------------
// Observations handed to the decision functions at an interval boundary.
// ---------------------------------------------------------------------------

// One accounting ledger. Per-core policies get one per core; shared-cache
// policies get a single aggregated entry (base = the wall-clock base, i.e.
// the slowest core's instruction work; counters summed over cores).
struct CoreObs {
  MissCurve curve;              // this interval's miss curve (full-scale counts)
  double base_cycles = 0;       // instructions * base_cpi
  double measured_cycles = 0;   // base + memory stalls (no reconfiguration costs)
  double spm_value = 0;         // measured stall cycles per load miss
  uint64_t accesses = 0;
  uint64_t hits = 0;
  uint64_t misses = 0;
  uint64_t load_misses = 0;
  uint64_t writebacks = 0;
};

struct IntervalObservation {
  std::vector<CoreObs> core;        // one per table (see `shared`)
  std::vector<uint32_t> colors;     // current per-table color counts
  uint32_t M = 0;                   // total colors
  uint32_t assoc = 0;
  bool shared = false;              // one table shared by all cores
  uint64_t rce_accesses = 0;        // measured, this interval
  uint64_t writebacks_total = 0;    // measured, this interval
  EnergyParams params;
};

// ---------------------------------------------------------------------------
// Decisions.
// ---------------------------------------------------------------------------

// Audit record of one evaluated configuration, kept so a test can re-run the
// same estimator over the same candidate set and confirm the argmin.
struct EvaluatedCandidate {
  std::vector<uint64_t> config;   // coloring: per-table color counts; set/way
                                  // policies: {active_sets, active_ways}
  double est_energy_j = 0;
  double est_extra_seconds = 0;   // estimated slowdown vs the policy's reference
  bool survived = true;           // passed the policy's feasibility filter
};

struct Decision {
  enum class Kind { NoChange, NewAllocation, NewConfig, BlockTurnoff, WaySetting };
  Kind kind = Kind::NoChange;
  std::vector<uint32_t> color_counts;  // NewAllocation: per-table color counts
  uint64_t active_sets = 0;            // NewConfig
  uint32_t active_ways = 0;            // NewConfig, WaySetting
  std::vector<std::pair<uint64_t, uint32_t>> lines;  // BlockTurnoff: (set, way)
  std::vector<EvaluatedCandidate> evaluated;
};

// ---------------------------------------------------------------------------
// Shared estimation helpers (exposed for the verification oracles).
// ---------------------------------------------------------------------------

// Predicted interval energy if the tables ran with `counts` colors: per-table
// cycles re-estimated from the miss curves, leakage over the slowest table's
// clock, dynamic energy from interpolated misses, writebacks and profiler
// traffic carried over as measured, transitions excluded.
double estimate_config_energy(const IntervalObservation& obs,
                              const std::vector<uint32_t>& counts);

// Per-table slowdown estimate in seconds vs a reference color count.
double estimate_extra_seconds(const IntervalObservation& obs, size_t table,
                              uint32_t colors, uint32_t reference_colors);

// ---------------------------------------------------------------------------
// Color-allocation policies.
// ---------------------------------------------------------------------------

struct MasterParams {
  uint32_t t_max = 4;    // candidates per core before pruning
  uint32_t t_prune = 2;  // candidates per core kept when 3+ cores
  std::vector<double> lambda = {50, 200, 300, 1000};  // marginal-gain bands
  double improve_min_pct = 0.3;  // adopt only if this much better than current
  uint32_t min_colors = 0;       // 0 = M/64
};

Decision master_esa(const IntervalObservation& obs, const MasterParams& p);

struct PaletteParams {
  uint32_t candidates = 11;  // including the current configuration
  uint32_t granularity = 2;  // colors move in steps of two
  std::vector<double> lambda = {50, 200, 300, 1000};
  uint32_t min_colors = 0;   // 0 = M/16
};

Decision palette_esa(const IntervalObservation& obs, const PaletteParams& p);

// CASHIER: deadline-aware shrinking of a shared cache. MSM mode budgets an
// absolute slack (seconds) per run; PSM mode budgets a percentage slowdown.
struct CashierParams {
  enum class Mode { MSM, PSM };
  Mode mode = Mode::PSM;
  double t_slack_seconds = 0;  // MSM: total allowed extra time
  double upsilon_pct = 5.0;    // PSM: allowed percentage slowdown
  double delta_pct = 0.3;      // safety margin under the percentage bound
  double reserve_fraction = 0.1;  // MSM holds back this share of the slack
  uint32_t l_range = 8;           // candidate window: current +/- l_range
  uint32_t horizon = 10;          // MSM spreads remaining slack this many intervals
  uint32_t min_colors = 0;        // 0 = M/16
};

struct CashierState {
  double t_acc_seconds = 0;    // accumulated estimated slowdown vs full cache
  double elapsed_seconds = 0;  // measured wall time so far
};

Decision cashier_esa(const IntervalObservation& obs, const CashierParams& p,
                     CashierState& state);

// MANAGER: QoS-holding reallocation between a target core and the rest.
struct ManagerParams {
  double omega_pct = 5.0;  // allowed slowdown of the target vs half-cache split
  double chi_pct = 0.4;    // safety margin under omega
  uint32_t max_transfer = 12;  // colors moved per table per interval
  std::vector<double> lambda = {50, 200, 300, 1000};
  uint32_t min_colors = 0;          // 0 = M/32
  std::optional<uint32_t> target;   // which table holds the QoS application
};

struct ManagerState {
  double t_acc_seconds = 0;    // target's accumulated slowdown vs half-cache
  double elapsed_seconds = 0;  // target's measured wall time so far
};

Decision manager_esa(const IntervalObservation& obs, const ManagerParams& p,
                     ManagerState& state);

// ---------------------------------------------------------------------------
// Set/way reconfiguration (hybrid cache sizing).
// ---------------------------------------------------------------------------

// Per-(set-state, way-count) estimates from the Mattson way counters,
// aggregated over all cores.
struct WayObs {
  std::vector<uint64_t> set_states;  // ascending; last entry = full size
  uint32_t assoc = 0;
  std::vector<std::vector<double>> misses;       // [state][way-1], full-scale
  std::vector<std::vector<double>> load_misses;  // [state][way-1]
  double base_cycles = 0;      // wall-clock instruction work
  double measured_cycles = 0;  // wall clock of the interval
  double spm_value = 0;
  uint64_t accesses = 0;
  uint64_t writebacks = 0;
  uint64_t rce_accesses = 0;
  EnergyParams params;
};

struct EncacheParams {
  double dpmr_pct = 3.0;  // max estimated slowdown vs (full sets, all ways)
};

Decision encache_esa(const WayObs& obs, const EncacheParams& p);

// ---------------------------------------------------------------------------
// Block-grain decay (DCT).
// ---------------------------------------------------------------------------

// Exact per-line last-access clocks standing in for hierarchical counters.
class DctState {
 public:
  DctState(uint64_t sets, uint32_t assoc);
  void observe(uint64_t set, uint32_t way, double now_cycles);
  std::vector<std::pair<uint64_t, uint32_t>> expired(const TagStore& store, double now_cycles,
                                                     double decay_interval_cycles) const;

 private:
  uint64_t sets_;
  uint32_t assoc_;
  std::vector<double> last_;
};

Decision dct_tick(const TagStore& store, const DctState& state, double now_cycles,
                  double decay_interval_cycles);

// ---------------------------------------------------------------------------
// Way-grain adaptation (WAC).
// ---------------------------------------------------------------------------

struct WacParams {
  double t1 = 0.005;        // shrink when LRU-way hit share falls below this
  double t2 = 0.02;         // grow when it rises above this
  uint64_t k_hits = 100000; // evaluate after this many cache hits
};

// Hit counts by recency position within the current window: index 0 counts
// hits at the MRU position, index active_ways-1 at the LRU position.
struct WacWindow {
  std::vector<uint64_t> hits_by_rank;
};

Decision wac_tick(const WacWindow& window, uint32_t active_ways, uint32_t assoc,
                  const WacParams& p);

}  // namespace cachesim
