#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "cachesim/geometry.hh"

namespace cachesim {

enum class ReplPolicy { LRU, FIFO, PLRU };
enum class AccessKind { Load, Store };

struct AccessOutcome {
  bool hit = false;
  bool evicted_dirty = false;
  std::optional<uint64_t> victim_tag;
  bool is_load = false;
  uint32_t way = 0;       // way touched: the hit way, or the install way on a miss
  uint32_t hit_rank = 0;  // recency rank of the hit way (1 = MRU), 0 on a miss
  bool woke_line = false; // install reused a powered-off way (per-line power mode only)
};

struct CacheLine {
  uint64_t tag = 0;    // full block address; remapping can never alias to a false hit
  uint64_t stamp = 0;  // LRU: bumped on every touch; FIFO: install time only
  uint32_t owner = 0;
  bool valid = false;
  bool dirty = false;
  bool mru = false;    // PLRU MRU bit
  bool powered = true;
};

struct FlushFilter {
  std::optional<uint32_t> core;    // keep only this owner's lines
  std::optional<uint32_t> region;  // keep only lines of this memory region
  uint32_t region_colors = 0;      // M, required with region
  const CacheGeometry* geom = nullptr;
};

// Set-associative tag store with power gating at color, (set,way)-rectangle,
// and per-line granularity. Stores no data; dirty bits drive writeback counts.
class TagStore {
 public:
  // colors > 0 enables color-granular operations (sets must divide evenly).
  TagStore(uint64_t sets, uint32_t assoc, ReplPolicy policy, uint32_t colors = 0);

  AccessOutcome access(uint32_t core, uint64_t set, uint64_t tag, AccessKind kind);

  // Invalidates matching valid lines in [set_lo,set_hi) x [way_lo,way_hi).
  // Returns {clean, dirty} counts; dirty lines owe a DRAM writeback.
  std::pair<uint64_t, uint64_t> flush_range(uint64_t set_lo, uint64_t set_hi, uint32_t way_lo,
                                            uint32_t way_hi,
                                            const FlushFilter& f = FlushFilter{});
  std::pair<uint64_t, uint64_t> flush_color(uint32_t color,
                                            std::optional<uint32_t> only_core = std::nullopt,
                                            std::optional<uint32_t> only_region = std::nullopt,
                                            const CacheGeometry* geom = nullptr);
  std::pair<uint64_t, uint64_t> flush_all();

  // Turning a color off requires it to hold no valid lines. Returns the number
  // of lines whose power state actually changed (for transition-energy counts).
  uint64_t set_color_power(uint32_t color, bool on);
  bool color_powered(uint32_t color) const;

  // Power exactly the [0,active_sets) x [0,active_ways) rectangle; everything
  // else off. Caller must have flushed the newly powered-off part. Returns the
  // number of lines toggled. Also narrows the victim-scan way range.
  uint64_t set_active_rect(uint64_t active_sets, uint32_t active_ways);
  uint64_t active_sets() const { return active_sets_; }
  uint32_t active_ways() const { return active_ways_; }

  // Per-line gating (decay-style): invalidate and power off one valid line.
  // Returns true if the line was dirty. Powered-off lines are woken by the
  // next install into their slot (reported via AccessOutcome::woke_line).
  bool decay_line(uint64_t set, uint32_t way);
  void set_per_line_power_mode(bool on) { per_line_power_ = on; }

  uint64_t powered_lines() const { return powered_lines_; }
  const CacheLine& line(uint64_t set, uint32_t way) const { return lines_[set * assoc_ + way]; }
  uint64_t sets() const { return sets_; }
  uint32_t assoc() const { return assoc_; }
  uint32_t colors() const { return colors_; }
  uint64_t sets_per_color() const { return sets_per_color_; }
  ReplPolicy policy() const { return policy_; }

  // Test hook: every valid line must be powered.
  bool power_safe() const;

 private:
  CacheLine* row(uint64_t set) { return &lines_[set * assoc_]; }
  uint32_t pick_victim(CacheLine* row) const;
  void touch(CacheLine* row, uint32_t way);

  uint64_t sets_;
  uint32_t assoc_;
  ReplPolicy policy_;
  uint32_t colors_;
  uint64_t sets_per_color_;
  uint64_t active_sets_;
  uint32_t active_ways_;
  bool per_line_power_ = false;
  uint64_t tick_ = 0;
  uint64_t powered_lines_;
  std::vector<CacheLine> lines_;
  std::vector<uint8_t> color_on_;
};

}  // namespace cachesim
