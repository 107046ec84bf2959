#pragma once

#include <cstdint>
#include <vector>

#include "cachesim/geometry.hh"

namespace cachesim {

// One region->color table. Every memory region (pages sharing the low
// log2(M) page-number bits) maps to exactly one color.
struct ColorMap {
  std::vector<uint32_t> region_to_color;  // length M
};

// Color ownership. Partitioned mode: core_colors[n] is core n's disjoint color
// set. Shared mode: core_colors has a single entry used by every core.
struct Allocation {
  bool shared = false;
  std::vector<std::vector<uint32_t>> core_colors;  // each sorted ascending
  std::vector<uint32_t> off_colors;                // sorted ascending
  size_t tables() const { return core_colors.size(); }
};

// M = size / (page_bytes * assoc): disjoint groups of one page-frame's worth
// of sets, the unit of allocation and power gating.
uint32_t num_colors(const CacheGeometry& g);

// Total bits across the per-core mapping tables: cores * M * log2(M).
uint64_t mapping_table_bits(uint32_t cores, uint32_t M);

uint32_t region_of(uint64_t block_addr, const CacheGeometry& g, uint32_t M);

struct Placement {
  uint32_t color;
  uint64_t set_in_color;  // page-offset bits above the block offset
  uint64_t global_set;    // color * sets_per_color + set_in_color
  uint64_t tag;           // full block address
};
Placement locate(uint64_t block_addr, const ColorMap& map, const CacheGeometry& g, uint32_t M);

// Fresh even-spread table: region r -> colors[r % |colors|].
ColorMap balanced_map(const std::vector<uint32_t>& colors, uint32_t M);

// Rebalance an existing table onto a new color set: per-color region counts
// end within +-1 of each other, and a region moves only if its color was
// dropped or its color exceeds the even-spread cap.
ColorMap rebalance_map(const ColorMap& old_map, const std::vector<uint32_t>& colors, uint32_t M);

struct RegionMove {
  uint32_t table;  // index into the allocation's tables
  uint32_t region;
  uint32_t from_color;
  uint32_t to_color;
};

struct ReconfigPlan {
  std::vector<RegionMove> moves;    // flush the region's old lines, then remap
  std::vector<uint32_t> power_on;   // colors leaving the off set
  std::vector<uint32_t> power_off;  // colors entering the off set
  std::vector<ColorMap> new_maps;   // one per table
  Allocation new_alloc;
  bool empty() const { return moves.empty() && power_on.empty() && power_off.empty(); }
};

// Throws ConfigError unless the color sets are pairwise disjoint, nonempty per
// table, and together with off_colors cover all M colors exactly once.
void check_allocation(const Allocation& a, uint32_t M);

ReconfigPlan plan_reallocation(const Allocation& old_alloc, const std::vector<ColorMap>& old_maps,
                               const Allocation& new_alloc, uint32_t M);

// Materialize per-table color counts into concrete color IDs: growth takes the
// lowest-ID off colors first, then donors' highest-ID colors; freed colors not
// taken by another table are powered off.
Allocation realize_counts(const Allocation& old_alloc, const std::vector<uint32_t>& counts,
                          uint32_t M);

// Initial layouts.
Allocation shared_full_allocation(uint32_t M);
Allocation equal_partition_allocation(uint32_t cores, uint32_t M);
std::vector<ColorMap> initial_maps(const Allocation& a, uint32_t M);

}  // namespace cachesim
