#include "cachesim/coloring.hh"

#include <algorithm>
#include <numeric>
#include <string>

#include "cachesim/errors.hh"

namespace cachesim {

uint32_t num_colors(const CacheGeometry& g) {
  uint64_t denom = uint64_t(g.page_bytes) * g.assoc;
  if (denom == 0 || g.size_bytes % denom != 0 || g.size_bytes / denom == 0)
    throw ConfigError("page_bytes * assoc must divide size_bytes");
  return uint32_t(g.size_bytes / denom);
}

uint64_t mapping_table_bits(uint32_t cores, uint32_t M) {
  return uint64_t(cores) * M * log2_u64(M);
}

uint32_t region_of(uint64_t block_addr, const CacheGeometry& g, uint32_t M) {
  uint64_t page = block_addr / g.blocks_per_page();
  return uint32_t(page % M);
}

Placement locate(uint64_t block_addr, const ColorMap& map, const CacheGeometry& g, uint32_t M) {
  uint32_t region = region_of(block_addr, g, M);
  Placement p;
  p.color = map.region_to_color[region];
  p.set_in_color = block_addr % g.blocks_per_page();
  p.global_set = uint64_t(p.color) * g.blocks_per_page() + p.set_in_color;
  p.tag = block_addr;
  return p;
}

ColorMap balanced_map(const std::vector<uint32_t>& colors, uint32_t M) {
  CS_CHECK(!colors.empty(), "balanced_map with no colors");
  ColorMap m;
  m.region_to_color.resize(M);
  for (uint32_t r = 0; r < M; ++r) m.region_to_color[r] = colors[r % colors.size()];
  return m;
}

ColorMap rebalance_map(const ColorMap& old_map, const std::vector<uint32_t>& colors, uint32_t M) {
  CS_CHECK(!colors.empty(), "rebalance_map with no colors");
  size_t k = colors.size();
  uint32_t q = M / uint32_t(k), rem = M % uint32_t(k);

  std::vector<int32_t> slot_of(M, -1);
  for (size_t i = 0; i < k; ++i) slot_of[colors[i]] = int32_t(i);

  // Regions currently on retained colors, ascending region id per slot.
  std::vector<std::vector<uint32_t>> kept(k);
  std::vector<uint32_t> pool;
  for (uint32_t r = 0; r < M; ++r) {
    int32_t s = slot_of[old_map.region_to_color[r]];
    if (s >= 0)
      kept[size_t(s)].push_back(r);
    else
      pool.push_back(r);
  }

  // Slots keeping the most regions get the larger cap, ties to the lower color.
  std::vector<size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (kept[a].size() != kept[b].size()) return kept[a].size() > kept[b].size();
    return colors[a] < colors[b];
  });
  std::vector<uint32_t> cap(k, q);
  for (uint32_t i = 0; i < rem; ++i) cap[order[i]] = q + 1;

  for (size_t s = 0; s < k; ++s)
    while (kept[s].size() > cap[s]) {
      pool.push_back(kept[s].back());  // highest region ids move
      kept[s].pop_back();
    }
  std::sort(pool.begin(), pool.end());

  ColorMap m;
  m.region_to_color.resize(M);
  size_t next = 0;
  for (size_t s = 0; s < k; ++s) {
    for (uint32_t r : kept[s]) m.region_to_color[r] = colors[s];
    while (kept[s].size() < cap[s]) {
      CS_CHECK(next < pool.size(), "rebalance pool underflow");
      m.region_to_color[pool[next++]] = colors[s];
      kept[s].push_back(pool[next - 1]);
    }
  }
  CS_CHECK(next == pool.size(), "rebalance pool leftover");
  return m;
}

void check_allocation(const Allocation& a, uint32_t M) {
  std::vector<uint8_t> seen(M, 0);
  auto mark = [&](uint32_t c, const char* what) {
    if (c >= M) throw InvariantError(std::string(what) + ": color id out of range");
    if (seen[c]) throw InvariantError(std::string(what) + ": color assigned twice");
    seen[c] = 1;
  };
  if (a.core_colors.empty()) throw InvariantError("allocation has no color sets");
  if (a.shared && a.core_colors.size() != 1)
    throw InvariantError("shared allocation must have exactly one color set");
  for (const auto& cs : a.core_colors) {
    if (cs.empty()) throw InvariantError("allocation leaves a core with zero colors");
    if (!std::is_sorted(cs.begin(), cs.end())) throw InvariantError("color set not sorted");
    for (uint32_t c : cs) mark(c, "core colors");
  }
  if (!std::is_sorted(a.off_colors.begin(), a.off_colors.end()))
    throw InvariantError("off colors not sorted");
  for (uint32_t c : a.off_colors) mark(c, "off colors");
  for (uint32_t c = 0; c < M; ++c)
    if (!seen[c]) throw InvariantError("allocation does not cover color " + std::to_string(c));
}

ReconfigPlan plan_reallocation(const Allocation& old_alloc, const std::vector<ColorMap>& old_maps,
                               const Allocation& new_alloc, uint32_t M) {
  check_allocation(new_alloc, M);
  CS_CHECK(old_alloc.tables() == new_alloc.tables() && old_alloc.shared == new_alloc.shared,
           "reallocation cannot change the allocation shape");
  CS_CHECK(old_maps.size() == old_alloc.tables(), "one map per table required");

  ReconfigPlan plan;
  plan.new_alloc = new_alloc;
  plan.new_maps.resize(new_alloc.tables());
  for (size_t t = 0; t < new_alloc.tables(); ++t) {
    plan.new_maps[t] = rebalance_map(old_maps[t], new_alloc.core_colors[t], M);
    for (uint32_t r = 0; r < M; ++r) {
      uint32_t oc = old_maps[t].region_to_color[r];
      uint32_t nc = plan.new_maps[t].region_to_color[r];
      if (oc != nc) plan.moves.push_back({uint32_t(t), r, oc, nc});
    }
  }

  std::vector<uint8_t> was_off(M, 0), is_off(M, 0);
  for (uint32_t c : old_alloc.off_colors) was_off[c] = 1;
  for (uint32_t c : new_alloc.off_colors) is_off[c] = 1;
  for (uint32_t c = 0; c < M; ++c) {
    if (was_off[c] && !is_off[c]) plan.power_on.push_back(c);
    if (!was_off[c] && is_off[c]) plan.power_off.push_back(c);
  }
  return plan;
}

Allocation realize_counts(const Allocation& old_alloc, const std::vector<uint32_t>& counts,
                          uint32_t M) {
  CS_CHECK(counts.size() == old_alloc.tables(), "one count per table required");
  uint64_t total = 0;
  for (uint32_t c : counts) {
    CS_CHECK(c >= 1, "a table cannot drop to zero colors");
    total += c;
  }
  CS_CHECK(total <= M, "requested colors exceed M");

  Allocation out;
  out.shared = old_alloc.shared;
  out.core_colors.resize(old_alloc.tables());

  // Donors release their highest-ID colors, in table order.
  std::vector<uint32_t> donated;
  for (size_t t = 0; t < old_alloc.tables(); ++t) {
    std::vector<uint32_t> cs = old_alloc.core_colors[t];
    while (cs.size() > counts[t]) {
      donated.push_back(cs.back());
      cs.pop_back();
    }
    out.core_colors[t] = std::move(cs);
  }

  // Growers draw lowest-ID off colors first, then donated colors.
  std::vector<uint32_t> off_pool = old_alloc.off_colors;
  size_t off_next = 0, don_next = 0;
  for (size_t t = 0; t < old_alloc.tables(); ++t) {
    auto& cs = out.core_colors[t];
    while (cs.size() < counts[t]) {
      uint32_t c;
      if (off_next < off_pool.size())
        c = off_pool[off_next++];
      else {
        CS_CHECK(don_next < donated.size(), "color pool underflow");
        c = donated[don_next++];
      }
      cs.push_back(c);
    }
    std::sort(cs.begin(), cs.end());
  }

  for (size_t i = off_next; i < off_pool.size(); ++i) out.off_colors.push_back(off_pool[i]);
  for (size_t i = don_next; i < donated.size(); ++i) out.off_colors.push_back(donated[i]);
  std::sort(out.off_colors.begin(), out.off_colors.end());
  check_allocation(out, M);
  return out;
}

Allocation shared_full_allocation(uint32_t M) {
  Allocation a;
  a.shared = true;
  a.core_colors.resize(1);
  a.core_colors[0].resize(M);
  std::iota(a.core_colors[0].begin(), a.core_colors[0].end(), 0);
  return a;
}

Allocation equal_partition_allocation(uint32_t cores, uint32_t M) {
  CS_CHECK(cores >= 1 && cores <= M, "more cores than colors");
  Allocation a;
  a.core_colors.resize(cores);
  uint32_t q = M / cores, rem = M % cores;
  uint32_t next = 0;
  for (uint32_t n = 0; n < cores; ++n) {
    uint32_t take = q + (n < rem ? 1 : 0);
    for (uint32_t i = 0; i < take; ++i) a.core_colors[n].push_back(next++);
  }
  return a;
}

std::vector<ColorMap> initial_maps(const Allocation& a, uint32_t M) {
  std::vector<ColorMap> maps;
  maps.reserve(a.tables());
  for (const auto& cs : a.core_colors) maps.push_back(balanced_map(cs, M));
  return maps;
}

}  // namespace cachesim
