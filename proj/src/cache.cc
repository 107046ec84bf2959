#include "cachesim/cache.hh"

#include "cachesim/coloring.hh"
#include "cachesim/errors.hh"

namespace cachesim {

TagStore::TagStore(uint64_t sets, uint32_t assoc, ReplPolicy policy, uint32_t colors)
    : sets_(sets),
      assoc_(assoc),
      policy_(policy),
      colors_(colors),
      sets_per_color_(colors ? sets / colors : 0),
      active_sets_(sets),
      active_ways_(assoc),
      powered_lines_(sets * assoc),
      lines_(sets * assoc) {
  CS_CHECK(sets > 0 && assoc > 0, "empty tag store");
  if (colors) {
    CS_CHECK(sets % colors == 0, "colors must divide sets");
    color_on_.assign(colors, 1);
  }
}

void TagStore::touch(CacheLine* row, uint32_t way) {
  CacheLine& l = row[way];
  l.stamp = ++tick_;
  if (policy_ == ReplPolicy::PLRU) {
    l.mru = true;
    // Reset rule: when every valid active way has its MRU bit set, clear all
    // but the just-accessed way.
    bool saturated = true;
    for (uint32_t w = 0; w < active_ways_; ++w)
      if (row[w].valid && !row[w].mru) {
        saturated = false;
        break;
      }
    if (saturated)
      for (uint32_t w = 0; w < active_ways_; ++w)
        if (w != way) row[w].mru = false;
  }
}

uint32_t TagStore::pick_victim(CacheLine* row) const {
  // Invalid ways are always preferred, lowest index first.
  for (uint32_t w = 0; w < active_ways_; ++w)
    if (!row[w].valid) return w;
  switch (policy_) {
    case ReplPolicy::LRU:
    case ReplPolicy::FIFO: {
      uint32_t victim = 0;
      uint64_t best = UINT64_MAX;
      for (uint32_t w = 0; w < active_ways_; ++w)
        if (row[w].stamp < best) {
          best = row[w].stamp;
          victim = w;
        }
      return victim;
    }
    case ReplPolicy::PLRU:
      for (uint32_t w = 0; w < active_ways_; ++w)
        if (!row[w].mru) return w;
      // Unreachable: the reset rule keeps at least one MRU bit clear.
      return 0;
  }
  return 0;
}

AccessOutcome TagStore::access(uint32_t core, uint64_t set, uint64_t tag, AccessKind kind) {
  CS_CHECK(set < sets_, "set out of range");
  AccessOutcome out;
  out.is_load = kind == AccessKind::Load;
  CacheLine* r = row(set);

  for (uint32_t w = 0; w < active_ways_; ++w) {
    CacheLine& l = r[w];
    if (l.valid && l.tag == tag) {
      CS_CHECK(l.powered, "hit on a powered-off line");
      out.hit = true;
      out.way = w;
      if (policy_ != ReplPolicy::PLRU) {
        uint32_t rank = 1;
        for (uint32_t v = 0; v < active_ways_; ++v)
          if (r[v].valid && r[v].stamp > l.stamp) ++rank;
        out.hit_rank = rank;
      } else {
        out.hit_rank = 1;  // PLRU has no total recency order
      }
      if (policy_ == ReplPolicy::LRU || policy_ == ReplPolicy::PLRU) touch(r, w);
      if (kind == AccessKind::Store) l.dirty = true;
      return out;
    }
  }

  uint32_t w = pick_victim(r);
  CacheLine& v = r[w];
  out.way = w;
  if (v.valid) {
    out.victim_tag = v.tag;
    out.evicted_dirty = v.dirty;
  }
  if (!v.powered) {
    CS_CHECK(per_line_power_, "install into a powered-off way outside per-line power mode");
    v.powered = true;
    ++powered_lines_;
    out.woke_line = true;
  }
  v.valid = true;
  v.tag = tag;
  v.owner = core;
  v.dirty = kind == AccessKind::Store;
  touch(r, w);
  return out;
}

std::pair<uint64_t, uint64_t> TagStore::flush_range(uint64_t set_lo, uint64_t set_hi,
                                                    uint32_t way_lo, uint32_t way_hi,
                                                    const FlushFilter& f) {
  CS_CHECK(set_hi <= sets_ && way_hi <= assoc_, "flush range out of bounds");
  uint64_t clean = 0, dirty = 0;
  for (uint64_t s = set_lo; s < set_hi; ++s) {
    CacheLine* r = row(s);
    for (uint32_t w = way_lo; w < way_hi; ++w) {
      CacheLine& l = r[w];
      if (!l.valid) continue;
      if (f.core && l.owner != *f.core) continue;
      if (f.region) {
        CS_CHECK(f.geom && f.region_colors, "region flush needs geometry and color count");
        if (region_of(l.tag, *f.geom, f.region_colors) != *f.region) continue;
      }
      if (l.dirty)
        ++dirty;
      else
        ++clean;
      l.valid = false;
      l.dirty = false;
      l.mru = false;
    }
  }
  return {clean, dirty};
}

std::pair<uint64_t, uint64_t> TagStore::flush_color(uint32_t color, std::optional<uint32_t> only_core,
                                                    std::optional<uint32_t> only_region,
                                                    const CacheGeometry* geom) {
  CS_CHECK(colors_ && color < colors_, "flush_color: bad color");
  FlushFilter f;
  f.core = only_core;
  f.region = only_region;
  f.region_colors = colors_;
  f.geom = geom;
  return flush_range(color * sets_per_color_, (color + 1) * sets_per_color_, 0, assoc_, f);
}

std::pair<uint64_t, uint64_t> TagStore::flush_all() { return flush_range(0, sets_, 0, assoc_); }

uint64_t TagStore::set_color_power(uint32_t color, bool on) {
  CS_CHECK(colors_ && color < colors_, "set_color_power: bad color");
  if (color_on_[color] == (on ? 1 : 0)) return 0;
  uint64_t lo = color * sets_per_color_, hi = (color + 1) * sets_per_color_;
  if (!on)  // validate up front so a refused request leaves no partial state
    for (uint64_t s = lo; s < hi; ++s)
      for (uint32_t w = 0; w < assoc_; ++w)
        CS_CHECK(!row(s)[w].valid, "powering off a color that still holds valid lines");
  uint64_t toggled = 0;
  for (uint64_t s = lo; s < hi; ++s) {
    CacheLine* r = row(s);
    for (uint32_t w = 0; w < assoc_; ++w) {
      if (r[w].powered != on) {
        r[w].powered = on;
        powered_lines_ += on ? 1 : uint64_t(-1);
        ++toggled;
      }
    }
  }
  color_on_[color] = on ? 1 : 0;
  return toggled;
}

bool TagStore::color_powered(uint32_t color) const {
  CS_CHECK(colors_ && color < colors_, "color_powered: bad color");
  return color_on_[color] != 0;
}

uint64_t TagStore::set_active_rect(uint64_t active_sets, uint32_t active_ways) {
  CS_CHECK(active_sets >= 1 && active_sets <= sets_, "bad active set count");
  CS_CHECK(active_ways >= 1 && active_ways <= assoc_, "bad active way count");
  for (uint64_t s = 0; s < sets_; ++s)  // validate before any mutation
    for (uint32_t w = 0; w < assoc_; ++w)
      if (!(s < active_sets && w < active_ways))
        CS_CHECK(!row(s)[w].valid, "powering off a region that still holds valid lines");
  uint64_t toggled = 0;
  for (uint64_t s = 0; s < sets_; ++s) {
    CacheLine* r = row(s);
    for (uint32_t w = 0; w < assoc_; ++w) {
      bool on = s < active_sets && w < active_ways;
      if (r[w].powered != on) {
        r[w].powered = on;
        powered_lines_ += on ? 1 : uint64_t(-1);
        ++toggled;
      }
    }
  }
  active_sets_ = active_sets;
  active_ways_ = active_ways;
  return toggled;
}

bool TagStore::decay_line(uint64_t set, uint32_t way) {
  CacheLine& l = lines_[set * assoc_ + way];
  CS_CHECK(l.valid && l.powered, "decaying an invalid or already-off line");
  bool was_dirty = l.dirty;
  l.valid = false;
  l.dirty = false;
  l.mru = false;
  l.powered = false;
  --powered_lines_;
  return was_dirty;
}

bool TagStore::power_safe() const {
  for (const CacheLine& l : lines_)
    if (l.valid && !l.powered) return false;
  return true;
}

}  // namespace cachesim
