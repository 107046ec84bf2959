#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "cachesim/cache.hh"
#include "cachesim/geometry.hh"

namespace cachesim {

enum class PointKind { Colors, Sets };

// Ordered list of emulated cache sizes, expressed either as color counts
// (multiplied by sets-per-color to get set counts) or as raw set counts.
struct ProfilePoints {
  PointKind kind = PointKind::Colors;
  std::vector<uint64_t> values;  // strictly increasing, every point >= 1
};

// Standard point ladders. M is the total color count; sets is the real cache's
// set count. Each builder validates divisibility and the >=1-per-point rule.
ProfilePoints master_points(uint32_t M);    // {M/64, M/32, ..., M}      (7)
ProfilePoints palette_points(uint32_t M);   // {1,2,4,8,12,16} x M/16    (6)
ProfilePoints manager_points(uint32_t M);   // {M/32, M/16, ..., M}      (6)
ProfilePoints esto_points(uint64_t sets);   // {X/16, ..., X, 2X}        (6)
ProfilePoints encache_points(uint64_t sets);  // set-states {Q/8..Q}     (4)

// True iff the low log2(sampling) index bits of the block address are zero;
// exactly 1/sampling of uniformly distributed addresses pass. sampling must be
// a power of two (1 disables sampling).
bool sample_filter(uint64_t block_address, uint64_t sampling);

// Interval miss curve for one core: x = point value (colors or sets),
// y = miss counts already scaled to full-trace estimates.
struct MissCurve {
  std::vector<uint64_t> points;
  std::vector<double> misses;
  std::vector<double> load_misses;
};

// Piecewise-linear evaluation, exact at the knots. Out-of-range x clamps to
// the nearest endpoint and reports it via *clamped (never extrapolates).
double interpolate_misses(const MissCurve& c, double x, bool* clamped = nullptr);
double interpolate_load_misses(const MissCurve& c, double x, bool* clamped = nullptr);

// Marginal gain: misses removed per extra color (or set) at x, i.e. the slope
// (Miss(C_j) - Miss(C_{j+1})) / (C_{j+1} - C_j) of the segment to the right of
// x; at or above the top point, the final segment's slope.
double mcu(const MissCurve& c, double x);

// Sampled multi-size tag emulator. Per core, one small tag store per profiling
// point; fed only addresses that pass the sampling filter. Each point emulates
// a cache of point_sets sets with traditional modulo indexing, restricted to
// the sets whose index is a multiple of the sampling ratio.
class Rce {
 public:
  Rce(uint32_t cores, ProfilePoints pts, uint64_t sets_per_color, uint32_t assoc,
      uint64_t sampling);

  void observe(uint32_t core, uint64_t block_address, AccessKind kind);

  // Interval-scoped counters.
  uint64_t sampled_accesses(uint32_t core) const;  // passed the filter
  uint64_t raw_misses(uint32_t core, size_t point) const;
  uint64_t raw_hits(uint32_t core, size_t point) const;
  // (misses, load_misses) scaled by the sampling ratio.
  std::pair<uint64_t, uint64_t> miss_estimate(uint32_t core, size_t point) const;
  MissCurve curve(uint32_t core) const;
  void reset_interval();  // zeroes counters; sampled tag contents stay warm

  const ProfilePoints& points() const { return pts_; }
  size_t num_points() const { return pts_.values.size(); }
  uint64_t sampling() const { return sampling_; }
  uint64_t point_sets(size_t point) const;  // emulated set count of a point
  uint64_t rows(size_t point) const;        // sampled rows actually stored
  uint32_t cores() const { return cores_; }

 private:
  struct Counters {
    uint64_t misses = 0;
    uint64_t load_misses = 0;
    uint64_t hits = 0;
  };

  uint32_t cores_;
  ProfilePoints pts_;
  std::vector<uint64_t> point_sets_;
  uint64_t sampling_;
  std::vector<std::vector<TagStore>> stores_;  // [core][point]
  std::vector<std::vector<Counters>> ctr_;     // [core][point]
  std::vector<uint64_t> filtered_;             // [core]
};

// Mattson way counters over a ladder of set-states (LRU only): per state, a
// sampled store of true LRU stacks records the hit-position histogram, so one
// pass yields hit counts for every way count at once.
class WayRce {
 public:
  WayRce(ProfilePoints set_states, uint32_t assoc, uint64_t sampling,
         ReplPolicy policy = ReplPolicy::LRU);

  void observe(uint64_t block_address, AccessKind kind);

  uint64_t sampled_accesses() const { return filtered_; }      // passed filter
  uint64_t sampled_probes(size_t point) const;                 // per point
  uint64_t sampled_load_probes(size_t point) const;
  // Cumulative hits with `ways` ways: sum of histogram positions 1..ways.
  uint64_t way_profile(size_t point, uint32_t ways) const;
  uint64_t way_profile_loads(size_t point, uint32_t ways) const;
  // (misses, load_misses) at (set-state, ways), scaled by the sampling ratio.
  std::pair<uint64_t, uint64_t> miss_estimate(size_t point, uint32_t ways) const;
  void reset_interval();

  const ProfilePoints& points() const { return pts_; }
  size_t num_points() const { return pts_.values.size(); }
  uint32_t assoc() const { return assoc_; }
  uint64_t sampling() const { return sampling_; }
  uint64_t rows(size_t point) const;

 private:
  struct Row {
    std::vector<uint64_t> stack;  // MRU first
  };
  struct PointState {
    uint64_t sets = 0;
    std::vector<Row> rows;
    std::vector<uint64_t> hist;       // [1..assoc], index 0 unused
    std::vector<uint64_t> hist_load;  // same, loads only
    uint64_t probes = 0;
    uint64_t load_probes = 0;
    uint64_t misses = 0;
  };

  ProfilePoints pts_;
  uint32_t assoc_;
  uint64_t sampling_;
  uint64_t filtered_ = 0;
  std::vector<PointState> pstate_;
};

// Auxiliary-structure cost of a point ladder: total sampled sets across all
// cores, and tag-array storage as a percentage of the main cache's storage
// (tag_bits tag vs block_bits data per line).
struct RceSize {
  uint64_t total_sets = 0;
  double fraction_of_l2_pct = 0.0;
};
RceSize rce_size(const CacheGeometry& g, uint32_t cores, uint64_t sampling,
                 const ProfilePoints& pts, uint32_t tag_bits);

}  // namespace cachesim
