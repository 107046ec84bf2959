#include "cachesim/profiler.hh"

#include <algorithm>

#include "cachesim/errors.hh"

namespace cachesim {

namespace {

ProfilePoints make_points(PointKind kind, std::vector<uint64_t> vals) {
  for (size_t i = 0; i < vals.size(); ++i) {
    if (vals[i] < 1) throw ConfigError("profiling point below one");
    if (i && vals[i] <= vals[i - 1])
      throw ConfigError("profiling points must be strictly increasing");
  }
  return ProfilePoints{kind, std::move(vals)};
}

void require_multiple(uint64_t v, uint64_t div, const char* what) {
  if (v % div != 0)
    throw ConfigError(std::string(what) + " requires a size divisible by " + std::to_string(div));
}

}  // namespace

ProfilePoints master_points(uint32_t M) {
  require_multiple(M, 64, "7-point ladder");
  std::vector<uint64_t> v;
  for (uint64_t j = 0; j < 7; ++j) v.push_back((uint64_t(M) << j) / 64);
  return make_points(PointKind::Colors, std::move(v));
}

ProfilePoints palette_points(uint32_t M) {
  require_multiple(M, 16, "16th-step ladder");
  std::vector<uint64_t> v;
  for (uint64_t k : {1, 2, 4, 8, 12, 16}) v.push_back(k * uint64_t(M) / 16);
  return make_points(PointKind::Colors, std::move(v));
}

ProfilePoints manager_points(uint32_t M) {
  require_multiple(M, 32, "6-point ladder");
  std::vector<uint64_t> v;
  for (uint64_t j = 0; j < 6; ++j) v.push_back((uint64_t(M) << j) / 32);
  return make_points(PointKind::Colors, std::move(v));
}

ProfilePoints esto_points(uint64_t sets) {
  require_multiple(sets, 16, "set-count ladder");
  return make_points(PointKind::Sets,
                     {sets / 16, sets / 8, sets / 4, sets / 2, sets, 2 * sets});
}

ProfilePoints encache_points(uint64_t sets) {
  require_multiple(sets, 8, "set-state ladder");
  return make_points(PointKind::Sets, {sets / 8, sets / 4, sets / 2, sets});
}

bool sample_filter(uint64_t block_address, uint64_t sampling) {
  CS_CHECK(sampling >= 1 && is_pow2(sampling), "sampling ratio must be a power of two");
  return (block_address & (sampling - 1)) == 0;
}

namespace {

double interp(const std::vector<uint64_t>& xs, const std::vector<double>& ys, double x,
              bool* clamped) {
  CS_CHECK(xs.size() >= 1 && xs.size() == ys.size(), "malformed curve");
  if (clamped) *clamped = false;
  if (x <= double(xs.front())) {
    if (clamped && x < double(xs.front())) *clamped = true;
    return ys.front();
  }
  if (x >= double(xs.back())) {
    if (clamped && x > double(xs.back())) *clamped = true;
    return ys.back();
  }
  size_t j = 1;
  while (double(xs[j]) < x) ++j;
  double x0 = double(xs[j - 1]), x1 = double(xs[j]);
  double t = (x - x0) / (x1 - x0);
  return ys[j - 1] + t * (ys[j] - ys[j - 1]);
}

}  // namespace

double interpolate_misses(const MissCurve& c, double x, bool* clamped) {
  return interp(c.points, c.misses, x, clamped);
}

double interpolate_load_misses(const MissCurve& c, double x, bool* clamped) {
  return interp(c.points, c.load_misses, x, clamped);
}

double mcu(const MissCurve& c, double x) {
  CS_CHECK(c.points.size() >= 2 && c.points.size() == c.misses.size(), "malformed curve");
  size_t n = c.points.size();
  size_t j = n - 2;  // default: final segment (top point and above)
  for (size_t i = 0; i + 1 < n; ++i)
    if (x < double(c.points[i + 1])) {
      j = i;
      break;
    }
  double dx = double(c.points[j + 1]) - double(c.points[j]);
  return (c.misses[j] - c.misses[j + 1]) / dx;
}

Rce::Rce(uint32_t cores, ProfilePoints pts, uint64_t sets_per_color, uint32_t assoc,
         uint64_t sampling)
    : cores_(cores), pts_(std::move(pts)), sampling_(sampling) {
  CS_CHECK(cores_ >= 1, "at least one core");
  CS_CHECK(sampling_ >= 1 && is_pow2(sampling_), "sampling ratio must be a power of two");
  CS_CHECK(!pts_.values.empty(), "empty profiling point set");
  for (uint64_t v : pts_.values) {
    uint64_t ps = pts_.kind == PointKind::Colors ? v * sets_per_color : v;
    CS_CHECK(ps >= 1, "profiling point below one set");
    CS_CHECK(ps % sampling_ == 0 || sampling_ % ps == 0,
             "point set count and sampling ratio must divide one another");
    point_sets_.push_back(ps);
  }
  stores_.resize(cores_);
  ctr_.resize(cores_);
  filtered_.assign(cores_, 0);
  for (uint32_t c = 0; c < cores_; ++c) {
    ctr_[c].resize(point_sets_.size());
    for (uint64_t ps : point_sets_)
      stores_[c].emplace_back((ps + sampling_ - 1) / sampling_, assoc, ReplPolicy::LRU);
  }
}

uint64_t Rce::point_sets(size_t point) const {
  CS_CHECK(point < point_sets_.size(), "unknown profiling point");
  return point_sets_[point];
}

uint64_t Rce::rows(size_t point) const {
  return (point_sets(point) + sampling_ - 1) / sampling_;
}

void Rce::observe(uint32_t core, uint64_t block_address, AccessKind kind) {
  CS_CHECK(core < cores_, "core id out of range");
  if (!sample_filter(block_address, sampling_)) return;
  ++filtered_[core];
  for (size_t p = 0; p < point_sets_.size(); ++p) {
    uint64_t set = block_address % point_sets_[p];
    if (set % sampling_ != 0) continue;  // only when point_sets < sampling
    auto out = stores_[core][p].access(core, set / sampling_, block_address, kind);
    if (out.hit) {
      ++ctr_[core][p].hits;
    } else {
      ++ctr_[core][p].misses;
      if (kind == AccessKind::Load) ++ctr_[core][p].load_misses;
    }
  }
}

uint64_t Rce::sampled_accesses(uint32_t core) const {
  CS_CHECK(core < cores_, "core id out of range");
  return filtered_[core];
}

uint64_t Rce::raw_misses(uint32_t core, size_t point) const {
  CS_CHECK(core < cores_ && point < point_sets_.size(), "unknown core or point");
  return ctr_[core][point].misses;
}

uint64_t Rce::raw_hits(uint32_t core, size_t point) const {
  CS_CHECK(core < cores_ && point < point_sets_.size(), "unknown core or point");
  return ctr_[core][point].hits;
}

std::pair<uint64_t, uint64_t> Rce::miss_estimate(uint32_t core, size_t point) const {
  CS_CHECK(core < cores_ && point < point_sets_.size(), "unknown core or point");
  const Counters& c = ctr_[core][point];
  return {c.misses * sampling_, c.load_misses * sampling_};
}

MissCurve Rce::curve(uint32_t core) const {
  CS_CHECK(core < cores_, "core id out of range");
  MissCurve mc;
  mc.points = pts_.values;
  for (size_t p = 0; p < point_sets_.size(); ++p) {
    auto [m, lm] = miss_estimate(core, p);
    mc.misses.push_back(double(m));
    mc.load_misses.push_back(double(lm));
  }
  return mc;
}

void Rce::reset_interval() {
  for (auto& per_core : ctr_)
    for (auto& c : per_core) c = Counters{};
  std::fill(filtered_.begin(), filtered_.end(), 0);
}

WayRce::WayRce(ProfilePoints set_states, uint32_t assoc, uint64_t sampling, ReplPolicy policy)
    : pts_(std::move(set_states)), assoc_(assoc), sampling_(sampling) {
  if (policy != ReplPolicy::LRU)
    throw ConfigError("way counters require LRU (stack inclusion does not hold otherwise)");
  CS_CHECK(pts_.kind == PointKind::Sets, "way counters take set-state points");
  CS_CHECK(assoc_ >= 1, "at least one way");
  CS_CHECK(sampling_ >= 1 && is_pow2(sampling_), "sampling ratio must be a power of two");
  CS_CHECK(!pts_.values.empty(), "empty set-state ladder");
  for (uint64_t s : pts_.values) {
    CS_CHECK(s % sampling_ == 0 || sampling_ % s == 0,
             "set-state and sampling ratio must divide one another");
    PointState ps;
    ps.sets = s;
    ps.rows.resize((s + sampling_ - 1) / sampling_);
    ps.hist.assign(assoc_ + 1, 0);
    ps.hist_load.assign(assoc_ + 1, 0);
    pstate_.push_back(std::move(ps));
  }
}

uint64_t WayRce::rows(size_t point) const {
  CS_CHECK(point < pstate_.size(), "unknown set-state");
  return pstate_[point].rows.size();
}

void WayRce::observe(uint64_t block_address, AccessKind kind) {
  if (!sample_filter(block_address, sampling_)) return;
  ++filtered_;
  for (PointState& ps : pstate_) {
    uint64_t set = block_address % ps.sets;
    if (set % sampling_ != 0) continue;
    Row& row = ps.rows[set / sampling_];
    ++ps.probes;
    if (kind == AccessKind::Load) ++ps.load_probes;
    auto it = std::find(row.stack.begin(), row.stack.end(), block_address);
    if (it != row.stack.end()) {
      uint32_t depth = uint32_t(it - row.stack.begin()) + 1;  // 1 = MRU
      ++ps.hist[depth];
      if (kind == AccessKind::Load) ++ps.hist_load[depth];
      row.stack.erase(it);
      row.stack.insert(row.stack.begin(), block_address);
    } else {
      ++ps.misses;
      row.stack.insert(row.stack.begin(), block_address);
      if (row.stack.size() > assoc_) row.stack.pop_back();
    }
  }
}

uint64_t WayRce::sampled_probes(size_t point) const {
  CS_CHECK(point < pstate_.size(), "unknown set-state");
  return pstate_[point].probes;
}

uint64_t WayRce::sampled_load_probes(size_t point) const {
  CS_CHECK(point < pstate_.size(), "unknown set-state");
  return pstate_[point].load_probes;
}

uint64_t WayRce::way_profile(size_t point, uint32_t ways) const {
  CS_CHECK(point < pstate_.size(), "unknown set-state");
  CS_CHECK(ways >= 1 && ways <= assoc_, "way count out of range");
  const PointState& ps = pstate_[point];
  uint64_t h = 0;
  for (uint32_t d = 1; d <= ways; ++d) h += ps.hist[d];
  return h;
}

uint64_t WayRce::way_profile_loads(size_t point, uint32_t ways) const {
  CS_CHECK(point < pstate_.size(), "unknown set-state");
  CS_CHECK(ways >= 1 && ways <= assoc_, "way count out of range");
  const PointState& ps = pstate_[point];
  uint64_t h = 0;
  for (uint32_t d = 1; d <= ways; ++d) h += ps.hist_load[d];
  return h;
}

std::pair<uint64_t, uint64_t> WayRce::miss_estimate(size_t point, uint32_t ways) const {
  CS_CHECK(point < pstate_.size(), "unknown set-state");
  const PointState& ps = pstate_[point];
  uint64_t m = (ps.probes - way_profile(point, ways)) * sampling_;
  uint64_t lm = (ps.load_probes - way_profile_loads(point, ways)) * sampling_;
  return {m, lm};
}

void WayRce::reset_interval() {
  filtered_ = 0;
  for (PointState& ps : pstate_) {
    std::fill(ps.hist.begin(), ps.hist.end(), 0);
    std::fill(ps.hist_load.begin(), ps.hist_load.end(), 0);
    ps.probes = ps.load_probes = ps.misses = 0;
  }
}

RceSize rce_size(const CacheGeometry& g, uint32_t cores, uint64_t sampling,
                 const ProfilePoints& pts, uint32_t tag_bits) {
  CS_CHECK(sampling >= 1 && is_pow2(sampling), "sampling ratio must be a power of two");
  uint64_t per_core = 0;
  for (uint64_t v : pts.values) {
    uint64_t ps = pts.kind == PointKind::Colors ? v * g.blocks_per_page() : v;
    per_core += (ps + sampling - 1) / sampling;
  }
  RceSize r;
  r.total_sets = per_core * cores;
  double line_bits = double(g.block_bits() + tag_bits);
  r.fraction_of_l2_pct =
      100.0 * double(r.total_sets) * double(tag_bits) / (double(g.sets) * line_bits);
  return r;
}

}  // namespace cachesim
