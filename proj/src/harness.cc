#include "cachesim/harness.hh"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <optional>
#include <sstream>

#include "cachesim/errors.hh"
#include "cachesim/profiler.hh"

namespace cachesim {

std::string policy_name(PolicyKind k) {
  switch (k) {
    case PolicyKind::None: return "none";
    case PolicyKind::Master: return "master";
    case PolicyKind::Palette: return "palette";
    case PolicyKind::Encache: return "encache";
    case PolicyKind::CashierMsm: return "cashier-msm";
    case PolicyKind::CashierPsm: return "cashier-psm";
    case PolicyKind::Manager: return "manager";
    case PolicyKind::Dct: return "dct";
    case PolicyKind::Wac: return "wac";
  }
  throw ConfigError("unknown policy kind");
}

PolicyKind policy_from_name(const std::string& name) {
  static const std::pair<const char*, PolicyKind> table[] = {
      {"none", PolicyKind::None},           {"master", PolicyKind::Master},
      {"palette", PolicyKind::Palette},     {"encache", PolicyKind::Encache},
      {"cashier-msm", PolicyKind::CashierMsm},
      {"cashier-psm", PolicyKind::CashierPsm},
      {"manager", PolicyKind::Manager},     {"dct", PolicyKind::Dct},
      {"wac", PolicyKind::Wac}};
  for (auto& [n, k] : table)
    if (name == n) return k;
  throw ConfigError("unknown policy name: " + name);
}

namespace {

bool is_coloring(PolicyKind k) {
  switch (k) {
    case PolicyKind::None:
    case PolicyKind::Master:
    case PolicyKind::Palette:
    case PolicyKind::CashierMsm:
    case PolicyKind::CashierPsm:
    case PolicyKind::Manager:
      return true;
    default:
      return false;
  }
}

bool has_shared_curve(PolicyKind k) {
  return k == PolicyKind::Palette || k == PolicyKind::CashierMsm ||
         k == PolicyKind::CashierPsm;
}

// Per-core execution clock. The current interval's work is kept as raw
// counters and folded into `committed` only at interval boundaries, so the
// final clock is reproducible by replaying the per-interval records with the
// same two additions per interval.
struct CoreClock {
  CoreTiming t;
  double committed = 0;
  uint64_t instructions = 0;
  uint64_t accesses = 0;
  uint64_t hits = 0;
  uint64_t misses = 0;
  uint64_t load_misses = 0;
  uint64_t writebacks = 0;
  double mid_overhead = 0;  // charges landed mid-interval (way checks)
  uint64_t instr_total = 0;

  double compute_pending() const {
    return static_cast<double>(instructions) * t.base_cpi +
           static_cast<double>(load_misses) * t.miss_penalty * t.overlap;
  }
  double now() const { return committed + compute_pending() + mid_overhead; }
};

// Time-weighted powered-line accumulator: advance() must be called with the
// pre-change line count before every power mutation, and once at the boundary.
struct PowerIntegral {
  double mark = 0;
  double weighted = 0;
  void advance(double wall, uint64_t powered_lines) {
    if (wall > mark) {
      weighted += static_cast<double>(powered_lines) * (wall - mark);
      mark = wall;
    }
  }
};

class Runner {
 public:
  Runner(const ScenarioConfig& cfg, const std::string& trace_path)
      : cfg_(cfg), reader_(trace_path) {}

  RunReport go();

 private:
  void setup();
  void on_event(const TraceEvent& ev);
  double wall_now() const;
  uint64_t total_instructions() const;
  void charge_all(uint64_t cycles);
  void check_boundary();
  void way_window_check();
  void close_interval(bool final_partial);
  IntervalObservation make_observation(double wall_pre) const;
  WayObs make_way_observation(double wall_pre) const;
  // Applies `d`, returning a human-readable action. Accumulates flush
  // writebacks and power transitions into the interval counters.
  std::string apply_decision(const Decision& d, double wall_pre, bool* changed);

  ScenarioConfig cfg_;
  TraceReader reader_;
  TraceHeader header_;
  CacheGeometry g_;
  uint32_t M_ = 0;
  EnergyMode mode_ = EnergyMode::Technique;
  bool coloring_ = true;

  std::unique_ptr<TagStore> store_;
  Allocation alloc_;
  std::vector<ColorMap> maps_;
  std::unique_ptr<Rce> rce_;
  std::unique_ptr<WayRce> wrce_;
  std::unique_ptr<DctState> dct_;
  double decay_cycles_ = 0;

  std::vector<CoreClock> clocks_;
  PowerIntegral integral_;
  double wall_start_ = 0;
  uint64_t interval_index_ = 0;
  uint64_t events_in_interval_ = 0;
  uint64_t events_total_ = 0;

  // interval-scoped extras
  double way_weight_ = 0;          // sum of (hit?1:2) * active_ways per access
  uint64_t transitions_ = 0;       // line power toggles (wakes + decisions)
  uint64_t flush_writebacks_ = 0;  // dirty lines written back by flushes
  std::string mid_actions_;        // way changes taken inside the interval

  // boundary scheduling
  double next_cycle_boundary_ = 0;
  uint64_t next_instr_boundary_ = 0;
  bool armed_ = false;
  double poll_boundary_ = 0;
  uint64_t target_threshold_ = 0;

  // policy state
  CashierState cashier_state_;
  ManagerState manager_state_;
  std::vector<uint64_t> rank_hits_;
  uint64_t window_hits_ = 0;

  std::vector<IntervalRecord> records_;
};

double Runner::wall_now() const {
  double w = 0;
  for (const auto& c : clocks_) w = std::max(w, c.now());
  return w;
}

uint64_t Runner::total_instructions() const {
  uint64_t t = 0;
  for (const auto& c : clocks_) t += c.instr_total;
  return t;
}

void Runner::charge_all(uint64_t cycles) {
  for (auto& c : clocks_) c.mid_overhead += static_cast<double>(cycles);
}

void Runner::setup() {
  header_ = reader_.header();
  if (header_.page_bytes != g_.page_bytes)
    throw ConfigError("trace page size does not match the cache geometry");
  if (header_.address_bits != g_.address_bits)
    throw ConfigError("trace address width does not match the cache geometry");

  clocks_.resize(header_.cores);
  for (uint32_t i = 0; i < header_.cores; ++i) clocks_[i].t = header_.core[i];

  mode_ = cfg_.policy == PolicyKind::None ? EnergyMode::Baseline : EnergyMode::Technique;
  coloring_ = is_coloring(cfg_.policy);

  if (cfg_.policy == PolicyKind::Manager &&
      *cfg_.manager.target >= header_.cores)
    throw ConfigError("manager target core out of range for this trace");
  if (cfg_.interval.mode == IntervalSpec::Mode::TargetInstructions &&
      *cfg_.manager.target >= header_.cores)
    throw ConfigError("target core out of range for this trace");

  if (coloring_) {
    store_ = std::make_unique<TagStore>(g_.sets, g_.assoc, cfg_.repl, M_);
    switch (cfg_.policy) {
      case PolicyKind::None:
        alloc_ = cfg_.baseline == BaselineKind::StaticEqual
                     ? equal_partition_allocation(header_.cores, M_)
                     : shared_full_allocation(M_);
        break;
      case PolicyKind::Master:
      case PolicyKind::Manager:
        alloc_ = equal_partition_allocation(header_.cores, M_);
        break;
      default:  // palette, cashier
        alloc_ = shared_full_allocation(M_);
        break;
    }
    maps_ = initial_maps(alloc_, M_);
    if (cfg_.policy == PolicyKind::Master)
      rce_ = std::make_unique<Rce>(header_.cores, master_points(M_), g_.blocks_per_page(),
                                   g_.assoc, cfg_.sampling);
    else if (cfg_.policy == PolicyKind::Manager)
      rce_ = std::make_unique<Rce>(header_.cores, manager_points(M_), g_.blocks_per_page(),
                                   g_.assoc, cfg_.sampling);
    else if (has_shared_curve(cfg_.policy))
      rce_ = std::make_unique<Rce>(1, palette_points(M_), g_.blocks_per_page(), g_.assoc,
                                   cfg_.sampling);
  } else {
    store_ = std::make_unique<TagStore>(g_.sets, g_.assoc, cfg_.repl, 0);
    if (cfg_.policy == PolicyKind::Encache) {
      wrce_ = std::make_unique<WayRce>(encache_points(g_.sets), g_.assoc, cfg_.sampling,
                                       cfg_.repl);
    } else if (cfg_.policy == PolicyKind::Dct) {
      store_->set_per_line_power_mode(true);
      dct_ = std::make_unique<DctState>(g_.sets, g_.assoc);
      decay_cycles_ = cfg_.decay_cycles > 0 ? cfg_.decay_cycles
                                            : decay_interval_cycles(cfg_.params, g_);
    } else {  // wac
      rank_hits_.assign(g_.assoc, 0);
    }
  }

  switch (cfg_.interval.mode) {
    case IntervalSpec::Mode::Cycles:
      next_cycle_boundary_ = static_cast<double>(cfg_.interval.count);
      break;
    case IntervalSpec::Mode::Instructions:
      next_instr_boundary_ = cfg_.interval.count;
      break;
    case IntervalSpec::Mode::TargetInstructions:
      target_threshold_ = cfg_.interval.count;
      break;
  }
}

void Runner::on_event(const TraceEvent& ev) {
  CS_CHECK(ev.core < clocks_.size(), "trace event core out of range");
  CoreClock& c = clocks_[ev.core];
  c.instructions += ev.instr_delta;
  c.instr_total += ev.instr_delta;
  events_in_interval_++;
  events_total_++;

  uint64_t set;
  if (coloring_) {
    const ColorMap& map = maps_[alloc_.shared ? 0 : ev.core];
    set = locate(ev.block_address, map, g_, M_).global_set;
  } else if (cfg_.policy == PolicyKind::Encache) {
    set = ev.block_address % store_->active_sets();
  } else {
    set = ev.block_address % store_->sets();
  }

  if (dct_) integral_.advance(wall_now(), store_->powered_lines());
  AccessOutcome out = store_->access(ev.core, set, ev.block_address, ev.kind);

  c.accesses++;
  if (out.hit) {
    c.hits++;
  } else {
    c.misses++;
    if (out.is_load) c.load_misses++;
    if (out.evicted_dirty) c.writebacks++;
  }
  way_weight_ += (out.hit ? 1.0 : 2.0) * static_cast<double>(store_->active_ways());
  if (out.woke_line) transitions_++;

  if (rce_)
    rce_->observe(has_shared_curve(cfg_.policy) ? 0 : ev.core, ev.block_address, ev.kind);
  else if (wrce_)
    wrce_->observe(ev.block_address, ev.kind);

  if (dct_) dct_->observe(set, out.way, wall_now());

  if (cfg_.policy == PolicyKind::Wac && out.hit) {
    rank_hits_[out.hit_rank - 1]++;
    if (++window_hits_ >= cfg_.wac.k_hits) way_window_check();
  }

  check_boundary();
}

void Runner::way_window_check() {
  charge_all(cfg_.overheads.algo_way);
  WacWindow w;
  w.hits_by_rank.assign(rank_hits_.begin(), rank_hits_.begin() + store_->active_ways());
  Decision d = wac_tick(w, store_->active_ways(), g_.assoc, cfg_.wac);
  if (d.kind == Decision::Kind::WaySetting && d.active_ways != store_->active_ways()) {
    integral_.advance(wall_now(), store_->powered_lines());
    if (d.active_ways < store_->active_ways()) {
      auto [clean, dirty] =
          store_->flush_range(0, store_->sets(), d.active_ways, store_->active_ways(),
                              FlushFilter{});
      (void)clean;
      flush_writebacks_ += dirty;
    }
    transitions_ += store_->set_active_rect(store_->sets(), d.active_ways);
    charge_all(cfg_.overheads.reconfig);
    if (!mid_actions_.empty()) mid_actions_ += '+';
    mid_actions_ += "ways=" + std::to_string(d.active_ways);
  }
  std::fill(rank_hits_.begin(), rank_hits_.end(), 0);
  window_hits_ = 0;
}

void Runner::check_boundary() {
  switch (cfg_.interval.mode) {
    case IntervalSpec::Mode::Cycles:
      if (wall_now() >= next_cycle_boundary_) close_interval(false);
      break;
    case IntervalSpec::Mode::Instructions:
      if (total_instructions() >= next_instr_boundary_) close_interval(false);
      break;
    case IntervalSpec::Mode::TargetInstructions: {
      uint32_t t = *cfg_.manager.target;
      if (!armed_ && clocks_[t].instr_total >= target_threshold_) {
        armed_ = true;
        double poll = static_cast<double>(cfg_.interval.poll_cycles);
        poll_boundary_ = (std::floor(wall_now() / poll) + 1.0) * poll;
      }
      if (armed_ && wall_now() >= poll_boundary_) close_interval(false);
      break;
    }
  }
}

IntervalObservation Runner::make_observation(double wall_pre) const {
  IntervalObservation obs;
  obs.M = M_;
  obs.assoc = g_.assoc;
  obs.params = cfg_.params;
  obs.shared = alloc_.shared;
  if (alloc_.shared) {
    obs.colors = {static_cast<uint32_t>(M_ - alloc_.off_colors.size())};
  } else {
    for (const auto& cc : alloc_.core_colors)
      obs.colors.push_back(static_cast<uint32_t>(cc.size()));
  }
  uint64_t wb_total = flush_writebacks_;
  for (const auto& c : clocks_) wb_total += c.writebacks;
  obs.writebacks_total = wb_total;
  if (rce_)
    for (uint32_t i = 0; i < (alloc_.shared ? 1u : header_.cores); ++i)
      obs.rce_accesses += rce_->sampled_accesses(i);

  if (alloc_.shared) {
    CoreObs co;
    co.curve = rce_->curve(0);
    double base = 0;
    uint64_t lm = 0;
    for (const auto& c : clocks_) {
      base = std::max(base, static_cast<double>(c.instructions) * c.t.base_cpi);
      lm += c.load_misses;
      co.accesses += c.accesses;
      co.hits += c.hits;
      co.misses += c.misses;
      co.load_misses += c.load_misses;
      co.writebacks += c.writebacks;
    }
    co.base_cycles = base;
    co.measured_cycles = wall_pre - wall_start_;
    co.spm_value = spm(std::max(0.0, co.measured_cycles - base), lm);
    obs.core.push_back(std::move(co));
  } else {
    for (uint32_t i = 0; i < header_.cores; ++i) {
      const CoreClock& c = clocks_[i];
      CoreObs co;
      co.curve = rce_->curve(i);
      co.base_cycles = static_cast<double>(c.instructions) * c.t.base_cpi;
      co.measured_cycles = c.compute_pending();
      co.spm_value = spm(co.measured_cycles - co.base_cycles, c.load_misses);
      co.accesses = c.accesses;
      co.hits = c.hits;
      co.misses = c.misses;
      co.load_misses = c.load_misses;
      co.writebacks = c.writebacks;
      obs.core.push_back(std::move(co));
    }
  }
  return obs;
}

WayObs Runner::make_way_observation(double wall_pre) const {
  WayObs wo;
  wo.set_states = wrce_->points().values;
  wo.assoc = g_.assoc;
  wo.params = cfg_.params;
  wo.rce_accesses = wrce_->sampled_accesses();
  size_t states = wo.set_states.size();
  wo.misses.assign(states, std::vector<double>(g_.assoc, 0));
  wo.load_misses.assign(states, std::vector<double>(g_.assoc, 0));
  for (size_t s = 0; s < states; ++s)
    for (uint32_t w = 1; w <= g_.assoc; ++w) {
      auto [m, lm] = wrce_->miss_estimate(s, w);
      wo.misses[s][w - 1] = static_cast<double>(m);
      wo.load_misses[s][w - 1] = static_cast<double>(lm);
    }
  double base = 0;
  uint64_t lm_total = 0;
  for (const auto& c : clocks_) {
    base = std::max(base, static_cast<double>(c.instructions) * c.t.base_cpi);
    lm_total += c.load_misses;
    wo.accesses += c.accesses;
    wo.writebacks += c.writebacks;
  }
  wo.base_cycles = base;
  wo.measured_cycles = wall_pre - wall_start_;
  wo.spm_value = spm(std::max(0.0, wo.measured_cycles - base), lm_total);
  return wo;
}

std::string Runner::apply_decision(const Decision& d, double wall_pre, bool* changed) {
  *changed = false;
  switch (d.kind) {
    case Decision::Kind::NoChange:
      return "keep";
    case Decision::Kind::NewAllocation: {
      Allocation next = realize_counts(alloc_, d.color_counts, M_);
      ReconfigPlan plan = plan_reallocation(alloc_, maps_, next, M_);
      if (plan.empty()) return "keep";
      integral_.advance(wall_pre, store_->powered_lines());
      for (const RegionMove& mv : plan.moves) {
        auto [clean, dirty] = store_->flush_color(
            mv.from_color,
            plan.new_alloc.shared ? std::optional<uint32_t>{} : std::optional<uint32_t>{mv.table},
            mv.region, &g_);
        (void)clean;
        flush_writebacks_ += dirty;
      }
      for (uint32_t c : plan.power_off) transitions_ += store_->set_color_power(c, false);
      for (uint32_t c : plan.power_on) transitions_ += store_->set_color_power(c, true);
      maps_ = plan.new_maps;
      alloc_ = plan.new_alloc;
      *changed = true;
      std::ostringstream os;
      os << "colors ";
      for (size_t i = 0; i < d.color_counts.size(); ++i)
        os << (i ? "/" : "") << d.color_counts[i];
      return os.str();
    }
    case Decision::Kind::NewConfig: {
      uint64_t s = d.active_sets;
      uint32_t w = d.active_ways;
      if (s == store_->active_sets() && w == store_->active_ways()) return "keep";
      integral_.advance(wall_pre, store_->powered_lines());
      if (s != store_->active_sets()) {
        auto [clean, dirty] = store_->flush_all();
        (void)clean;
        flush_writebacks_ += dirty;
      } else if (w < store_->active_ways()) {
        auto [clean, dirty] =
            store_->flush_range(0, store_->active_sets(), w, store_->active_ways(),
                                FlushFilter{});
        (void)clean;
        flush_writebacks_ += dirty;
      }
      transitions_ += store_->set_active_rect(s, w);
      *changed = true;
      std::ostringstream os;
      os << "rect " << s << "x" << w;
      return os.str();
    }
    case Decision::Kind::BlockTurnoff: {
      if (d.lines.empty()) return "keep";
      integral_.advance(wall_pre, store_->powered_lines());
      for (auto [s, w] : d.lines) {
        if (store_->decay_line(s, w)) flush_writebacks_++;
        transitions_++;
      }
      *changed = true;
      return "decay " + std::to_string(d.lines.size());
    }
    case Decision::Kind::WaySetting: {
      // Way settings are applied where they are decided (mid-interval).
      return "ways=" + std::to_string(d.active_ways);
    }
  }
  throw InvariantError("unhandled decision kind");
}

void Runner::close_interval(bool final_partial) {
  IntervalRecord rec;
  rec.index = interval_index_++;
  rec.wall_start = wall_start_;
  if (coloring_) {
    if (alloc_.shared)
      rec.colors = {static_cast<uint32_t>(M_ - alloc_.off_colors.size())};
    else
      for (const auto& cc : alloc_.core_colors)
        rec.colors.push_back(static_cast<uint32_t>(cc.size()));
  }
  rec.active_sets = store_->active_sets();
  rec.active_ways = store_->active_ways();

  std::vector<double> compute(clocks_.size());
  for (size_t i = 0; i < clocks_.size(); ++i) {
    compute[i] = clocks_[i].compute_pending();
    clocks_[i].committed += compute[i];
  }
  double wall_pre = 0;
  for (const auto& c : clocks_) wall_pre = std::max(wall_pre, c.committed + c.mid_overhead);

  // Snapshot interval counters before the decision's flushes touch them.
  uint64_t hits = 0, misses = 0, lms = 0, wbs = 0, instr = 0;
  for (const auto& c : clocks_) {
    instr += c.instructions;
    hits += c.hits;
    misses += c.misses;
    lms += c.load_misses;
    wbs += c.writebacks;
  }
  if (rce_)
    for (uint32_t i = 0; i < (has_shared_curve(cfg_.policy) ? 1u : header_.cores); ++i)
      rec.stats.rce_accesses += rce_->sampled_accesses(i);
  else if (wrce_)
    rec.stats.rce_accesses = wrce_->sampled_accesses();

  uint64_t boundary_oh = 0;
  bool changed = false;
  rec.decision = final_partial ? "end" : "keep";
  if (!final_partial) {
    switch (cfg_.policy) {
      case PolicyKind::None:
        break;
      case PolicyKind::Master: {
        Decision d = master_esa(make_observation(wall_pre), cfg_.master);
        rec.evaluated_configs = d.evaluated.size();
        rec.decision = apply_decision(d, wall_pre, &changed);
        boundary_oh = cfg_.overheads.algo_curve + (changed ? cfg_.overheads.reconfig : 0);
        break;
      }
      case PolicyKind::Palette: {
        Decision d = palette_esa(make_observation(wall_pre), cfg_.palette);
        rec.evaluated_configs = d.evaluated.size();
        rec.decision = apply_decision(d, wall_pre, &changed);
        boundary_oh = cfg_.overheads.algo_curve + (changed ? cfg_.overheads.reconfig : 0);
        break;
      }
      case PolicyKind::CashierMsm:
      case PolicyKind::CashierPsm: {
        CashierParams p = cfg_.cashier;
        p.mode = cfg_.policy == PolicyKind::CashierMsm ? CashierParams::Mode::MSM
                                                       : CashierParams::Mode::PSM;
        Decision d = cashier_esa(make_observation(wall_pre), p, cashier_state_);
        rec.evaluated_configs = d.evaluated.size();
        rec.decision = apply_decision(d, wall_pre, &changed);
        boundary_oh = cfg_.overheads.algo_curve + (changed ? cfg_.overheads.reconfig : 0);
        break;
      }
      case PolicyKind::Manager: {
        Decision d = manager_esa(make_observation(wall_pre), cfg_.manager, manager_state_);
        rec.evaluated_configs = d.evaluated.size();
        rec.decision = apply_decision(d, wall_pre, &changed);
        boundary_oh = cfg_.overheads.algo_curve + (changed ? cfg_.overheads.reconfig : 0);
        break;
      }
      case PolicyKind::Encache: {
        Decision d = encache_esa(make_way_observation(wall_pre), cfg_.encache);
        rec.evaluated_configs = d.evaluated.size();
        rec.decision = apply_decision(d, wall_pre, &changed);
        boundary_oh = cfg_.overheads.algo_curve + (changed ? cfg_.overheads.reconfig : 0);
        break;
      }
      case PolicyKind::Dct: {
        Decision d = dct_tick(*store_, *dct_, wall_pre, decay_cycles_);
        rec.evaluated_configs = d.evaluated.size();
        rec.decision = apply_decision(d, wall_pre, &changed);
        boundary_oh = cfg_.overheads.algo_decay + (changed ? cfg_.overheads.reconfig : 0);
        break;
      }
      case PolicyKind::Wac:
        // Way decisions happen on hit windows; the boundary only closes books.
        rec.decision = mid_actions_.empty() ? "keep" : mid_actions_;
        break;
    }
  }
  rec.per_core.resize(clocks_.size());
  for (size_t i = 0; i < clocks_.size(); ++i) {
    CoreClock& c = clocks_[i];
    double oh_total = c.mid_overhead + static_cast<double>(boundary_oh);
    c.committed += oh_total;
    CoreIntervalStats& pc = rec.per_core[i];
    pc.instructions = c.instructions;
    pc.accesses = c.accesses;
    pc.hits = c.hits;
    pc.misses = c.misses;
    pc.load_misses = c.load_misses;
    pc.writebacks = c.writebacks;
    pc.compute_cycles = compute[i];
    pc.overhead_cycles = oh_total;
    pc.clock_end = c.committed;
  }

  double wall_end = 0;
  for (const auto& c : clocks_) wall_end = std::max(wall_end, c.committed);
  rec.wall_end = wall_end;

  integral_.advance(wall_end, store_->powered_lines());
  double duration = wall_end - wall_start_;
  double total_lines = static_cast<double>(store_->sets()) * store_->assoc();
  rec.stats.instructions = instr;
  rec.stats.cycles = duration;
  rec.stats.l2_hits = hits;
  rec.stats.l2_misses = misses;
  rec.stats.load_misses = lms;
  rec.stats.writebacks = wbs + flush_writebacks_;
  rec.stats.transitions = transitions_;
  rec.stats.assoc = g_.assoc;
  rec.stats.active_fraction =
      duration > 0 ? integral_.weighted / (total_lines * duration)
                   : static_cast<double>(store_->powered_lines()) / total_lines;
  double denom = 2.0 * static_cast<double>(misses) + static_cast<double>(hits);
  rec.stats.active_ways = denom > 0 ? way_weight_ / denom : static_cast<double>(g_.assoc);
  rec.flush_writebacks = flush_writebacks_;
  EnergyParams ep = cfg_.params;
  if (!rce_ && !wrce_) {
    // This policy carries no sampled profiler hardware, so none of its
    // dynamic or leakage energy exists either.
    ep.e_dyn_rce_nj = 0;
    ep.p_leak_rce_w = 0;
  }
  rec.energy = energy(rec.stats, ep, mode_);

  records_.push_back(std::move(rec));

  // Reset interval scope.
  for (auto& c : clocks_) {
    c.instructions = 0;
    c.accesses = 0;
    c.hits = 0;
    c.misses = 0;
    c.load_misses = 0;
    c.writebacks = 0;
    c.mid_overhead = 0;
  }
  way_weight_ = 0;
  transitions_ = 0;
  flush_writebacks_ = 0;
  mid_actions_.clear();
  events_in_interval_ = 0;
  integral_.weighted = 0;
  integral_.mark = wall_end;
  wall_start_ = wall_end;
  if (rce_) rce_->reset_interval();
  if (wrce_) wrce_->reset_interval();

  switch (cfg_.interval.mode) {
    case IntervalSpec::Mode::Cycles: {
      double count = static_cast<double>(cfg_.interval.count);
      next_cycle_boundary_ = (std::floor(wall_end / count) + 1.0) * count;
      break;
    }
    case IntervalSpec::Mode::Instructions: {
      uint64_t tot = total_instructions();
      next_instr_boundary_ = (tot / cfg_.interval.count + 1) * cfg_.interval.count;
      break;
    }
    case IntervalSpec::Mode::TargetInstructions:
      armed_ = false;
      target_threshold_ += cfg_.interval.count;
      break;
  }
}

RunReport Runner::go() {
  auto t0 = std::chrono::steady_clock::now();
  g_ = cfg_.geometry;
  M_ = num_colors(g_);
  setup();

  TraceEvent ev;
  while (reader_.next(ev)) on_event(ev);
  bool pending = events_in_interval_ > 0;
  for (const auto& c : clocks_)
    pending = pending || c.instructions > 0 || c.mid_overhead > 0;
  if (pending || records_.empty()) close_interval(true);

  RunReport rep;
  rep.policy = policy_name(cfg_.policy);
  rep.fingerprint = header_.fingerprint;
  rep.cores = header_.cores;
  rep.trace_events = events_total_;
  rep.config = cfg_;
  rep.intervals = std::move(records_);

  size_t skip = std::min<size_t>(cfg_.skip_intervals, rep.intervals.size());
  double fa_weight = 0, aw_weight = 0, aw_denom = 0;
  for (size_t i = skip; i < rep.intervals.size(); ++i) {
    const IntervalRecord& r = rep.intervals[i];
    rep.totals.instructions += r.stats.instructions;
    rep.totals.cycles += r.stats.cycles;
    rep.totals.l2_hits += r.stats.l2_hits;
    rep.totals.l2_misses += r.stats.l2_misses;
    rep.totals.load_misses += r.stats.load_misses;
    rep.totals.writebacks += r.stats.writebacks;
    rep.totals.rce_accesses += r.stats.rce_accesses;
    rep.totals.transitions += r.stats.transitions;
    fa_weight += r.stats.active_fraction * r.stats.cycles;
    double d = 2.0 * static_cast<double>(r.stats.l2_misses) +
               static_cast<double>(r.stats.l2_hits);
    aw_weight += r.stats.active_ways * d;
    aw_denom += d;
    rep.energy_totals.le_l2 += r.energy.le_l2;
    rep.energy_totals.de_l2 += r.energy.de_l2;
    rep.energy_totals.e_dram += r.energy.e_dram;
    rep.energy_totals.e_tran += r.energy.e_tran;
    rep.energy_totals.e_algo += r.energy.e_algo;
  }
  rep.totals.assoc = g_.assoc;
  rep.totals.active_fraction = rep.totals.cycles > 0 ? fa_weight / rep.totals.cycles : 1.0;
  rep.totals.active_ways =
      aw_denom > 0 ? aw_weight / aw_denom : static_cast<double>(g_.assoc);
  // e_tran is a sub-component of e_algo, so it is excluded from the sum.
  rep.energy_totals.total = rep.energy_totals.le_l2 + rep.energy_totals.de_l2 +
                            rep.energy_totals.e_dram + rep.energy_totals.e_algo;
  rep.makespan_cycles = rep.totals.cycles;
  rep.active_ratio = rep.totals.active_fraction;

  rep.core_windows.resize(clocks_.size());
  for (size_t i = 0; i < clocks_.size(); ++i) {
    uint64_t instr = 0;
    for (size_t k = skip; k < rep.intervals.size(); ++k)
      instr += rep.intervals[k].per_core[i].instructions;
    double start =
        skip > 0 && skip <= rep.intervals.size() && skip >= 1
            ? rep.intervals[skip - 1].per_core[i].clock_end
            : 0.0;
    rep.core_windows[i].instructions = instr;
    rep.core_windows[i].cycles =
        rep.intervals.empty() ? 0.0 : rep.intervals.back().per_core[i].clock_end - start;
  }

  rep.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

}  // namespace

void validate(const ScenarioConfig& c) {
  if (c.geometry.sets == 0 || c.geometry.assoc == 0)
    throw ConfigError("scenario geometry is unset");
  validate(c.params);
  if (!is_pow2(c.sampling))
    throw ConfigError("profiler sampling ratio must be a power of two");
  if (c.interval.count < 1) throw ConfigError("interval length must be at least 1");
  if (c.interval.poll_cycles < 1)
    throw ConfigError("poll granularity must be at least 1");
  if (c.decay_cycles < 0) throw ConfigError("decay interval must be non-negative");
  if ((c.policy == PolicyKind::Manager ||
       c.interval.mode == IntervalSpec::Mode::TargetInstructions) &&
      !c.manager.target.has_value())
    throw ConfigError("a target core must be configured");
  if (is_coloring(c.policy)) num_colors(c.geometry);  // throws when indivisible
}

RunReport run(const ScenarioConfig& c, const std::string& trace_path) {
  validate(c);
  Runner r(c, trace_path);
  return r.go();
}

RunReport run_baseline(const ScenarioConfig& c, const std::string& trace_path) {
  ScenarioConfig b = c;
  b.policy = PolicyKind::None;
  return run(b, trace_path);
}

RunMetricsInput metrics_input(const RunReport& r) {
  RunMetricsInput in;
  in.cores = r.core_windows;
  in.energy_total_j = r.energy_totals.total;
  in.makespan_cycles = r.makespan_cycles;
  in.accesses = r.totals.l2_hits + r.totals.l2_misses;
  in.misses = r.totals.l2_misses;
  in.active_ratio = r.active_ratio;
  return in;
}

ComparisonMetrics compare(const RunReport& base, const RunReport& tech) {
  CS_CHECK(base.fingerprint == tech.fingerprint,
           "reports describe different traces and cannot be compared");
  CS_CHECK(base.cores == tech.cores, "reports disagree on the core count");
  return metrics(metrics_input(base), metrics_input(tech));
}

}  // namespace cachesim
