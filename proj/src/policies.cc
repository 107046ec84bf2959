#include "cachesim/policies.hh"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "cachesim/errors.hh"

namespace cachesim {

namespace {

// Five marginal-gain bands over four thresholds. A low gain means extra
// colors barely help, so the candidate set skews toward shrinking; a high
// gain skews toward growing.
size_t band_index(double gain, const std::vector<double>& lambda) {
  CS_CHECK(lambda.size() == 4, "threshold list must have four entries");
  CS_CHECK(lambda[0] < lambda[1] && lambda[1] < lambda[2] && lambda[2] < lambda[3], "thresholds must be strictly ascending");
  size_t b = 0;
  while (b < 4 && gain > lambda[b]) ++b;
  return b;  // 0..4
}

// Candidate color counts for one table: the current count plus banded
// offsets, clamped to [lo, hi], deduplicated, ascending.
std::vector<uint32_t> banded_candidates(const MissCurve& curve, uint32_t current,
                                        const std::vector<double>& lambda, uint32_t lo,
                                        uint32_t hi) {
  static const int kOffsets[5][4] = {
      {-6, -4, -1, 0},  // gain <= lambda1: shrink hard
      {-4, -1, 0, 1},   // shrink gently
      {-1, 0, 4, 6},    // explore both sides
      {0, 1, 4, 6},     // grow gently
      {0, 4, 6, 8},     // gain > lambda4: grow hard
  };
  const size_t b = band_index(mcu(curve, current), lambda);
  std::vector<uint32_t> out;
  for (int off : kOffsets[b]) {
    int64_t v = static_cast<int64_t>(current) + off;
    v = std::clamp<int64_t>(v, lo, hi);
    out.push_back(static_cast<uint32_t>(v));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<uint64_t> as_u64(const std::vector<uint32_t>& v) {
  return std::vector<uint64_t>(v.begin(), v.end());
}

uint64_t round_count(double x) {
  return x <= 0 ? 0 : static_cast<uint64_t>(std::llround(x));
}

// Cross product of per-table candidate lists, in odometer order (last table
// varies fastest), keeping only configurations whose total fits in M.
std::vector<std::vector<uint32_t>> cross_product(const std::vector<std::vector<uint32_t>>& lists,
                                                 uint32_t M) {
  std::vector<std::vector<uint32_t>> out;
  std::vector<size_t> idx(lists.size(), 0);
  for (;;) {
    std::vector<uint32_t> cfg(lists.size());
    uint64_t total = 0;
    for (size_t i = 0; i < lists.size(); ++i) {
      cfg[i] = lists[i][idx[i]];
      total += cfg[i];
    }
    if (total <= M) out.push_back(std::move(cfg));
    size_t i = lists.size();
    while (i > 0) {
      --i;
      if (++idx[i] < lists[i].size()) break;
      idx[i] = 0;
      if (i == 0) return out;
    }
  }
}

size_t argmin_energy(const std::vector<EvaluatedCandidate>& cands, bool survivors_only) {
  size_t best = cands.size();
  for (size_t i = 0; i < cands.size(); ++i) {
    if (survivors_only && !cands[i].survived) continue;
    if (best == cands.size() || cands[i].est_energy_j < cands[best].est_energy_j) best = i;
  }
  CS_CHECK(best < cands.size(), "argmin over empty candidate list");
  return best;
}

}  // namespace

double estimate_config_energy(const IntervalObservation& obs,
                              const std::vector<uint32_t>& counts) {
  CS_CHECK(counts.size() == obs.core.size(), "config size must match table count");
  IntervalStats s;
  double max_cycles = 0;
  double misses = 0, load_misses = 0, hits = 0;
  uint64_t total_colors = 0;
  for (size_t i = 0; i < counts.size(); ++i) {
    const CoreObs& c = obs.core[i];
    const double m = interpolate_misses(c.curve, counts[i]);
    const double lm = interpolate_load_misses(c.curve, counts[i]);
    max_cycles = std::max(max_cycles, estimate_cycles(c.base_cycles, c.spm_value, lm));
    misses += m;
    load_misses += lm;
    hits += std::max(0.0, static_cast<double>(c.accesses) - m);
    total_colors += counts[i];
  }
  s.cycles = max_cycles;
  s.l2_hits = round_count(hits);
  s.l2_misses = round_count(misses);
  s.load_misses = round_count(load_misses);
  s.writebacks = obs.writebacks_total;  // held at the measured value
  s.rce_accesses = obs.rce_accesses;
  s.transitions = 0;  // reconfiguration costs are not part of the comparison
  s.active_fraction = static_cast<double>(total_colors) / obs.M;
  s.active_ways = obs.assoc;
  s.assoc = obs.assoc;
  return energy(s, obs.params, EnergyMode::Technique).total;
}

double estimate_extra_seconds(const IntervalObservation& obs, size_t table, uint32_t colors,
                              uint32_t reference_colors) {
  CS_CHECK(table < obs.core.size(), "table index out of range");
  const CoreObs& c = obs.core[table];
  const double at = estimate_cycles(c.base_cycles, c.spm_value,
                                    interpolate_load_misses(c.curve, colors));
  const double ref = estimate_cycles(c.base_cycles, c.spm_value,
                                     interpolate_load_misses(c.curve, reference_colors));
  return (at - ref) / obs.params.frequency_hz;
}

// ---------------------------------------------------------------------------
// MASTER: per-core candidate generation, optional pruning, joint search.
// ---------------------------------------------------------------------------

namespace {

// Cheap per-core energy share used only to prune per-core candidate lists
// when three or more cores would make the joint search too wide: this core's
// leakage share plus its own dynamic and DRAM traffic.
double core_energy_share(const IntervalObservation& obs, size_t core, uint32_t colors) {
  const CoreObs& c = obs.core[core];
  const EnergyParams& p = obs.params;
  const double m = interpolate_misses(c.curve, colors);
  const double lm = interpolate_load_misses(c.curve, colors);
  const double h = std::max(0.0, static_cast<double>(c.accesses) - m);
  const double t = estimate_cycles(c.base_cycles, c.spm_value, lm) / p.frequency_hz;
  const double leak = p.p_leak_l2_w * (1.0 + p.upsilon) *
                      (static_cast<double>(colors) / obs.M) * (1.0 - p.p_off) * t;
  const double dyn = p.e_dyn_l2_nj * 1e-9 * (2.0 * m + h);
  const double dram = p.e_dyn_dram_nj * 1e-9 * (m + c.writebacks);
  return leak + dyn + dram;
}

}  // namespace

Decision master_esa(const IntervalObservation& obs, const MasterParams& p) {
  const size_t n = obs.core.size();
  CS_CHECK(n >= 1 && obs.colors.size() == n, "observation needs one color count per table");
  const uint32_t M = obs.M;
  const uint32_t lo = p.min_colors ? p.min_colors : std::max<uint32_t>(1, M / 64);

  std::vector<std::vector<uint32_t>> lists(n);
  for (size_t i = 0; i < n; ++i) {
    lists[i] = banded_candidates(obs.core[i].curve, obs.colors[i], p.lambda, lo, M);
    CS_CHECK(lists[i].size() <= p.t_max, "candidate template exceeded its budget");
    if (n >= 3 && lists[i].size() > p.t_prune) {
      std::vector<std::pair<double, uint32_t>> scored;
      for (uint32_t c : lists[i]) scored.emplace_back(core_energy_share(obs, i, c), c);
      std::stable_sort(scored.begin(), scored.end());
      lists[i].clear();
      for (uint32_t k = 0; k < p.t_prune; ++k) lists[i].push_back(scored[k].second);
      std::sort(lists[i].begin(), lists[i].end());
    }
  }

  std::vector<std::vector<uint32_t>> configs = cross_product(lists, M);
  if (std::find(configs.begin(), configs.end(), obs.colors) == configs.end())
    configs.push_back(obs.colors);

  Decision d;
  for (const auto& cfg : configs)
    d.evaluated.push_back({as_u64(cfg), estimate_config_energy(obs, cfg), 0.0, true});

  const size_t best = argmin_energy(d.evaluated, false);
  const size_t cur = static_cast<size_t>(
      std::find(configs.begin(), configs.end(), obs.colors) - configs.begin());
  const double cur_energy = d.evaluated[cur].est_energy_j;
  const double needed = cur_energy * (1.0 - p.improve_min_pct / 100.0);
  if (configs[best] != obs.colors && d.evaluated[best].est_energy_j < needed) {
    d.kind = Decision::Kind::NewAllocation;
    d.color_counts = configs[best];
  }
  return d;
}

// ---------------------------------------------------------------------------
// Palette: one shared table, banded candidate fan in two-color steps.
// ---------------------------------------------------------------------------

Decision palette_esa(const IntervalObservation& obs, const PaletteParams& p) {
  CS_CHECK(obs.core.size() == 1 && obs.colors.size() == 1, "policy expects a single shared table");
  const uint32_t M = obs.M;
  const uint32_t lo = p.min_colors ? p.min_colors : std::max<uint32_t>(1, M / 16);
  const uint32_t c = obs.colors[0];
  const uint32_t fan = p.candidates - 1;

  // Share of the fan that points down (shrink), by marginal-gain band.
  static const double kDownShare[5] = {0.8, 0.6, 0.5, 0.4, 0.2};
  const size_t b = band_index(mcu(obs.core[0].curve, c), p.lambda);
  const uint32_t down = static_cast<uint32_t>(std::llround(kDownShare[b] * fan));
  const uint32_t up = fan - down;

  std::vector<uint32_t> cands{c};
  for (uint32_t k = 1; k <= down; ++k) {
    const int64_t v = static_cast<int64_t>(c) - static_cast<int64_t>(k * p.granularity);
    if (v >= lo) cands.push_back(static_cast<uint32_t>(v));
  }
  for (uint32_t k = 1; k <= up; ++k) {
    const uint64_t v = c + static_cast<uint64_t>(k) * p.granularity;
    if (v <= M) cands.push_back(static_cast<uint32_t>(v));
  }
  std::sort(cands.begin(), cands.end());
  cands.erase(std::unique(cands.begin(), cands.end()), cands.end());

  Decision d;
  for (uint32_t cc : cands)
    d.evaluated.push_back({{cc}, estimate_config_energy(obs, {cc}), 0.0, true});
  const size_t best = argmin_energy(d.evaluated, false);
  if (cands[best] != c) {
    d.kind = Decision::Kind::NewAllocation;
    d.color_counts = {cands[best]};
  }
  return d;
}

// ---------------------------------------------------------------------------
// CASHIER: shrink a shared cache while spending a slack budget.
// ---------------------------------------------------------------------------

Decision cashier_esa(const IntervalObservation& obs, const CashierParams& p,
                     CashierState& state) {
  CS_CHECK(obs.core.size() == 1 && obs.colors.size() == 1, "policy expects a single shared table");
  const uint32_t M = obs.M;
  const uint32_t lo = p.min_colors ? p.min_colors : std::max<uint32_t>(1, M / 16);
  const uint32_t c = obs.colors[0];
  const CoreObs& core = obs.core[0];
  const double f = obs.params.frequency_hz;

  // Fold this interval into the running slack account: how much slower the
  // interval ran than the full-cache estimate says it would have.
  const double base_cycles =
      estimate_cycles(core.base_cycles, core.spm_value, interpolate_load_misses(core.curve, M));
  state.t_acc_seconds += (core.measured_cycles - base_cycles) / f;
  state.elapsed_seconds += core.measured_cycles / f;

  // Slack budget for the next interval.
  double budget = 0;
  if (p.mode == CashierParams::Mode::MSM) {
    const double usable = (1.0 - p.reserve_fraction) * p.t_slack_seconds;
    budget = std::max(0.0, (usable - state.t_acc_seconds) / p.horizon);
  } else {
    const double allowed = (p.upsilon_pct - p.delta_pct) / 100.0;
    const double base_next_s = base_cycles / f;  // next interval's full-cache proxy
    budget = std::max(0.0, allowed * (state.elapsed_seconds - state.t_acc_seconds + base_next_s) -
                               state.t_acc_seconds);
  }

  Decision d;
  std::vector<uint32_t> cands;
  const uint32_t lo_c = static_cast<uint32_t>(
      std::max<int64_t>(lo, static_cast<int64_t>(c) - p.l_range));
  const uint32_t hi_c = std::min<uint32_t>(M, c + p.l_range);
  for (uint32_t cc = lo_c; cc <= hi_c; ++cc) cands.push_back(cc);

  for (uint32_t cc : cands) {
    const double extra = std::max(0.0, estimate_extra_seconds(obs, 0, cc, M));
    d.evaluated.push_back(
        {{cc}, estimate_config_energy(obs, {cc}), extra, extra <= budget});
  }

  uint32_t chosen;
  const bool any_survivor =
      std::any_of(d.evaluated.begin(), d.evaluated.end(),
                  [](const EvaluatedCandidate& e) { return e.survived; });
  if (!any_survivor) {
    chosen = std::min<uint32_t>(c + p.l_range, M);  // largest candidate: least slowdown
  } else {
    chosen = cands[argmin_energy(d.evaluated, true)];
  }
  if (chosen != c) {
    d.kind = Decision::Kind::NewAllocation;
    d.color_counts = {chosen};
  }
  return d;
}

// ---------------------------------------------------------------------------
// MANAGER: keep a target core within its slowdown bound, then minimize energy.
// ---------------------------------------------------------------------------

Decision manager_esa(const IntervalObservation& obs, const ManagerParams& p,
                     ManagerState& state) {
  const size_t n = obs.core.size();
  CS_CHECK(n >= 2 && obs.colors.size() == n, "policy needs at least two tables");
  if (!p.target || *p.target >= n)
    throw ConfigError("manager policy requires a valid target core");
  const size_t tgt = *p.target;
  const uint32_t M = obs.M;
  const uint32_t lo = p.min_colors ? p.min_colors : std::max<uint32_t>(1, M / 32);
  const uint32_t half = M / 2;
  const CoreObs& t = obs.core[tgt];
  const double f = obs.params.frequency_hz;

  const double half_cycles =
      estimate_cycles(t.base_cycles, t.spm_value, interpolate_load_misses(t.curve, half));
  state.t_acc_seconds += (t.measured_cycles - half_cycles) / f;
  state.elapsed_seconds += t.measured_cycles / f;

  const double allowed_pct = p.omega_pct - p.chi_pct;

  // Projected slowdown of the target if the next interval runs at `colors`.
  auto projected_pct = [&](uint32_t colors) {
    const double cyc =
        estimate_cycles(t.base_cycles, t.spm_value, interpolate_load_misses(t.curve, colors));
    const double acc = state.t_acc_seconds + (cyc - half_cycles) / f;
    const double elapsed = state.elapsed_seconds + cyc / f;
    if (acc <= 0) return 0.0;
    const double denom = elapsed - acc;
    return denom > 0 ? acc * 100.0 / denom : std::numeric_limits<double>::infinity();
  };

  // Smallest color count that keeps the projection within the bound; the
  // half-cache reference always qualifies once the account is in balance, so
  // the scan normally stops at or below M/2.
  uint32_t floor_t = M;
  for (uint32_t cc = lo; cc <= M; ++cc) {
    if (projected_pct(cc) <= allowed_pct) {
      floor_t = cc;
      break;
    }
  }

  std::vector<std::vector<uint32_t>> lists(n);
  for (size_t i = 0; i < n; ++i) {
    const uint32_t cur = obs.colors[i];
    uint32_t lo_i = lo, hi_i = M;
    if (i == tgt) lo_i = std::max(lo, floor_t);
    // Per-interval transfer cap, relaxed when the floor demands a bigger jump.
    const uint32_t cap_lo = static_cast<uint32_t>(
        std::max<int64_t>(lo_i, static_cast<int64_t>(cur) - p.max_transfer));
    const uint32_t cap_hi = std::min<uint64_t>(hi_i, std::max<uint64_t>(
        static_cast<uint64_t>(cur) + p.max_transfer, i == tgt ? floor_t : 0));
    lists[i] = banded_candidates(obs.core[i].curve, cur, p.lambda, cap_lo,
                                 std::max(cap_lo, cap_hi));
  }

  std::vector<std::vector<uint32_t>> configs = cross_product(lists, M);
  if (configs.empty()) {
    // Deterministic fallback: everyone at the minimum, target at its floor.
    std::vector<uint32_t> fb(n, lo);
    fb[tgt] = std::min<uint32_t>(std::max(floor_t, lo),
                                 M - static_cast<uint32_t>(n - 1) * lo);
    configs.push_back(std::move(fb));
  }

  Decision d;
  for (const auto& cfg : configs)
    d.evaluated.push_back({as_u64(cfg), estimate_config_energy(obs, cfg),
                           estimate_extra_seconds(obs, tgt, cfg[tgt], half), true});
  const size_t best = argmin_energy(d.evaluated, false);
  if (configs[best] != obs.colors) {
    d.kind = Decision::Kind::NewAllocation;
    d.color_counts = configs[best];
  }
  return d;
}

// ---------------------------------------------------------------------------
// EnCache: joint set-state / way-count search with a performance filter.
// ---------------------------------------------------------------------------

Decision encache_esa(const WayObs& obs, const EncacheParams& p) {
  const size_t ns = obs.set_states.size();
  CS_CHECK(ns >= 1 && obs.assoc >= 1, "way observation needs states and ways");
  CS_CHECK(obs.misses.size() == ns && obs.load_misses.size() == ns, "estimate matrices must cover every set-state");
  const uint64_t full_sets = obs.set_states.back();
  const double full_cycles =
      estimate_cycles(obs.base_cycles, obs.spm_value,
                      obs.load_misses[ns - 1][obs.assoc - 1]);

  Decision d;
  double best_energy = std::numeric_limits<double>::infinity();
  size_t best_idx = 0;
  for (size_t si = 0; si < ns; ++si) {
    for (uint32_t w = 1; w <= obs.assoc; ++w) {
      const double m = obs.misses[si][w - 1];
      const double lm = obs.load_misses[si][w - 1];
      const double cyc = estimate_cycles(obs.base_cycles, obs.spm_value, lm);
      const double extra_s = (cyc - full_cycles) / obs.params.frequency_hz;
      const bool ok = (cyc - full_cycles) <= (p.dpmr_pct / 100.0) * full_cycles;

      IntervalStats s;
      s.cycles = cyc;
      s.l2_misses = round_count(m);
      s.load_misses = round_count(lm);
      s.l2_hits = round_count(std::max(0.0, static_cast<double>(obs.accesses) - m));
      s.writebacks = obs.writebacks;
      s.rce_accesses = obs.rce_accesses;
      s.transitions = 0;
      s.active_fraction = static_cast<double>(obs.set_states[si]) * w /
                          (static_cast<double>(full_sets) * obs.assoc);
      s.active_ways = w;
      s.assoc = obs.assoc;
      const double e = energy(s, obs.params, EnergyMode::Technique).total;

      d.evaluated.push_back({{obs.set_states[si], w}, e, extra_s, ok});
      if (ok && e < best_energy) {
        best_energy = e;
        best_idx = d.evaluated.size() - 1;
      }
    }
  }
  CS_CHECK(std::isfinite(best_energy), "full configuration must survive the filter");  // the full configuration always survives

  const auto& pick = d.evaluated[best_idx].config;
  if (pick[0] != full_sets || pick[1] != obs.assoc) {
    d.kind = Decision::Kind::NewConfig;
    d.active_sets = pick[0];
    d.active_ways = static_cast<uint32_t>(pick[1]);
  }
  return d;
}

// ---------------------------------------------------------------------------
// DCT: exact per-line idle clocks.
// ---------------------------------------------------------------------------

DctState::DctState(uint64_t sets, uint32_t assoc)
    : sets_(sets), assoc_(assoc), last_(sets * assoc, 0.0) {}

void DctState::observe(uint64_t set, uint32_t way, double now_cycles) {
  CS_CHECK(set < sets_ && way < assoc_, "line index out of range");
  last_[set * assoc_ + way] = now_cycles;
}

std::vector<std::pair<uint64_t, uint32_t>> DctState::expired(
    const TagStore& store, double now_cycles, double decay_interval_cycles) const {
  CS_CHECK(store.sets() == sets_ && store.assoc() == assoc_, "store geometry mismatch");
  std::vector<std::pair<uint64_t, uint32_t>> out;
  for (uint64_t s = 0; s < sets_; ++s) {
    for (uint32_t w = 0; w < assoc_; ++w) {
      const CacheLine& line = store.line(s, w);
      if (!line.valid || !line.powered) continue;
      if (now_cycles - last_[s * assoc_ + w] >= decay_interval_cycles)
        out.emplace_back(s, w);
    }
  }
  return out;
}

Decision dct_tick(const TagStore& store, const DctState& state, double now_cycles,
                  double decay_interval_cycles) {
  Decision d;
  d.lines = state.expired(store, now_cycles, decay_interval_cycles);
  if (!d.lines.empty()) d.kind = Decision::Kind::BlockTurnoff;
  return d;
}

// ---------------------------------------------------------------------------
// WAC: LRU-way hit share steers the active way count.
// ---------------------------------------------------------------------------

Decision wac_tick(const WacWindow& window, uint32_t active_ways, uint32_t assoc,
                  const WacParams& p) {
  CS_CHECK(active_ways >= 1 && active_ways <= assoc, "active way count out of range");
  CS_CHECK(window.hits_by_rank.size() >= active_ways, "window must cover every active way");
  Decision d;
  const uint64_t mru = window.hits_by_rank[0];
  if (mru == 0) return d;  // no signal this window
  const double z =
      static_cast<double>(window.hits_by_rank[active_ways - 1]) / static_cast<double>(mru);
  if (z < p.t1 && active_ways > 2) {
    d.kind = Decision::Kind::WaySetting;
    d.active_ways = active_ways - 1;
  } else if (z > p.t2 && active_ways < assoc) {
    d.kind = Decision::Kind::WaySetting;
    d.active_ways = active_ways + 1;
  }
  return d;
}

}  // namespace cachesim
