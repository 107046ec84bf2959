#include "cachesim/energy.hh"

#include <cmath>

#include "cachesim/errors.hh"

namespace cachesim {

void validate(const EnergyParams& p) {
  auto nonneg = [](double v, const char* what) {
    if (!(v >= 0)) throw ConfigError(std::string(what) + " must be non-negative");
  };
  nonneg(p.e_dyn_l2_nj, "e_dyn_l2");
  nonneg(p.p_leak_l2_w, "p_leak_l2");
  nonneg(p.e_dyn_dram_nj, "e_dyn_dram");
  nonneg(p.p_leak_dram_w, "p_leak_dram");
  nonneg(p.e_dyn_rce_nj, "e_dyn_rce");
  nonneg(p.p_leak_rce_w, "p_leak_rce");
  nonneg(p.e_chi_nj, "e_chi");
  auto frac = [](double v, const char* what) {
    if (!(v >= 0 && v <= 1)) throw ConfigError(std::string(what) + " must lie in [0,1]");
  };
  frac(p.p_off, "p_off");
  frac(p.upsilon, "upsilon");
  frac(p.g_f, "g_f");
  frac(p.d_f, "d_f");
  if (std::abs(p.g_f + p.d_f - 1.0) > 1e-9)
    throw ConfigError("g_f + d_f must equal 1");
  if (!(p.frequency_hz > 0)) throw ConfigError("frequency must be positive");
}

EnergyParams energy_preset(const std::string& name, uint32_t cores) {
  if (cores < 1) throw ConfigError("energy preset needs at least one core");
  EnergyParams p;  // defaults are the cacti32nm-4mb row
  double ref_cores;
  if (name == "cacti32nm-4mb") {
    ref_cores = 2;
  } else if (name == "cacti32nm-8mb") {
    p.e_dyn_l2_nj = 0.438;
    p.p_leak_l2_w = 2.72;
    p.e_dyn_rce_nj = 0.016;
    p.p_leak_rce_w = 0.023;
    ref_cores = 4;
  } else if (name == "cacti45nm-2mb") {
    p.e_dyn_l2_nj = 0.985;
    p.p_leak_l2_w = 1.568;
    p.e_dyn_rce_nj = 0.004;
    p.p_leak_rce_w = 0.007;
    p.frequency_hz = 1.5e9;
    ref_cores = 1;
  } else {
    throw ConfigError("unknown energy preset: " + name);
  }
  p.e_dyn_rce_nj *= double(cores) / ref_cores;
  p.p_leak_rce_w *= double(cores) / ref_cores;
  return p;
}

std::vector<std::string> energy_preset_names() {
  return {"cacti32nm-4mb", "cacti32nm-8mb", "cacti45nm-2mb"};
}

EnergyBreakdown energy(const IntervalStats& s, const EnergyParams& p, EnergyMode mode) {
  CS_CHECK(s.assoc >= 1, "stats need a real associativity");
  CS_CHECK(s.active_fraction >= 0 && s.active_fraction <= 1.0 + 1e-12,
           "active fraction out of [0,1]");
  bool base = mode == EnergyMode::Baseline;
  if (!base)
    CS_CHECK(s.active_ways >= 1 && s.active_ways <= double(s.assoc) + 1e-9,
             "active ways out of [1, assoc]");

  double time_s = s.time_seconds(p.frequency_hz);
  double ups = base ? 0.0 : p.upsilon;
  double fa = base ? 1.0 : s.active_fraction;
  double w = base ? double(s.assoc) : s.active_ways;

  EnergyBreakdown b;
  b.le_l2 = p.p_leak_l2_w * (1.0 + ups) * (fa + (1.0 - fa) * p.p_off) * time_s;
  b.de_l2 = p.e_dyn_l2_nj * 1e-9 * double(2 * s.l2_misses + s.l2_hits) *
            (p.g_f + p.d_f * w / double(s.assoc));
  b.e_dram = p.p_leak_dram_w * time_s + p.e_dyn_dram_nj * 1e-9 * double(s.dram_accesses());
  if (!base) {
    b.e_tran = p.e_chi_nj * 1e-9 * double(s.transitions);
    b.e_algo = b.e_tran + p.e_dyn_rce_nj * 1e-9 * double(s.rce_accesses) +
               p.p_leak_rce_w * time_s;
  }
  b.total = b.le_l2 + b.de_l2 + b.e_dram + b.e_algo;
  return b;
}

double spm(double stall_cycles, double load_misses) {
  CS_CHECK(stall_cycles >= 0 && load_misses >= 0, "negative stall or miss count");
  if (load_misses == 0) return 0.0;
  return stall_cycles / load_misses;
}

double estimate_cycles(double base_cycles, double spm_value, double load_misses_at_config) {
  CS_CHECK(base_cycles >= 0 && spm_value >= 0 && load_misses_at_config >= 0,
           "negative estimate input");
  return base_cycles + spm_value * load_misses_at_config;
}

double simulate_cycles(double instructions, double load_misses, double base_cpi,
                       double miss_penalty, double overlap) {
  if (!(base_cpi > 0)) throw ConfigError("base_cpi must be positive");
  if (!(overlap > 0 && overlap <= 1)) throw ConfigError("overlap must lie in (0,1]");
  if (!(miss_penalty >= 0)) throw ConfigError("miss_penalty must be non-negative");
  return instructions * base_cpi + load_misses * miss_penalty * overlap;
}

double decay_interval_cycles(const EnergyParams& p, const CacheGeometry& g) {
  validate(p);
  CS_CHECK(p.p_leak_l2_w > 0, "decay interval needs positive leakage");
  return p.e_dyn_dram_nj * 1e-9 * p.frequency_hz * double(g.total_blocks()) / p.p_leak_l2_w;
}

}  // namespace cachesim
