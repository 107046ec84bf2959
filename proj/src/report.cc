#include "cachesim/report.hh"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cachesim/errors.hh"

namespace cachesim {
namespace {

using nlohmann::json;

json geometry_json(const CacheGeometry& g) {
  return json{{"size_bytes", g.size_bytes}, {"assoc", g.assoc},
              {"block_bytes", g.block_bytes}, {"page_bytes", g.page_bytes},
              {"address_bits", g.address_bits}, {"sets", g.sets},
              {"tag_bits", g.tag_bits}};
}

json params_json(const EnergyParams& p) {
  return json{{"e_dyn_l2_nj", p.e_dyn_l2_nj},   {"p_leak_l2_w", p.p_leak_l2_w},
              {"e_dyn_dram_nj", p.e_dyn_dram_nj}, {"p_leak_dram_w", p.p_leak_dram_w},
              {"e_dyn_rce_nj", p.e_dyn_rce_nj}, {"p_leak_rce_w", p.p_leak_rce_w},
              {"e_chi_nj", p.e_chi_nj},         {"p_off", p.p_off},
              {"upsilon", p.upsilon},           {"g_f", p.g_f},
              {"d_f", p.d_f},                   {"frequency_hz", p.frequency_hz}};
}

const char* interval_mode_name(IntervalSpec::Mode m) {
  switch (m) {
    case IntervalSpec::Mode::Cycles: return "cycles";
    case IntervalSpec::Mode::Instructions: return "instructions";
    case IntervalSpec::Mode::TargetInstructions: return "target-instructions";
  }
  return "cycles";
}

const char* repl_name(ReplPolicy r) {
  switch (r) {
    case ReplPolicy::LRU: return "lru";
    case ReplPolicy::FIFO: return "fifo";
    case ReplPolicy::PLRU: return "plru";
  }
  return "lru";
}

json config_json(const ScenarioConfig& c) {
  json j;
  j["geometry"] = geometry_json(c.geometry);
  j["energy"] = params_json(c.params);
  j["preset"] = c.preset;
  j["policy"] = policy_name(c.policy);
  j["repl"] = repl_name(c.repl);
  j["sampling"] = c.sampling;
  j["seed"] = c.seed;
  j["skip_intervals"] = c.skip_intervals;
  j["baseline"] = c.baseline == BaselineKind::StaticEqual ? "static-equal" : "shared";
  j["interval"] = json{{"mode", interval_mode_name(c.interval.mode)},
                       {"count", c.interval.count},
                       {"poll_cycles", c.interval.poll_cycles}};
  j["overheads"] = json{{"algo_curve", c.overheads.algo_curve},
                        {"algo_decay", c.overheads.algo_decay},
                        {"algo_way", c.overheads.algo_way},
                        {"reconfig", c.overheads.reconfig}};
  json p;
  p["t_max"] = c.master.t_max;
  p["t_prune"] = c.master.t_prune;
  p["improve_min_pct"] = c.master.improve_min_pct;
  p["lambda"] = c.master.lambda;
  p["min_colors"] = c.master.min_colors;
  p["candidates"] = c.palette.candidates;
  p["granularity"] = c.palette.granularity;
  p["t_slack_seconds"] = c.cashier.t_slack_seconds;
  p["upsilon_pct"] = c.cashier.upsilon_pct;
  p["delta_pct"] = c.cashier.delta_pct;
  p["reserve_fraction"] = c.cashier.reserve_fraction;
  p["l_range"] = c.cashier.l_range;
  p["horizon"] = c.cashier.horizon;
  p["omega_pct"] = c.manager.omega_pct;
  p["chi_pct"] = c.manager.chi_pct;
  p["max_transfer"] = c.manager.max_transfer;
  if (c.manager.target.has_value())
    p["target"] = *c.manager.target;
  else
    p["target"] = nullptr;
  p["dpmr_pct"] = c.encache.dpmr_pct;
  p["t1"] = c.wac.t1;
  p["t2"] = c.wac.t2;
  p["k_hits"] = c.wac.k_hits;
  p["decay_cycles"] = c.decay_cycles;
  j["policy_params"] = p;
  return j;
}

json stats_json(const IntervalStats& s) {
  return json{{"instructions", s.instructions},
              {"cycles", s.cycles},
              {"l2_hits", s.l2_hits},
              {"l2_misses", s.l2_misses},
              {"load_misses", s.load_misses},
              {"writebacks", s.writebacks},
              {"rce_accesses", s.rce_accesses},
              {"transitions", s.transitions},
              {"active_fraction", s.active_fraction},
              {"active_ways", s.active_ways},
              {"assoc", s.assoc}};
}

IntervalStats stats_from_json(const json& j) {
  IntervalStats s;
  s.instructions = j.at("instructions").get<uint64_t>();
  s.cycles = j.at("cycles").get<double>();
  s.l2_hits = j.at("l2_hits").get<uint64_t>();
  s.l2_misses = j.at("l2_misses").get<uint64_t>();
  s.load_misses = j.at("load_misses").get<uint64_t>();
  s.writebacks = j.at("writebacks").get<uint64_t>();
  s.rce_accesses = j.at("rce_accesses").get<uint64_t>();
  s.transitions = j.at("transitions").get<uint64_t>();
  s.active_fraction = j.at("active_fraction").get<double>();
  s.active_ways = j.at("active_ways").get<double>();
  s.assoc = j.at("assoc").get<uint32_t>();
  return s;
}

json energy_json(const EnergyBreakdown& e) {
  return json{{"le_l2", e.le_l2}, {"de_l2", e.de_l2},   {"e_dram", e.e_dram},
              {"e_tran", e.e_tran}, {"e_algo", e.e_algo}, {"total", e.total}};
}

EnergyBreakdown energy_from_json(const json& j) {
  EnergyBreakdown e;
  e.le_l2 = j.at("le_l2").get<double>();
  e.de_l2 = j.at("de_l2").get<double>();
  e.e_dram = j.at("e_dram").get<double>();
  e.e_tran = j.at("e_tran").get<double>();
  e.e_algo = j.at("e_algo").get<double>();
  e.total = j.at("total").get<double>();
  return e;
}

std::string shape_of(const IntervalRecord& r) {
  if (!r.colors.empty()) {
    std::string s;
    for (size_t i = 0; i < r.colors.size(); ++i)
      s += (i ? "/" : "") + std::to_string(r.colors[i]);
    return s;
  }
  return std::to_string(r.active_sets) + "x" + std::to_string(r.active_ways);
}

}  // namespace

void atomic_write(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw ConfigError("failed writing '" + tmp.string() + "'");
  }
  fs::rename(tmp, target);
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string report_to_json(const RunReport& r) {
  json j;
  j["schema"] = "cachesim-report-v1";
  j["policy"] = r.policy;
  j["fingerprint"] = r.fingerprint;
  j["cores"] = r.cores;
  j["trace_events"] = r.trace_events;
  j["config"] = config_json(r.config);
  json intervals = json::array();
  for (const IntervalRecord& rec : r.intervals) {
    json ji;
    ji["index"] = rec.index;
    ji["colors"] = rec.colors;
    ji["active_sets"] = rec.active_sets;
    ji["active_ways"] = rec.active_ways;
    ji["wall_start"] = rec.wall_start;
    ji["wall_end"] = rec.wall_end;
    ji["stats"] = stats_json(rec.stats);
    ji["energy"] = energy_json(rec.energy);
    ji["decision"] = rec.decision;
    ji["evaluated_configs"] = rec.evaluated_configs;
    ji["flush_writebacks"] = rec.flush_writebacks;
    json cores = json::array();
    for (const CoreIntervalStats& pc : rec.per_core)
      cores.push_back(json{{"instructions", pc.instructions},
                           {"accesses", pc.accesses},
                           {"hits", pc.hits},
                           {"misses", pc.misses},
                           {"load_misses", pc.load_misses},
                           {"writebacks", pc.writebacks},
                           {"compute_cycles", pc.compute_cycles},
                           {"overhead_cycles", pc.overhead_cycles},
                           {"clock_end", pc.clock_end}});
    ji["per_core"] = cores;
    intervals.push_back(std::move(ji));
  }
  j["intervals"] = intervals;
  j["totals"] = stats_json(r.totals);
  j["energy_totals"] = energy_json(r.energy_totals);
  j["makespan_cycles"] = r.makespan_cycles;
  json windows = json::array();
  for (const CoreWindow& w : r.core_windows)
    windows.push_back(json{{"instructions", w.instructions}, {"cycles", w.cycles}});
  j["core_windows"] = windows;
  j["active_ratio"] = r.active_ratio;
  j["wall_seconds"] = r.wall_seconds;
  return j.dump(2) + "\n";
}

RunReport report_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(e.what());
  }
  try {
    if (j.at("schema").get<std::string>() != "cachesim-report-v1")
      throw ConfigError("not a run report (unknown schema)");
    RunReport r;
    r.policy = j.at("policy").get<std::string>();
    r.fingerprint = j.at("fingerprint").get<std::string>();
    r.cores = j.at("cores").get<uint32_t>();
    r.trace_events = j.at("trace_events").get<uint64_t>();
    for (const json& ji : j.at("intervals")) {
      IntervalRecord rec;
      rec.index = ji.at("index").get<uint64_t>();
      rec.colors = ji.at("colors").get<std::vector<uint32_t>>();
      rec.active_sets = ji.at("active_sets").get<uint64_t>();
      rec.active_ways = ji.at("active_ways").get<uint32_t>();
      rec.wall_start = ji.at("wall_start").get<double>();
      rec.wall_end = ji.at("wall_end").get<double>();
      rec.stats = stats_from_json(ji.at("stats"));
      rec.energy = energy_from_json(ji.at("energy"));
      rec.decision = ji.at("decision").get<std::string>();
      rec.evaluated_configs = ji.at("evaluated_configs").get<uint64_t>();
      rec.flush_writebacks = ji.at("flush_writebacks").get<uint64_t>();
      for (const json& jc : ji.at("per_core")) {
        CoreIntervalStats pc;
        pc.instructions = jc.at("instructions").get<uint64_t>();
        pc.accesses = jc.at("accesses").get<uint64_t>();
        pc.hits = jc.at("hits").get<uint64_t>();
        pc.misses = jc.at("misses").get<uint64_t>();
        pc.load_misses = jc.at("load_misses").get<uint64_t>();
        pc.writebacks = jc.at("writebacks").get<uint64_t>();
        pc.compute_cycles = jc.at("compute_cycles").get<double>();
        pc.overhead_cycles = jc.at("overhead_cycles").get<double>();
        pc.clock_end = jc.at("clock_end").get<double>();
        rec.per_core.push_back(pc);
      }
      r.intervals.push_back(std::move(rec));
    }
    r.totals = stats_from_json(j.at("totals"));
    r.energy_totals = energy_from_json(j.at("energy_totals"));
    r.makespan_cycles = j.at("makespan_cycles").get<double>();
    for (const json& jw : j.at("core_windows")) {
      CoreWindow w;
      w.instructions = jw.at("instructions").get<uint64_t>();
      w.cycles = jw.at("cycles").get<double>();
      r.core_windows.push_back(w);
    }
    r.active_ratio = j.at("active_ratio").get<double>();
    r.wall_seconds = j.at("wall_seconds").get<double>();
    return r;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed run report: ") + e.what());
  }
}

void write_report_json(const RunReport& r, const std::string& path) {
  atomic_write(path, report_to_json(r));
}

RunReport read_report_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return report_from_json(buf.str());
}

std::string report_to_csv(const RunReport& r) {
  std::ostringstream out;
  out << "interval,wall_start,wall_end,cycles,instructions,l2_hits,l2_misses,"
         "load_misses,writebacks,flush_writebacks,rce_accesses,transitions,"
         "active_fraction,active_ways,shape,decision,evaluated_configs,"
         "le_l2,de_l2,e_dram,e_tran,e_algo,energy_total\n";
  for (const IntervalRecord& rec : r.intervals) {
    out << rec.index << ',' << format_number(rec.wall_start) << ','
        << format_number(rec.wall_end) << ',' << format_number(rec.stats.cycles) << ','
        << rec.stats.instructions << ',' << rec.stats.l2_hits << ','
        << rec.stats.l2_misses << ',' << rec.stats.load_misses << ','
        << rec.stats.writebacks << ',' << rec.flush_writebacks << ','
        << rec.stats.rce_accesses << ',' << rec.stats.transitions << ','
        << format_number(rec.stats.active_fraction) << ','
        << format_number(rec.stats.active_ways) << ',' << shape_of(rec) << ','
        << rec.decision << ',' << rec.evaluated_configs << ','
        << format_number(rec.energy.le_l2) << ',' << format_number(rec.energy.de_l2)
        << ',' << format_number(rec.energy.e_dram) << ','
        << format_number(rec.energy.e_tran) << ',' << format_number(rec.energy.e_algo)
        << ',' << format_number(rec.energy.total) << '\n';
  }
  out << "\nsummary,value\n";
  out << "policy," << r.policy << '\n';
  out << "fingerprint," << r.fingerprint << '\n';
  out << "cores," << r.cores << '\n';
  out << "trace_events," << r.trace_events << '\n';
  out << "intervals," << r.intervals.size() << '\n';
  out << "skip_intervals," << r.config.skip_intervals << '\n';
  out << "instructions," << r.totals.instructions << '\n';
  out << "cycles," << format_number(r.totals.cycles) << '\n';
  out << "l2_hits," << r.totals.l2_hits << '\n';
  out << "l2_misses," << r.totals.l2_misses << '\n';
  out << "load_misses," << r.totals.load_misses << '\n';
  out << "writebacks," << r.totals.writebacks << '\n';
  out << "rce_accesses," << r.totals.rce_accesses << '\n';
  out << "transitions," << r.totals.transitions << '\n';
  out << "active_ratio," << format_number(r.active_ratio) << '\n';
  out << "active_ways," << format_number(r.totals.active_ways) << '\n';
  out << "makespan_cycles," << format_number(r.makespan_cycles) << '\n';
  out << "le_l2," << format_number(r.energy_totals.le_l2) << '\n';
  out << "de_l2," << format_number(r.energy_totals.de_l2) << '\n';
  out << "e_dram," << format_number(r.energy_totals.e_dram) << '\n';
  out << "e_tran," << format_number(r.energy_totals.e_tran) << '\n';
  out << "e_algo," << format_number(r.energy_totals.e_algo) << '\n';
  out << "energy_total_j," << format_number(r.energy_totals.total) << '\n';
  for (size_t i = 0; i < r.core_windows.size(); ++i) {
    out << "core_" << i << "_instructions," << r.core_windows[i].instructions << '\n';
    out << "core_" << i << "_cycles," << format_number(r.core_windows[i].cycles) << '\n';
  }
  return out.str();
}

void write_report_csv(const RunReport& r, const std::string& path) {
  atomic_write(path, report_to_csv(r));
}

std::string comparison_to_json(const ComparisonRow& row) {
  json j;
  j["schema"] = "cachesim-compare-v1";
  j["base_policy"] = row.base_policy;
  j["tech_policy"] = row.tech_policy;
  j["fingerprint"] = row.fingerprint;
  j["metrics"] = json{{"pct_energy_saved", row.m.pct_energy_saved},
                      {"weighted_speedup", row.m.weighted_speedup},
                      {"fair_speedup", row.m.fair_speedup},
                      {"active_ratio", row.m.active_ratio},
                      {"apki_delta", row.m.apki_delta},
                      {"mpki_delta", row.m.mpki_delta},
                      {"pct_edp_saved", row.m.pct_edp_saved}};
  return j.dump(2) + "\n";
}

std::string comparison_table(const ComparisonRow& row) {
  std::ostringstream out;
  auto line = [&out](const char* name, const std::string& v) {
    out << name;
    for (size_t i = std::string(name).size(); i < 22; ++i) out << ' ';
    out << v << '\n';
  };
  out << row.tech_policy << " vs " << row.base_policy << " (trace " << row.fingerprint
      << ")\n";
  line("energy saved (%)", format_number(row.m.pct_energy_saved));
  line("weighted speedup", format_number(row.m.weighted_speedup));
  line("fair speedup", format_number(row.m.fair_speedup));
  line("active ratio", format_number(row.m.active_ratio));
  line("APKI delta", format_number(row.m.apki_delta));
  line("MPKI delta", format_number(row.m.mpki_delta));
  line("EDP saved (%)", format_number(row.m.pct_edp_saved));
  return out.str();
}

std::string sweep_csv(std::vector<ComparisonRow> rows) {
  std::sort(rows.begin(), rows.end(), [](const ComparisonRow& a, const ComparisonRow& b) {
    return a.tech_policy < b.tech_policy;
  });
  std::ostringstream out;
  out << "policy,pct_energy_saved,weighted_speedup,fair_speedup,active_ratio,"
         "apki_delta,mpki_delta,pct_edp_saved\n";
  for (const ComparisonRow& r : rows)
    out << r.tech_policy << ',' << format_number(r.m.pct_energy_saved) << ','
        << format_number(r.m.weighted_speedup) << ','
        << format_number(r.m.fair_speedup) << ',' << format_number(r.m.active_ratio)
        << ',' << format_number(r.m.apki_delta) << ',' << format_number(r.m.mpki_delta)
        << ',' << format_number(r.m.pct_edp_saved) << '\n';
  return out.str();
}

}  // namespace cachesim
