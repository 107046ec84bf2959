// Command-line front end: trace generation, single simulation runs, report
// comparison, multi-policy sweeps, and the closed-form sizing formulas.
//
// Exit codes: 0 success, 2 usage or configuration error, 1 runtime failure.

#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "cachesim/coloring.hh"
#include "cachesim/config.hh"
#include "cachesim/energy.hh"
#include "cachesim/errors.hh"
#include "cachesim/harness.hh"
#include "cachesim/profiler.hh"
#include "cachesim/report.hh"
#include "cachesim/synth.hh"
#include "cachesim/trace.hh"

namespace {

using namespace cachesim;

// ---------------------------------------------------------------------------
// gen-trace
// ---------------------------------------------------------------------------

void cmd_gen_trace(const std::string& spec_path, uint64_t seed,
                   const std::string& out_path) {
  SyntheticSpec spec = load_synth_spec(spec_path);
  std::vector<TraceEvent> events = generate(spec, seed);
  TraceHeader header = synth_header(spec, seed);

  namespace fs = std::filesystem;
  fs::path target(out_path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  fs::path tmp = target;
  tmp += ".tmp";
  write_trace(tmp.string(), header, events);
  fs::rename(tmp, target);
}

// ---------------------------------------------------------------------------
// run
// ---------------------------------------------------------------------------

ScenarioConfig load_run_config(const std::string& config_path,
                               const std::string& trace_path,
                               const std::string& policy_override) {
  ScenarioConfig c = load_scenario(config_path);
  TraceReader reader(trace_path);
  finalize_scenario(c, reader.header());
  if (!policy_override.empty()) {
    c.policy = policy_from_name(policy_override);
    validate(c);
  }
  return c;
}

void cmd_run(const std::string& config_path, const std::string& trace_path,
             const std::string& policy_override, const std::string& out_path,
             const std::string& format) {
  ScenarioConfig c = load_run_config(config_path, trace_path, policy_override);
  RunReport report = run(c, trace_path);
  if (format == "csv")
    write_report_csv(report, out_path);
  else
    write_report_json(report, out_path);
}

// ---------------------------------------------------------------------------
// compare
// ---------------------------------------------------------------------------

void cmd_compare(const std::string& base_path, const std::string& tech_path,
                 const std::string& out_path) {
  RunReport base = read_report_json(base_path);
  RunReport tech = read_report_json(tech_path);
  if (base.fingerprint != tech.fingerprint)
    throw ConfigError("reports come from different traces: '" + base.fingerprint +
                      "' vs '" + tech.fingerprint + "'");
  if (base.cores != tech.cores)
    throw ConfigError("reports disagree on core count");
  ComparisonRow row{base.policy, tech.policy, tech.fingerprint,
                    compare(base, tech)};
  atomic_write(out_path, comparison_to_json(row));
  std::cout << comparison_table(row);
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

unsigned thread_cap() {
  unsigned cap = std::thread::hardware_concurrency();
  if (cap == 0) cap = 1;
  if (const char* env = std::getenv("CACHESIM_THREADS")) {
    char* end = nullptr;
    unsigned long v = std::strtoul(env, &end, 10);
    if (end == env || *end != '\0' || v == 0)
      throw ConfigError("CACHESIM_THREADS must be a positive integer");
    cap = static_cast<unsigned>(v);
  }
  return cap;
}

void cmd_sweep(const std::string& config_path, const std::string& trace_path,
               const std::string& policies_arg, const std::string& out_dir) {
  // Reject bad input before any simulation starts.
  std::vector<PolicyKind> policies;
  {
    std::stringstream ss(policies_arg);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (item.empty()) throw ConfigError("empty entry in --policies list");
      PolicyKind k = policy_from_name(item);
      for (PolicyKind seen : policies)
        if (seen == k) throw ConfigError("duplicate policy in --policies: " + item);
      policies.push_back(k);
    }
    if (policies.empty()) throw ConfigError("--policies list is empty");
  }

  ScenarioConfig base_config = load_run_config(config_path, trace_path, "");
  base_config.policy = PolicyKind::None;
  std::vector<ScenarioConfig> tech_configs;
  for (PolicyKind k : policies) {
    ScenarioConfig c = base_config;
    c.policy = k;
    validate(c);
    tech_configs.push_back(std::move(c));
  }

  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  auto report_path = [&out_dir](const std::string& name) {
    return (fs::path(out_dir) / (name + ".json")).string();
  };

  // The reference run comes first: it exercises the trace/config pairing, so
  // incompatibilities surface as a configuration error before any fan-out.
  RunReport baseline = run(base_config, trace_path);
  write_report_json(baseline, report_path("baseline"));

  // Technique runs are independent; fan out, capped by CACHESIM_THREADS.
  std::vector<RunReport> reports(tech_configs.size());
  std::vector<std::string> errors(tech_configs.size());
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      size_t i = next.fetch_add(1);
      if (i >= tech_configs.size()) return;
      try {
        reports[i] = run(tech_configs[i], trace_path);
        write_report_json(reports[i], report_path(policy_name(policies[i])));
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  size_t n_threads = std::min<size_t>(thread_cap(), tech_configs.size());
  std::vector<std::thread> pool;
  for (size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();

  bool failed = false;
  for (size_t i = 0; i < errors.size(); ++i)
    if (!errors[i].empty()) {
      std::cerr << "error: policy " << policy_name(policies[i]) << ": "
                << errors[i] << "\n";
      failed = true;
    }
  if (failed)
    throw std::runtime_error("one or more sweep runs failed; completed reports kept");

  std::vector<ComparisonRow> rows;
  for (const RunReport& tech : reports)
    rows.push_back({baseline.policy, tech.policy, tech.fingerprint,
                    compare(baseline, tech)});
  atomic_write((fs::path(out_dir) / "combined.csv").string(), sweep_csv(rows));
}

// ---------------------------------------------------------------------------
// formulas
// ---------------------------------------------------------------------------

struct PresetReference {
  uint64_t size_bytes;
  uint32_t cores;  // core count the preset's profiler numbers were sized for
};

PresetReference preset_reference(const std::string& preset) {
  if (preset == "cacti32nm-4mb") return {4ull << 20, 2};
  if (preset == "cacti32nm-8mb") return {8ull << 20, 4};
  if (preset == "cacti45nm-2mb") return {2ull << 20, 1};
  std::string known;
  for (const std::string& n : energy_preset_names())
    known += (known.empty() ? "" : ", ") + n;
  throw ConfigError("unknown preset '" + preset + "' (known: " + known + ")");
}

void cmd_formulas(const std::string& preset, uint32_t cores_flag) {
  PresetReference ref = preset_reference(preset);
  uint32_t cores = cores_flag ? cores_flag : ref.cores;
  EnergyParams params = energy_preset(preset, cores);
  CacheGeometry g = derive_geometry(ref.size_bytes, 8, 64, 4096);
  uint32_t M = static_cast<uint32_t>(g.size_bytes / (uint64_t(g.page_bytes) * g.assoc));
  constexpr uint64_t kSampling = 64;
  RceSize profiler = rce_size(g, cores, kSampling, master_points(M), g.tag_bits);

  auto row = [](const char* name, const std::string& value) {
    std::cout << name;
    for (size_t i = std::string(name).size(); i < 26; ++i) std::cout << ' ';
    std::cout << value << '\n';
  };
  row("preset", preset);
  row("cores", std::to_string(cores));
  row("cache", std::to_string(g.size_bytes) + " B, " + std::to_string(g.assoc) +
                   "-way, " + std::to_string(g.block_bytes) + " B blocks, " +
                   std::to_string(g.page_bytes) + " B pages");
  row("sets", std::to_string(g.sets));
  row("colors (M)", std::to_string(M));
  row("profiler sampling", "1/" + std::to_string(kSampling) + " sets");
  row("profiler sets", std::to_string(profiler.total_sets));
  row("profiler size (% of L2)", format_number(profiler.fraction_of_l2_pct));
  row("mapping tables (bits)", std::to_string(mapping_table_bits(cores, M)));
  row("decay interval (cycles)", format_number(decay_interval_cycles(params, g)));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trace-driven multicore last-level-cache simulator"};
  app.require_subcommand(1);

  std::string spec_path, out_path, config_path, trace_path, policy_arg;
  std::string base_path, tech_path, policies_arg, preset_arg;
  std::string format = "json";
  uint64_t seed = 0;
  uint32_t cores_flag = 0;

  CLI::App* gen = app.add_subcommand("gen-trace", "Generate a synthetic trace");
  gen->add_option("--spec", spec_path, "Workload spec file")->required();
  gen->add_option("--seed", seed, "Generator seed");
  gen->add_option("--out", out_path, "Trace file to write")->required();

  CLI::App* runc = app.add_subcommand("run", "Simulate one policy on a trace");
  runc->add_option("--config", config_path, "Scenario config file")->required();
  runc->add_option("--trace", trace_path, "Input trace")->required();
  runc->add_option("--policy", policy_arg, "Override the config's policy");
  runc->add_option("--out", out_path, "Report file to write")->required();
  runc->add_option("--format", format, "Report format")
      ->check(CLI::IsMember({"json", "csv"}));

  CLI::App* cmp = app.add_subcommand("compare", "Compare two run reports");
  cmp->add_option("--base", base_path, "Baseline report (JSON)")->required();
  cmp->add_option("--tech", tech_path, "Technique report (JSON)")->required();
  cmp->add_option("--out", out_path, "Comparison summary to write")->required();

  CLI::App* sweep = app.add_subcommand("sweep", "Run several policies plus baseline");
  sweep->add_option("--config", config_path, "Scenario config file")->required();
  sweep->add_option("--trace", trace_path, "Input trace")->required();
  sweep->add_option("--policies", policies_arg, "Comma-separated policy names")
      ->required();
  sweep->add_option("--out", out_path, "Output directory")->required();

  CLI::App* formulas = app.add_subcommand(
      "formulas", "Print the sizing arithmetic for a named preset");
  formulas->add_option("--preset", preset_arg, "Energy parameter preset")->required();
  formulas->add_option("--cores", cores_flag,
                       "Core count (default: the preset's reference count)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;  // help/version exit 0; usage errors exit 2
  }

  try {
    if (gen->parsed())
      cmd_gen_trace(spec_path, seed, out_path);
    else if (runc->parsed())
      cmd_run(config_path, trace_path, policy_arg, out_path, format);
    else if (cmp->parsed())
      cmd_compare(base_path, tech_path, out_path);
    else if (sweep->parsed())
      cmd_sweep(config_path, trace_path, policies_arg, out_path);
    else if (formulas->parsed())
      cmd_formulas(preset_arg, cores_flag);
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
