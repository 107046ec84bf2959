#pragma once

#include <cstdint>
#include <string>

#include "cachesim/harness.hh"
#include "cachesim/synth.hh"
#include "cachesim/trace.hh"

namespace cachesim {

// Integer with an optional binary suffix K/M/G (powers of 1024), used for
// byte sizes. Throws ConfigError on malformed input.
uint64_t parse_size(const std::string& text);

// Integer with an optional decimal suffix k/m/g (powers of 1000), used for
// event, cycle, and instruction counts.
uint64_t parse_count(const std::string& text);

// Scenario files drive `run` and `sweep`. Two syntaxes parse to the same
// model and may be mixed freely across files:
//
//   Structured text                        JSON
//   ---------------                        ----
//   [geometry]                             {"geometry": {"size": "4M", ...},
//   size = 4M                               "energy": {"preset": "..."},
//   assoc = 8                               "run": {"policy": "master"},
//   [energy]                                "interval": {...},
//   preset = cacti32nm-4mb                  "overheads": {...},
//   [run]                                   "policy": {...}}
//   policy = master
//   ...
//
// Sections: [geometry] size/assoc/block/page/address_bits; [energy] preset
// or explicit parameter fields (mutually exclusive); [run] policy/sampling/
// seed/baseline/repl/skip_intervals; [interval] mode/count/poll_cycles;
// [overheads] algo_curve/algo_decay/algo_way/reconfig; [policy] the knobs of
// the selected policy. Unknown keys are rejected.
ScenarioConfig parse_scenario(const std::string& text);
ScenarioConfig load_scenario(const std::string& path);

// Resolves a named energy preset against the trace's core count. Call once
// the trace header is known; a no-op when the config gave explicit numbers.
void finalize_scenario(ScenarioConfig& c, const TraceHeader& header);

// Workload files drive `gen-trace`:
//
//   [trace]            cores/address_bits/page/block
//   [core.0]           base_cpi/miss_penalty/overlap
//   [core.0.phase.0]   pattern/blocks/store_fraction/events_per_kilo_instr/events
//
// or JSON {"trace": {...}, "core": [{"base_cpi": .., "phase": [{...}]}]}.
SyntheticSpec parse_synth_spec(const std::string& text);
SyntheticSpec load_synth_spec(const std::string& path);

}  // namespace cachesim
