#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cachesim/trace.hh"

namespace cachesim {

// One access pattern phase for one core.
struct Phase {
  enum class Pattern { Loop, Stream, Random };
  Pattern pattern = Pattern::Loop;
  // Loop: working-set size; Stream: stride between consecutive accesses;
  // Random: footprint size. All in blocks.
  uint64_t blocks = 1;
  double store_fraction = 0.0;          // [0,1]
  double events_per_kilo_instr = 50.0;  // (0, 1000]
  uint64_t events = 0;                  // phase duration
};

struct SyntheticCore {
  std::vector<Phase> phases;
  CoreTiming timing;
};

struct SyntheticSpec {
  uint32_t cores = 1;
  uint32_t address_bits = 45;
  uint64_t page_bytes = 4096;
  uint64_t block_bytes = 64;
  std::vector<SyntheticCore> core;  // one entry per core
};

void validate(const SyntheticSpec& spec);

// Stable identity of (spec, seed), recorded in the trace header.
std::string synth_fingerprint(const SyntheticSpec& spec, uint64_t seed);
TraceHeader synth_header(const SyntheticSpec& spec, uint64_t seed);

// Deterministic generation: the same (spec, seed) yields a byte-identical
// trace. Every (core, phase) pair works in its own address subspace with
// seeded page placement; cores are interleaved proportionally to their total
// event counts.
std::vector<TraceEvent> generate(const SyntheticSpec& spec, uint64_t seed);

}  // namespace cachesim
