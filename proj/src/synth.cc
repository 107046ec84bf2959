#include "cachesim/synth.hh"

#include <cmath>
#include <random>
#include <unordered_set>

#include "cachesim/errors.hh"
#include "cachesim/geometry.hh"

namespace cachesim {

namespace {

constexpr uint32_t kSubspaceIdBits = 16;
constexpr uint32_t kMaxPhases = 64;

uint64_t splitmix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

uint64_t fnv1a(const std::string& s) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

const char* pattern_name(Phase::Pattern p) {
  switch (p) {
    case Phase::Pattern::Loop: return "loop";
    case Phase::Pattern::Stream: return "stream";
    default: return "random";
  }
}

// Per-(core,phase) address subspace: the top kSubspaceIdBits hold a nonzero
// id, so different phases can never touch each other's blocks.
uint64_t subspace_base(const SyntheticSpec& spec, uint32_t core, uint32_t phase) {
  uint32_t shift = spec.address_bits - kSubspaceIdBits;
  return (uint64_t(core) * kMaxPhases + phase + 1) << shift;
}

uint64_t subspace_blocks(const SyntheticSpec& spec) {
  return uint64_t(1) << (spec.address_bits - kSubspaceIdBits);
}

// Seeded distinct-page placement: the phase's blocks are spread over randomly
// chosen pages of its subspace instead of being contiguous.
std::vector<uint64_t> place_blocks(const SyntheticSpec& spec, uint32_t core, uint32_t phase,
                                   uint64_t n_blocks, uint64_t seed) {
  uint64_t bpp = spec.page_bytes / spec.block_bytes;
  uint64_t pages_in_subspace = subspace_blocks(spec) / bpp;
  uint64_t n_pages = (n_blocks + bpp - 1) / bpp;
  std::mt19937_64 rng(splitmix64(seed ^ splitmix64(uint64_t(core) << 20 | phase)));
  std::unordered_set<uint64_t> taken;
  std::vector<uint64_t> pages;
  pages.reserve(n_pages);
  while (pages.size() < n_pages) {
    uint64_t p = rng() % pages_in_subspace;
    if (taken.insert(p).second) pages.push_back(p);
  }
  std::vector<uint64_t> blocks;
  blocks.reserve(n_blocks);
  uint64_t base = subspace_base(spec, core, phase);
  for (uint64_t p : pages)
    for (uint64_t j = 0; j < bpp && blocks.size() < n_blocks; ++j)
      blocks.push_back(base + p * bpp + j);
  return blocks;
}

// Walks one core's phases in order, producing its private event stream.
class CoreStream {
 public:
  CoreStream(const SyntheticSpec& spec, uint32_t core, uint64_t seed)
      : spec_(spec), core_(core), seed_(seed) {
    total_ = 0;
    for (const Phase& ph : spec.core[core].phases) total_ += ph.events;
  }

  uint64_t total() const { return total_; }

  TraceEvent next() {
    const Phase& ph = spec_.core[core_].phases[phase_];
    if (k_ == 0) begin_phase(ph);
    TraceEvent ev;
    ev.core = core_;
    ev.kind = draw_store(ph) ? AccessKind::Store : AccessKind::Load;
    ev.block_address = draw_address(ph);
    double mu = 1000.0 / ph.events_per_kilo_instr;
    ev.instr_delta =
        uint64_t(std::llround(double(k_ + 1) * mu) - std::llround(double(k_) * mu));
    if (++k_ == ph.events) {
      k_ = 0;
      ++phase_;
    }
    return ev;
  }

 private:
  void begin_phase(const Phase& ph) {
    rng_.seed(splitmix64(seed_ ^ splitmix64((uint64_t(core_) << 32) | (phase_ * 2 + 1))));
    if (ph.pattern == Phase::Pattern::Stream) {
      uint64_t bpp = spec_.page_bytes / spec_.block_bytes;
      uint64_t span = ph.events * ph.blocks;  // stride walk footprint
      uint64_t room = subspace_blocks(spec_) - span;
      stream_next_ = subspace_base(spec_, core_, phase_) + (rng_() % (room / bpp + 1)) * bpp;
      pos_ = 0;
    } else {
      blocks_ = place_blocks(spec_, core_, phase_, ph.blocks, seed_);
      pos_ = 0;
    }
  }

  bool draw_store(const Phase& ph) {
    if (ph.store_fraction <= 0) return false;
    double u = double(rng_() >> 11) * (1.0 / 9007199254740992.0);
    return u < ph.store_fraction;
  }

  uint64_t draw_address(const Phase& ph) {
    switch (ph.pattern) {
      case Phase::Pattern::Loop: {
        uint64_t a = blocks_[pos_];
        pos_ = (pos_ + 1) % blocks_.size();
        return a;
      }
      case Phase::Pattern::Stream: {
        uint64_t a = stream_next_;
        stream_next_ += ph.blocks;
        return a;
      }
      default:
        return blocks_[rng_() % blocks_.size()];
    }
  }

  const SyntheticSpec& spec_;
  uint32_t core_;
  uint64_t seed_;
  uint64_t total_;
  uint32_t phase_ = 0;
  uint64_t k_ = 0;
  uint64_t pos_ = 0;
  uint64_t stream_next_ = 0;
  std::vector<uint64_t> blocks_;
  std::mt19937_64 rng_;
};

}  // namespace

void validate(const SyntheticSpec& spec) {
  if (spec.cores < 1) throw ConfigError("workload needs at least one core");
  if (spec.core.size() != spec.cores)
    throw ConfigError("per-core phase lists do not match core count");
  if (spec.address_bits < 24 || spec.address_bits > 64)
    throw ConfigError("address_bits must lie in [24,64]");
  if (spec.block_bytes < 1 || spec.page_bytes < spec.block_bytes ||
      spec.page_bytes % spec.block_bytes != 0)
    throw ConfigError("page_bytes must be a positive multiple of block_bytes");
  uint64_t capacity = uint64_t(1) << (spec.address_bits - kSubspaceIdBits);
  for (uint32_t c = 0; c < spec.cores; ++c) {
    const auto& phases = spec.core[c].phases;
    if (phases.empty()) throw ConfigError("every core needs at least one phase");
    if (phases.size() > kMaxPhases)
      throw ConfigError("at most " + std::to_string(kMaxPhases) + " phases per core");
    for (const Phase& ph : phases) {
      if (ph.events < 1) throw ConfigError("phase duration must be at least one event");
      if (ph.blocks < 1) throw ConfigError("phase needs at least one block");
      if (!(ph.store_fraction >= 0 && ph.store_fraction <= 1))
        throw ConfigError("store_fraction must lie in [0,1]");
      if (!(ph.events_per_kilo_instr > 0 && ph.events_per_kilo_instr <= 1000))
        throw ConfigError("events_per_kilo_instr must lie in (0,1000]");
      uint64_t span = ph.pattern == Phase::Pattern::Stream ? ph.events * ph.blocks : ph.blocks;
      if (span > capacity / 2)
        throw ConfigError("phase footprint exceeds its address subspace");
    }
    const CoreTiming& t = spec.core[c].timing;
    if (!(t.base_cpi > 0)) throw ConfigError("base_cpi must be positive");
    if (!(t.miss_penalty >= 0)) throw ConfigError("miss_penalty must be non-negative");
    if (!(t.overlap > 0 && t.overlap <= 1)) throw ConfigError("overlap must lie in (0,1]");
  }
  if (uint64_t(spec.cores) * kMaxPhases + kMaxPhases >= (uint64_t(1) << kSubspaceIdBits))
    throw ConfigError("too many cores for the subspace id width");
}

std::string synth_fingerprint(const SyntheticSpec& spec, uint64_t seed) {
  std::string s = "synthv1;cores=" + std::to_string(spec.cores) +
                  ";bits=" + std::to_string(spec.address_bits) +
                  ";page=" + std::to_string(spec.page_bytes) +
                  ";block=" + std::to_string(spec.block_bytes);
  char num[128];
  for (uint32_t c = 0; c < spec.cores; ++c) {
    const SyntheticCore& sc = spec.core[c];
    std::snprintf(num, sizeof num, ";t%u=%.17g,%.17g,%.17g", c, sc.timing.base_cpi,
                  sc.timing.miss_penalty, sc.timing.overlap);
    s += num;
    for (const Phase& ph : sc.phases) {
      std::snprintf(num, sizeof num, ",%.17g,%.17g,", ph.store_fraction,
                    ph.events_per_kilo_instr);
      s += ";p" + std::to_string(c) + "=" + pattern_name(ph.pattern) + "," +
           std::to_string(ph.blocks) + num + std::to_string(ph.events);
    }
  }
  s += ";seed=" + std::to_string(seed);
  char out[32];
  std::snprintf(out, sizeof out, "%016llx", (unsigned long long)fnv1a(s));
  return out;
}

TraceHeader synth_header(const SyntheticSpec& spec, uint64_t seed) {
  validate(spec);
  TraceHeader h;
  h.version = 1;
  h.cores = spec.cores;
  h.address_bits = spec.address_bits;
  h.page_bytes = spec.page_bytes;
  for (uint32_t c = 0; c < spec.cores; ++c) h.core.push_back(spec.core[c].timing);
  h.fingerprint = synth_fingerprint(spec, seed);
  return h;
}

std::vector<TraceEvent> generate(const SyntheticSpec& spec, uint64_t seed) {
  validate(spec);
  std::vector<CoreStream> streams;
  streams.reserve(spec.cores);
  uint64_t grand_total = 0;
  for (uint32_t c = 0; c < spec.cores; ++c) {
    streams.emplace_back(spec, c, seed);
    grand_total += streams.back().total();
  }
  std::vector<uint64_t> emitted(spec.cores, 0);
  std::vector<TraceEvent> out;
  out.reserve(grand_total);
  // proportional interleave: always advance the core whose (emitted+1)/total
  // is smallest, ties to the lowest id
  for (uint64_t i = 0; i < grand_total; ++i) {
    uint32_t pick = spec.cores;
    for (uint32_t c = 0; c < spec.cores; ++c) {
      if (emitted[c] == streams[c].total()) continue;
      if (pick == spec.cores) {
        pick = c;
        continue;
      }
      // (emitted[c]+1)/total[c] < (emitted[pick]+1)/total[pick] ?
      unsigned __int128 lhs =
          (unsigned __int128)(emitted[c] + 1) * streams[pick].total();
      unsigned __int128 rhs =
          (unsigned __int128)(emitted[pick] + 1) * streams[c].total();
      if (lhs < rhs) pick = c;
    }
    CS_CHECK(pick < spec.cores, "interleave ran out of events");
    out.push_back(streams[pick].next());
    ++emitted[pick];
  }
  return out;
}

}  // namespace cachesim
