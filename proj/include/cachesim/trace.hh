#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "cachesim/cache.hh"

namespace cachesim {

// Per-core analytic timing parameters carried in the trace header.
struct CoreTiming {
  double base_cpi = 1.0;
  double miss_penalty = 200.0;  // cycles per load miss
  double overlap = 1.0;         // fraction of the penalty actually stalled, (0,1]
};

struct TraceHeader {
  uint32_t version = 1;
  uint32_t cores = 1;
  uint32_t address_bits = 45;
  uint64_t page_bytes = 4096;
  std::vector<CoreTiming> core;  // one entry per core
  std::string fingerprint;       // generator identity (spec hash + seed)
};

// One post-L1 access: block-aligned address plus the instructions this core
// retired since its previous event.
struct TraceEvent {
  uint32_t core = 0;
  uint64_t block_address = 0;
  AccessKind kind = AccessKind::Load;
  uint64_t instr_delta = 1;

  bool operator==(const TraceEvent&) const = default;
};

void validate(const TraceHeader& h);

// Line-oriented text format. Header lines: `# key=value` with keys exactly
// {version, cores, address_bits, page_bytes, core.<n>.base_cpi,
// core.<n>.miss_penalty, core.<n>.overlap, fingerprint}. Event lines:
// `<core> <hex block_address> <L|S> <instr_delta>`.
class TraceReader {
 public:
  explicit TraceReader(const std::string& path);

  const TraceHeader& header() const { return header_; }
  // Returns false at clean end of file; throws ParseError on malformed input.
  bool next(TraceEvent& ev);
  uint64_t line() const { return line_; }

 private:
  void parse_header();

  std::ifstream in_;
  std::string path_;
  TraceHeader header_;
  uint64_t line_ = 0;
  std::string buf_;
};

class TraceWriter {
 public:
  TraceWriter(const std::string& path, const TraceHeader& h);
  void append(const TraceEvent& ev);
  void close();

 private:
  std::ofstream out_;
  std::string path_;
  uint32_t cores_;
  uint32_t address_bits_;
};

void write_trace(const std::string& path, const TraceHeader& h,
                 const std::vector<TraceEvent>& events);
std::vector<TraceEvent> read_all(const std::string& path, TraceHeader* header = nullptr);

}  // namespace cachesim
