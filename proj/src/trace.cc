#include "cachesim/trace.hh"

#include <charconv>
#include <cinttypes>
#include <cstdio>

#include "cachesim/errors.hh"

namespace cachesim {

namespace {

uint64_t address_limit(uint32_t address_bits) {
  return address_bits >= 64 ? ~uint64_t(0) : (uint64_t(1) << address_bits) - 1;
}

uint64_t parse_u64(std::string_view s, int base, const char* what, uint64_t line) {
  uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v, base);
  if (ec != std::errc{} || p != s.data() + s.size())
    throw ParseError(std::string("bad ") + what + ": '" + std::string(s) + "'", line);
  return v;
}

double parse_f64(std::string_view s, const char* what, uint64_t line) {
  double v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size())
    throw ParseError(std::string("bad ") + what + ": '" + std::string(s) + "'", line);
  return v;
}

}  // namespace

void validate(const TraceHeader& h) {
  if (h.version != 1) throw ParseError("unsupported trace version " + std::to_string(h.version));
  if (h.cores < 1) throw ParseError("trace needs at least one core");
  if (h.address_bits < 1 || h.address_bits > 64) throw ParseError("address_bits out of range");
  if (h.page_bytes < 1) throw ParseError("page_bytes must be positive");
  if (h.core.size() != h.cores) throw ParseError("per-core timing entries do not match cores");
  for (const CoreTiming& t : h.core) {
    if (!(t.base_cpi > 0)) throw ParseError("base_cpi must be positive");
    if (!(t.miss_penalty >= 0)) throw ParseError("miss_penalty must be non-negative");
    if (!(t.overlap > 0 && t.overlap <= 1)) throw ParseError("overlap must lie in (0,1]");
  }
}

TraceReader::TraceReader(const std::string& path) : path_(path) {
  in_.open(path);
  if (!in_) throw ConfigError("cannot open trace file: " + path);
  parse_header();
}

void TraceReader::parse_header() {
  bool have_version = false, have_cores = false, have_bits = false, have_page = false,
       have_fp = false;
  std::vector<uint8_t> have_core_field;  // 3 bits per core
  auto peek_header = [&]() {
    return in_.peek() == '#';
  };
  while (peek_header()) {
    if (!std::getline(in_, buf_)) break;
    ++line_;
    if (buf_.size() < 2 || buf_[0] != '#' || buf_[1] != ' ')
      throw ParseError("header line must start with '# '", line_);
    std::string_view kv(buf_.data() + 2, buf_.size() - 2);
    size_t eq = kv.find('=');
    if (eq == std::string_view::npos) throw ParseError("header line missing '='", line_);
    std::string_view key = kv.substr(0, eq), val = kv.substr(eq + 1);
    if (key == "version") {
      header_.version = uint32_t(parse_u64(val, 10, "version", line_));
      if (header_.version != 1)
        throw ParseError("unsupported trace version " + std::string(val), line_);
      have_version = true;
    } else if (key == "cores") {
      header_.cores = uint32_t(parse_u64(val, 10, "cores", line_));
      if (header_.cores < 1 || header_.cores > 1024) throw ParseError("bad core count", line_);
      header_.core.assign(header_.cores, CoreTiming{});
      have_core_field.assign(header_.cores, 0);
      have_cores = true;
    } else if (key == "address_bits") {
      header_.address_bits = uint32_t(parse_u64(val, 10, "address_bits", line_));
      have_bits = true;
    } else if (key == "page_bytes") {
      header_.page_bytes = parse_u64(val, 10, "page_bytes", line_);
      have_page = true;
    } else if (key == "fingerprint") {
      header_.fingerprint = std::string(val);
      have_fp = true;
    } else if (key.substr(0, 5) == "core.") {
      if (!have_cores) throw ParseError("core.* key before cores", line_);
      std::string_view rest = key.substr(5);
      size_t dot = rest.find('.');
      if (dot == std::string_view::npos) throw ParseError("malformed core.* key", line_);
      uint64_t n = parse_u64(rest.substr(0, dot), 10, "core index", line_);
      if (n >= header_.cores) throw ParseError("core index out of range", line_);
      std::string_view field = rest.substr(dot + 1);
      if (field == "base_cpi") {
        header_.core[n].base_cpi = parse_f64(val, "base_cpi", line_);
        have_core_field[n] |= 1;
      } else if (field == "miss_penalty") {
        header_.core[n].miss_penalty = parse_f64(val, "miss_penalty", line_);
        have_core_field[n] |= 2;
      } else if (field == "overlap") {
        header_.core[n].overlap = parse_f64(val, "overlap", line_);
        have_core_field[n] |= 4;
      } else {
        throw ParseError("unknown header key: " + std::string(key), line_);
      }
    } else {
      throw ParseError("unknown header key: " + std::string(key), line_);
    }
  }
  if (!have_version) throw ParseError("missing header key: version", line_);
  if (!have_cores) throw ParseError("missing header key: cores", line_);
  if (!have_bits) throw ParseError("missing header key: address_bits", line_);
  if (!have_page) throw ParseError("missing header key: page_bytes", line_);
  if (!have_fp) throw ParseError("missing header key: fingerprint", line_);
  for (uint32_t n = 0; n < header_.cores; ++n)
    if (have_core_field[n] != 7)
      throw ParseError("missing core." + std::to_string(n) + " timing keys", line_);
  validate(header_);
}

bool TraceReader::next(TraceEvent& ev) {
  if (!std::getline(in_, buf_)) {
    if (in_.bad()) throw ParseError("I/O error reading " + path_, line_);
    return false;
  }
  ++line_;
  if (!buf_.empty() && buf_[0] == '#')
    throw ParseError("header line after events", line_);
  std::string_view s(buf_);
  size_t a = s.find(' ');
  size_t b = a == std::string_view::npos ? a : s.find(' ', a + 1);
  size_t c = b == std::string_view::npos ? b : s.find(' ', b + 1);
  if (c == std::string_view::npos || s.find(' ', c + 1) != std::string_view::npos)
    throw ParseError("event line needs exactly 4 space-separated fields", line_);
  ev.core = uint32_t(parse_u64(s.substr(0, a), 10, "core id", line_));
  if (ev.core >= header_.cores) throw ParseError("core id out of range", line_);
  ev.block_address = parse_u64(s.substr(a + 1, b - a - 1), 16, "block address", line_);
  if (ev.block_address > address_limit(header_.address_bits))
    throw ParseError("block address exceeds address_bits", line_);
  std::string_view kind = s.substr(b + 1, c - b - 1);
  if (kind == "L")
    ev.kind = AccessKind::Load;
  else if (kind == "S")
    ev.kind = AccessKind::Store;
  else
    throw ParseError("access kind must be L or S, got '" + std::string(kind) + "'", line_);
  ev.instr_delta = parse_u64(s.substr(c + 1), 10, "instr_delta", line_);
  if (ev.instr_delta < 1) throw ParseError("instr_delta must be at least 1", line_);
  return true;
}

TraceWriter::TraceWriter(const std::string& path, const TraceHeader& h)
    : path_(path), cores_(h.cores), address_bits_(h.address_bits) {
  validate(h);
  out_.open(path, std::ios::trunc);
  if (!out_) throw ConfigError("cannot open trace file for writing: " + path);
  char num[64];
  out_ << "# version=" << h.version << '\n';
  out_ << "# cores=" << h.cores << '\n';
  out_ << "# address_bits=" << h.address_bits << '\n';
  out_ << "# page_bytes=" << h.page_bytes << '\n';
  for (uint32_t n = 0; n < h.cores; ++n) {
    std::snprintf(num, sizeof num, "%.17g", h.core[n].base_cpi);
    out_ << "# core." << n << ".base_cpi=" << num << '\n';
    std::snprintf(num, sizeof num, "%.17g", h.core[n].miss_penalty);
    out_ << "# core." << n << ".miss_penalty=" << num << '\n';
    std::snprintf(num, sizeof num, "%.17g", h.core[n].overlap);
    out_ << "# core." << n << ".overlap=" << num << '\n';
  }
  out_ << "# fingerprint=" << h.fingerprint << '\n';
}

void TraceWriter::append(const TraceEvent& ev) {
  CS_CHECK(ev.core < cores_, "event core out of range");
  CS_CHECK(ev.block_address <= address_limit(address_bits_), "event address out of range");
  CS_CHECK(ev.instr_delta >= 1, "instr_delta must be at least 1");
  char buf[96];
  int n = std::snprintf(buf, sizeof buf, "%u %" PRIx64 " %c %" PRIu64 "\n", ev.core,
                        ev.block_address, ev.kind == AccessKind::Load ? 'L' : 'S',
                        ev.instr_delta);
  out_.write(buf, n);
}

void TraceWriter::close() {
  out_.flush();
  if (!out_) throw ConfigError("I/O error writing trace: " + path_);
  out_.close();
}

void write_trace(const std::string& path, const TraceHeader& h,
                 const std::vector<TraceEvent>& events) {
  TraceWriter w(path, h);
  for (const TraceEvent& ev : events) w.append(ev);
  w.close();
}

std::vector<TraceEvent> read_all(const std::string& path, TraceHeader* header) {
  TraceReader r(path);
  if (header) *header = r.header();
  std::vector<TraceEvent> evs;
  TraceEvent ev;
  while (r.next(ev)) evs.push_back(ev);
  return evs;
}

}  // namespace cachesim
