#include "cachesim/config.hh"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "cachesim/errors.hh"

namespace cachesim {
namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

uint64_t parse_suffixed(const std::string& text, uint64_t kilo, const char* what) {
  std::string t = trim(text);
  uint64_t mult = 1;
  if (!t.empty() && std::isalpha(static_cast<unsigned char>(t.back()))) {
    switch (std::tolower(static_cast<unsigned char>(t.back()))) {
      case 'k': mult = kilo; break;
      case 'm': mult = kilo * kilo; break;
      case 'g': mult = kilo * kilo * kilo; break;
      default: throw ConfigError(std::string("bad ") + what + " suffix in '" + text + "'");
    }
    t.pop_back();
    t = trim(t);
  }
  if (t.empty() || !std::all_of(t.begin(), t.end(), [](unsigned char c) {
        return std::isdigit(c);
      }))
    throw ConfigError(std::string("malformed ") + what + " '" + text + "'");
  uint64_t v = 0;
  try {
    v = std::stoull(t);
  } catch (const std::exception&) {
    throw ConfigError(std::string("malformed ") + what + " '" + text + "'");
  }
  return v * mult;
}

// One key = value under a [section], with its source line for error messages.
struct Entry {
  std::string section;
  std::string key;
  std::string value;
  long line = 0;
};

std::vector<Entry> parse_structured_text(const std::string& text) {
  std::vector<Entry> out;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  long line = 0;
  while (std::getline(in, raw)) {
    line++;
    size_t cut = raw.find_first_of("#;");
    std::string s = trim(cut == std::string::npos ? raw : raw.substr(0, cut));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']' || s.size() < 3) throw ParseError("malformed section header", line);
      section = trim(s.substr(1, s.size() - 2));
      continue;
    }
    size_t eq = s.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'key = value'", line);
    std::string key = trim(s.substr(0, eq));
    std::string value = trim(s.substr(eq + 1));
    if (key.empty() || value.empty()) throw ParseError("expected 'key = value'", line);
    if (section.empty()) throw ParseError("key outside any [section]", line);
    out.push_back({section, key, value, line});
  }
  return out;
}

long line_of_offset(const std::string& text, size_t byte) {
  long line = 1;
  for (size_t i = 0; i < byte && i < text.size(); ++i)
    if (text[i] == '\n') line++;
  return line;
}

std::string scalar_to_string(const json& v, const std::string& where) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number()) return v.dump();
  if (v.is_array()) {
    std::string out;
    for (const auto& e : v) {
      if (!e.is_number()) throw ConfigError("non-numeric array entry at " + where);
      if (!out.empty()) out += ',';
      out += e.dump();
    }
    return out;
  }
  throw ConfigError("unsupported value type at " + where);
}

void flatten_object(const json& obj, const std::string& section, std::vector<Entry>& out) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    const std::string where = section + "." + it.key();
    out.push_back({section, it.key(), scalar_to_string(it.value(), where), 0});
  }
}

json parse_json_document(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(e.what(), line_of_offset(text, e.byte));
  }
}

std::vector<Entry> flatten_scenario_json(const std::string& text) {
  json j = parse_json_document(text);
  if (!j.is_object()) throw ConfigError("scenario document must be an object");
  std::vector<Entry> out;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!it.value().is_object())
      throw ConfigError("section '" + it.key() + "' must be an object");
    flatten_object(it.value(), it.key(), out);
  }
  return out;
}

std::vector<Entry> flatten_synth_json(const std::string& text) {
  json j = parse_json_document(text);
  if (!j.is_object()) throw ConfigError("workload document must be an object");
  std::vector<Entry> out;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key() == "core") {
      if (!it.value().is_array()) throw ConfigError("'core' must be an array");
      for (size_t i = 0; i < it.value().size(); ++i) {
        const json& cobj = it.value()[i];
        if (!cobj.is_object()) throw ConfigError("core entries must be objects");
        std::string csec = "core." + std::to_string(i);
        for (auto cit = cobj.begin(); cit != cobj.end(); ++cit) {
          if (cit.key() == "phase") {
            if (!cit.value().is_array())
              throw ConfigError("'phase' must be an array in " + csec);
            for (size_t p = 0; p < cit.value().size(); ++p) {
              if (!cit.value()[p].is_object())
                throw ConfigError("phase entries must be objects in " + csec);
              flatten_object(cit.value()[p], csec + ".phase." + std::to_string(p), out);
            }
          } else {
            out.push_back({csec, cit.key(),
                           scalar_to_string(cit.value(), csec + "." + cit.key()), 0});
          }
        }
      }
    } else {
      if (!it.value().is_object())
        throw ConfigError("section '" + it.key() + "' must be an object");
      flatten_object(it.value(), it.key(), out);
    }
  }
  return out;
}

bool looks_like_json(const std::string& text) {
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) continue;
    return c == '{';
  }
  return false;
}

[[noreturn]] void bad_entry(const Entry& e, const std::string& why) {
  std::string msg = "[" + e.section + "] " + e.key + ": " + why;
  if (e.line > 0) throw ParseError(msg, e.line);
  throw ConfigError(msg);
}

double to_double(const Entry& e) {
  try {
    size_t idx = 0;
    double v = std::stod(e.value, &idx);
    if (idx != e.value.size()) bad_entry(e, "malformed number '" + e.value + "'");
    return v;
  } catch (const ConfigError&) {
    throw;
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception&) {
    bad_entry(e, "malformed number '" + e.value + "'");
  }
}

uint64_t to_count(const Entry& e) {
  try {
    return parse_count(e.value);
  } catch (const ConfigError& err) {
    bad_entry(e, err.what());
  }
}

uint32_t to_u32(const Entry& e) {
  uint64_t v = to_count(e);
  if (v > UINT32_MAX) bad_entry(e, "value out of range");
  return static_cast<uint32_t>(v);
}

std::vector<double> to_double_list(const Entry& e) {
  std::vector<double> out;
  std::string item;
  std::istringstream in(e.value);
  while (std::getline(in, item, ',')) {
    Entry sub = e;
    sub.value = trim(item);
    out.push_back(to_double(sub));
  }
  return out;
}

// Disallows both duplicates and unknown keys; every accepted key must be
// consumed by exactly one binder arm.
class Binder {
 public:
  explicit Binder(std::vector<Entry> entries) : entries_(std::move(entries)) {
    for (size_t i = 0; i < entries_.size(); ++i)
      for (size_t k = i + 1; k < entries_.size(); ++k)
        if (entries_[i].section == entries_[k].section &&
            entries_[i].key == entries_[k].key)
          bad_entry(entries_[k], "duplicate key");
  }

  const Entry* find(const std::string& section, const std::string& key) {
    for (size_t i = 0; i < entries_.size(); ++i) {
      if (entries_[i].section == section && entries_[i].key == key) {
        used_[i] = true;
        return &entries_[i];
      }
    }
    return nullptr;
  }

  bool section_present(const std::string& section) const {
    for (const Entry& e : entries_)
      if (e.section == section) return true;
    return false;
  }

  std::vector<std::string> sections() const {
    std::vector<std::string> out;
    for (const Entry& e : entries_)
      if (std::find(out.begin(), out.end(), e.section) == out.end())
        out.push_back(e.section);
    return out;
  }

  void finish() const {
    for (size_t i = 0; i < entries_.size(); ++i)
      if (!used_.count(i)) bad_entry(entries_[i], "unknown key");
  }

 private:
  std::vector<Entry> entries_;
  std::map<size_t, bool> used_;
};

ScenarioConfig bind_scenario(std::vector<Entry> entries) {
  Binder b(std::move(entries));
  ScenarioConfig c;

  const Entry* size = b.find("geometry", "size");
  if (!size) throw ConfigError("[geometry] size is required");
  uint64_t bytes = 0;
  try {
    bytes = parse_size(size->value);
  } catch (const ConfigError& err) {
    bad_entry(*size, err.what());
  }
  uint32_t assoc = 8, block = 64, page = 4096, bits = 45;
  if (const Entry* e = b.find("geometry", "assoc")) assoc = to_u32(*e);
  if (const Entry* e = b.find("geometry", "block")) block = to_u32(*e);
  if (const Entry* e = b.find("geometry", "page")) page = to_u32(*e);
  if (const Entry* e = b.find("geometry", "address_bits")) bits = to_u32(*e);
  c.geometry = derive_geometry(bytes, assoc, block, page, bits);

  if (const Entry* e = b.find("energy", "preset")) {
    c.preset = e->value;
    static const char* fields[] = {"e_dyn_l2_nj", "p_leak_l2_w",  "e_dyn_dram_nj",
                                   "p_leak_dram_w", "e_dyn_rce_nj", "p_leak_rce_w",
                                   "e_chi_nj",    "p_off",        "upsilon",
                                   "g_f",         "d_f",          "frequency_hz"};
    for (const char* f : fields)
      if (b.find("energy", f))
        bad_entry(*e, "a preset cannot be mixed with explicit energy fields");
  } else {
    if (const Entry* e = b.find("energy", "e_dyn_l2_nj")) c.params.e_dyn_l2_nj = to_double(*e);
    if (const Entry* e = b.find("energy", "p_leak_l2_w")) c.params.p_leak_l2_w = to_double(*e);
    if (const Entry* e = b.find("energy", "e_dyn_dram_nj"))
      c.params.e_dyn_dram_nj = to_double(*e);
    if (const Entry* e = b.find("energy", "p_leak_dram_w"))
      c.params.p_leak_dram_w = to_double(*e);
    if (const Entry* e = b.find("energy", "e_dyn_rce_nj")) c.params.e_dyn_rce_nj = to_double(*e);
    if (const Entry* e = b.find("energy", "p_leak_rce_w")) c.params.p_leak_rce_w = to_double(*e);
    if (const Entry* e = b.find("energy", "e_chi_nj")) c.params.e_chi_nj = to_double(*e);
    if (const Entry* e = b.find("energy", "p_off")) c.params.p_off = to_double(*e);
    if (const Entry* e = b.find("energy", "upsilon")) c.params.upsilon = to_double(*e);
    if (const Entry* e = b.find("energy", "g_f")) c.params.g_f = to_double(*e);
    if (const Entry* e = b.find("energy", "d_f")) c.params.d_f = to_double(*e);
    if (const Entry* e = b.find("energy", "frequency_hz")) c.params.frequency_hz = to_double(*e);
  }

  if (const Entry* e = b.find("run", "policy")) {
    try {
      c.policy = policy_from_name(e->value);
    } catch (const ConfigError& err) {
      bad_entry(*e, err.what());
    }
  }
  if (const Entry* e = b.find("run", "sampling")) c.sampling = to_count(*e);
  if (const Entry* e = b.find("run", "seed")) c.seed = to_count(*e);
  if (const Entry* e = b.find("run", "skip_intervals")) c.skip_intervals = to_u32(*e);
  if (const Entry* e = b.find("run", "baseline")) {
    if (e->value == "shared")
      c.baseline = BaselineKind::Shared;
    else if (e->value == "static-equal")
      c.baseline = BaselineKind::StaticEqual;
    else
      bad_entry(*e, "expected 'shared' or 'static-equal'");
  }
  if (const Entry* e = b.find("run", "repl")) {
    if (e->value == "lru")
      c.repl = ReplPolicy::LRU;
    else if (e->value == "fifo")
      c.repl = ReplPolicy::FIFO;
    else if (e->value == "plru")
      c.repl = ReplPolicy::PLRU;
    else
      bad_entry(*e, "expected 'lru', 'fifo', or 'plru'");
  }

  if (const Entry* e = b.find("interval", "mode")) {
    if (e->value == "cycles")
      c.interval.mode = IntervalSpec::Mode::Cycles;
    else if (e->value == "instructions")
      c.interval.mode = IntervalSpec::Mode::Instructions;
    else if (e->value == "target-instructions")
      c.interval.mode = IntervalSpec::Mode::TargetInstructions;
    else
      bad_entry(*e, "expected 'cycles', 'instructions', or 'target-instructions'");
  }
  if (const Entry* e = b.find("interval", "count")) c.interval.count = to_count(*e);
  if (const Entry* e = b.find("interval", "poll_cycles")) c.interval.poll_cycles = to_count(*e);

  if (const Entry* e = b.find("overheads", "algo_curve")) c.overheads.algo_curve = to_count(*e);
  if (const Entry* e = b.find("overheads", "algo_decay")) c.overheads.algo_decay = to_count(*e);
  if (const Entry* e = b.find("overheads", "algo_way")) c.overheads.algo_way = to_count(*e);
  if (const Entry* e = b.find("overheads", "reconfig")) c.overheads.reconfig = to_count(*e);

  if (const Entry* e = b.find("policy", "t_max")) c.master.t_max = to_u32(*e);
  if (const Entry* e = b.find("policy", "t_prune")) c.master.t_prune = to_u32(*e);
  if (const Entry* e = b.find("policy", "improve_min_pct"))
    c.master.improve_min_pct = to_double(*e);
  if (const Entry* e = b.find("policy", "lambda")) {
    std::vector<double> l = to_double_list(*e);
    if (l.size() != 4) bad_entry(*e, "expected four comma-separated thresholds");
    c.master.lambda = l;
    c.manager.lambda = l;
  }
  if (const Entry* e = b.find("policy", "min_colors")) {
    uint32_t m = to_u32(*e);
    c.master.min_colors = m;
    c.palette.min_colors = m;
    c.cashier.min_colors = m;
    c.manager.min_colors = m;
  }
  if (const Entry* e = b.find("policy", "candidates")) c.palette.candidates = to_u32(*e);
  if (const Entry* e = b.find("policy", "granularity")) c.palette.granularity = to_u32(*e);
  if (const Entry* e = b.find("policy", "t_slack_seconds"))
    c.cashier.t_slack_seconds = to_double(*e);
  if (const Entry* e = b.find("policy", "upsilon_pct")) c.cashier.upsilon_pct = to_double(*e);
  if (const Entry* e = b.find("policy", "delta_pct")) c.cashier.delta_pct = to_double(*e);
  if (const Entry* e = b.find("policy", "reserve_fraction"))
    c.cashier.reserve_fraction = to_double(*e);
  if (const Entry* e = b.find("policy", "l_range")) c.cashier.l_range = to_u32(*e);
  if (const Entry* e = b.find("policy", "horizon")) c.cashier.horizon = to_u32(*e);
  if (const Entry* e = b.find("policy", "omega_pct")) c.manager.omega_pct = to_double(*e);
  if (const Entry* e = b.find("policy", "chi_pct")) c.manager.chi_pct = to_double(*e);
  if (const Entry* e = b.find("policy", "max_transfer")) c.manager.max_transfer = to_u32(*e);
  if (const Entry* e = b.find("policy", "target")) c.manager.target = to_u32(*e);
  if (const Entry* e = b.find("policy", "dpmr_pct")) c.encache.dpmr_pct = to_double(*e);
  if (const Entry* e = b.find("policy", "t1")) c.wac.t1 = to_double(*e);
  if (const Entry* e = b.find("policy", "t2")) c.wac.t2 = to_double(*e);
  if (const Entry* e = b.find("policy", "k_hits")) c.wac.k_hits = to_count(*e);
  if (const Entry* e = b.find("policy", "decay_cycles"))
    c.decay_cycles = static_cast<double>(to_count(*e));

  b.finish();
  if (c.preset.empty()) validate(c.params);
  return c;
}

SyntheticSpec bind_synth(std::vector<Entry> entries) {
  Binder b(std::move(entries));
  SyntheticSpec spec;

  const Entry* cores = b.find("trace", "cores");
  if (!cores) throw ConfigError("[trace] cores is required");
  spec.cores = to_u32(*cores);
  if (const Entry* e = b.find("trace", "address_bits")) spec.address_bits = to_u32(*e);
  if (const Entry* e = b.find("trace", "page")) spec.page_bytes = to_count(*e);
  if (const Entry* e = b.find("trace", "block")) spec.block_bytes = to_count(*e);

  spec.core.resize(spec.cores);
  for (uint32_t i = 0; i < spec.cores; ++i) {
    std::string csec = "core." + std::to_string(i);
    SyntheticCore& core = spec.core[i];
    if (const Entry* e = b.find(csec, "base_cpi")) core.timing.base_cpi = to_double(*e);
    if (const Entry* e = b.find(csec, "miss_penalty"))
      core.timing.miss_penalty = to_double(*e);
    if (const Entry* e = b.find(csec, "overlap")) core.timing.overlap = to_double(*e);
    for (uint32_t p = 0;; ++p) {
      std::string psec = csec + ".phase." + std::to_string(p);
      if (!b.section_present(psec)) break;
      Phase ph;
      const Entry* pattern = b.find(psec, "pattern");
      if (!pattern) throw ConfigError("[" + psec + "] pattern is required");
      if (pattern->value == "loop")
        ph.pattern = Phase::Pattern::Loop;
      else if (pattern->value == "stream")
        ph.pattern = Phase::Pattern::Stream;
      else if (pattern->value == "random")
        ph.pattern = Phase::Pattern::Random;
      else
        bad_entry(*pattern, "expected 'loop', 'stream', or 'random'");
      const Entry* blocks = b.find(psec, "blocks");
      if (!blocks) throw ConfigError("[" + psec + "] blocks is required");
      ph.blocks = to_count(*blocks);
      const Entry* events = b.find(psec, "events");
      if (!events) throw ConfigError("[" + psec + "] events is required");
      ph.events = to_count(*events);
      if (const Entry* e = b.find(psec, "store_fraction")) ph.store_fraction = to_double(*e);
      if (const Entry* e = b.find(psec, "events_per_kilo_instr"))
        ph.events_per_kilo_instr = to_double(*e);
      core.phases.push_back(ph);
    }
    if (core.phases.empty())
      throw ConfigError("[" + csec + "] needs at least one phase section");
  }

  b.finish();
  validate(spec);
  return spec;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

}  // namespace

uint64_t parse_size(const std::string& text) { return parse_suffixed(text, 1024, "size"); }
uint64_t parse_count(const std::string& text) { return parse_suffixed(text, 1000, "count"); }

ScenarioConfig parse_scenario(const std::string& text) {
  return bind_scenario(looks_like_json(text) ? flatten_scenario_json(text)
                                             : parse_structured_text(text));
}

ScenarioConfig load_scenario(const std::string& path) {
  return parse_scenario(read_file(path));
}

void finalize_scenario(ScenarioConfig& c, const TraceHeader& header) {
  if (!c.preset.empty()) c.params = energy_preset(c.preset, header.cores);
}

SyntheticSpec parse_synth_spec(const std::string& text) {
  return bind_synth(looks_like_json(text) ? flatten_synth_json(text)
                                          : parse_structured_text(text));
}

SyntheticSpec load_synth_spec(const std::string& path) {
  return parse_synth_spec(read_file(path));
}

}  // namespace cachesim
