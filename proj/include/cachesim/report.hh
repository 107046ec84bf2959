#pragma once

#include <string>
#include <vector>

#include "cachesim/harness.hh"
#include "cachesim/metrics.hh"

namespace cachesim {

// Writes `content` to `path` atomically: temp file in the same directory,
// then rename. Creates missing parent directories.
void atomic_write(const std::string& path, const std::string& content);

// CSV number formatting: 9 significant digits, '.' separator, no locale.
std::string format_number(double v);

// Full report serialization. JSON carries the complete structure with a
// deterministic key order; wall_seconds is the only field that varies
// between identical runs. The reader reconstructs everything the compare
// and sweep commands need (the scenario echo is not read back).
std::string report_to_json(const RunReport& r);
RunReport report_from_json(const std::string& text);
void write_report_json(const RunReport& r, const std::string& path);
RunReport read_report_json(const std::string& path);

// CSV: one row per interval, then a key,value summary block.
std::string report_to_csv(const RunReport& r);
void write_report_csv(const RunReport& r, const std::string& path);

// One technique measured against a baseline.
struct ComparisonRow {
  std::string base_policy;
  std::string tech_policy;
  std::string fingerprint;
  ComparisonMetrics m;
};

std::string comparison_to_json(const ComparisonRow& row);
std::string comparison_table(const ComparisonRow& row);  // human-readable
// Combined sweep table, one row per technique, sorted by policy name.
std::string sweep_csv(std::vector<ComparisonRow> rows);

}  // namespace cachesim
