#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "stripspec/types.hpp"

// Artifact plumbing for the CLI: deterministic text formats, atomic file
// writes, config validation. Everything here is byte-stable: the same inputs
// always serialize to the same bytes.

namespace stripspec::io {

// Shortest round-trip decimal form (std::to_chars).
std::string fmt_double(double v);

// "a:b:count" expands to count points from a to b inclusive (count == 1
// requires a == b); otherwise a comma-separated list.
std::vector<double> parse_grid(const std::string& text);

std::vector<double> parse_list(const std::string& text);

// "0.7+0.3i", "2", "-1.5i", "1-i".
cxd parse_complex(const std::string& text);

// Writes to a sibling temp file, then renames over the target, so readers
// never observe a half-written artifact.
void write_atomic(const std::string& path, const std::string& content);

struct Csv {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::string to_string() const;
};

struct Series {
  std::string label;
  std::vector<double> y;
};

// Self-contained line chart; series are drawn over the shared x column.
std::string svg_line_chart(const std::string& title, const std::string& xlabel,
                           const std::vector<double>& x,
                           const std::vector<Series>& series);

// The schema shipped at schema/runconfig-v1.json, embedded so the binary
// validates configs without a lookup path. A test pins the two copies equal.
const std::string& config_schema_text();

// Validates {version, command, params} against the embedded schema, then the
// params object against the command's entry in $defs. Returns diagnostics as
// "<json-pointer>: <problem>"; empty means valid.
std::vector<std::string> validate_runconfig(const nlohmann::json& config);

}  // namespace stripspec::io
