#pragma once

#include "airgrasp/engine.hpp"
#include "airgrasp/scenario.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace airgrasp {

/// Column names of the trace CSV, in file order. The schema is stable;
/// new columns are only ever appended.
std::vector<std::string> trace_csv_columns();

/// One row per step, floats serialized with 17 significant digits so a
/// re-read reproduces every value bit-exactly.
void write_trace_csv(const SimTrace& trace, std::ostream& out);
void write_trace_csv(const SimTrace& trace, const std::string& path);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  int column(const std::string& name) const;  // -1 when absent
};

CsvTable read_csv(std::istream& in);
CsvTable read_csv(const std::string& path);

/// Setpoint-vs-actual line plots per axis (vehicle and manipulator) with
/// mission-phase shading.
void write_tracking_svg(const SimTrace& trace, const std::string& path);

std::string metrics_to_json(const SummaryMetrics& metrics);
void write_metrics_json(const SummaryMetrics& metrics, const std::string& path);

struct EmittedFiles {
  std::string csv;
  std::string svg;
  std::string metrics;
};

/// Writes the CSV trace, the SVG plot and the metrics file into `out_dir`
/// using the names from the scenario's output block. Throws
/// std::runtime_error on an empty trace ("no data") or on I/O failure,
/// naming the path.
EmittedFiles emit_outputs(const SimTrace& trace, const ScenarioConfig& config,
                          const std::string& out_dir);

}  // namespace airgrasp
