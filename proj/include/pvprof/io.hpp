#pragma once

// CSV files: telemetry (native schema or mapped foreign headers), fitted
// parameter trajectories and forecasts. Floats are written with 17
// significant digits.

#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "pvprof/param_fit.hpp"
#include "pvprof/telemetry.hpp"

namespace pvprof {

inline constexpr const char* kTelemetryColumns[] = {"timestamp", "g_poa", "t_module", "v_dc", "i_dc"};

// Native column name -> header used in the file. Unlisted columns keep their
// native names.
struct ColumnMapping {
  std::map<std::string, std::string> columns;
};

// {"columns": {"timestamp": "...", "g_poa": "...", ...}}
ColumnMapping load_column_mapping(const std::string& path);
ColumnMapping parse_column_mapping(const std::string& json_text);

struct IngestResult {
  TelemetrySeries records;
  std::vector<std::string> diagnostics;  // "line N: reason"
  std::size_t rows = 0;
};

// Rows that fail to parse or violate record invariants (including
// non-increasing timestamps) are dropped with a diagnostic. Throws DataError
// when a required column is missing or when 1% or more of the rows are
// rejected.
IngestResult read_telemetry_csv(std::istream& in, const ColumnMapping& mapping = {});
IngestResult read_telemetry_csv(const std::string& path, const ColumnMapping& mapping = {});

void write_telemetry_csv(std::ostream& out, std::span<const TelemetryRecord> records);
void write_telemetry_csv(const std::string& path, std::span<const TelemetryRecord> records);

void write_trajectory_csv(std::ostream& out, std::span<const FitWindowResult> fits);
void write_forecast_csv(std::ostream& out, std::span<const ForecastSeries> forecasts);

// Splits one CSV record (RFC 4180 quoting, no embedded newlines).
std::vector<std::string> split_csv_line(const std::string& line);

std::string format_double(double x);  // %.17g

// Writes `text` to `path`, creating parent directories. Throws DataError on
// failure.
void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

}  // namespace pvprof
