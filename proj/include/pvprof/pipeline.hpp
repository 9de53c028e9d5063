#pragma once

// Batch commands: synthetic data generation, rolling fits, forecasts, the
// day-ahead benchmark and chart rendering. Every forecast for day D uses
// only records with timestamps before D plus day-D measured weather.

#include <optional>
#include <string>
#include <vector>

#include "pvprof/analysis.hpp"
#include "pvprof/baselines.hpp"
#include "pvprof/config.hpp"
#include "pvprof/param_fit.hpp"
#include "pvprof/synth.hpp"

namespace pvprof {

inline constexpr int kReportSchemaVersion = 1;
const char* library_version();

struct DailyResult {
  Day day{};
  std::string model;
  std::optional<MetricsReport> metrics;
  std::string skip_reason;  // set iff metrics is absent
};

struct ModelAggregate {
  std::string model;
  std::optional<MetricsReport> metrics;
  std::string note;
};

struct BenchmarkReport {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string run_timestamp;
  double p_nominal_w = 0.0;
  std::string climate_zone;
  Day evaluation_start{};
  int evaluation_days = 0;
  int horizon_hours = 24;
  std::vector<std::string> models;
  std::vector<DailyResult> daily;  // day-major, roster order within a day
  std::vector<ModelAggregate> aggregate;
  std::vector<GridSearchResult> grid_searches;
  std::vector<FitWindowResult> pvpro_fits;  // one per forecast day
  std::vector<StudyResult> studies;
  std::vector<std::string> notes;
  std::vector<ForecastSeries> forecasts;  // per model over the span; written as CSV, not JSON
};

// Parameters of the datasheet-only model.
SdmParamsRef nominal_params(const RunConfig& cfg);
// Initial guess and bounds used for PVPro fits.
SdmParamsRef pvpro_initial(const RunConfig& cfg);

TelemetrySeries load_series(const RunConfig& cfg, std::vector<std::string>* diagnostics = nullptr);
SyntheticDataset synthesize(const RunConfig& cfg);
std::string ground_truth_json(const GroundTruth& truth);

BenchmarkReport run_benchmark(const RunConfig& cfg, const TelemetrySeries& series);
// `run_timestamp` is the only field that differs between identical runs.
std::string report_to_json(const BenchmarkReport& report);

// SVG charts from a report JSON: daily nMAE lines, nBE histogram and sweep
// curves. Returns (file name, content) pairs.
std::vector<std::pair<std::string, std::string>> render_charts(const std::string& report_json);

// File-writing commands. Outputs go to cfg.data.output.
void cmd_synth(const RunConfig& cfg);
void cmd_fit(const RunConfig& cfg);
void cmd_predict(const RunConfig& cfg);
void cmd_benchmark(const RunConfig& cfg);
void cmd_report(const std::string& report_path, const std::string& out_dir);

}  // namespace pvprof
