#pragma once

// Run configuration: one JSON document with sections data, system,
// preprocess, fit, models, studies, synth and predict plus a top-level seed.
// Unknown keys are rejected so typos surface as configuration errors.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pvprof/baselines.hpp"
#include "pvprof/datasheet.hpp"
#include "pvprof/param_fit.hpp"
#include "pvprof/preprocess.hpp"
#include "pvprof/synth.hpp"

namespace pvprof {

inline const std::vector<std::string> kKnownModels{"pvpro", "smart_persistence", "naive_persistence",
                                                   "nominal", "lr", "kr"};

struct DataConfig {
  std::string telemetry;  // input CSV; default <output>/telemetry.csv
  std::string mapping;    // optional column mapping JSON
  std::string output = "out";
  std::string report;     // benchmark report read by `report`; default <output>/benchmark_report.json
};

struct SystemConfig {
  double p_nominal_w = 0.0;
  ArrayTopology topology;
  std::optional<Datasheet> datasheet;
  std::string climate_zone;  // annotation only
};

struct FitConfig {
  int window_days = 3;
  int update_days = 1;
  bool warm_start = true;
  int max_iterations = 200;
  double loss_tolerance = 1e-10;
  std::optional<ParameterBounds> bounds;  // defaults from the datasheet Isc
  // Required when the system has no datasheet.
  std::optional<SdmParamsRef> initial;
  std::optional<double> v_scale;
  std::optional<double> i_scale;
};

struct ModelsConfig {
  std::vector<std::string> roster{"pvpro", "smart_persistence", "naive_persistence", "nominal", "lr", "kr"};
  int horizon_hours = 24;
  GridSearchSpec grid;
};

struct StudiesConfig {
  std::optional<Day> evaluation_start;  // default: first day with a full fitting window and regressor history
  std::optional<int> evaluation_days;   // default: through the last day
  bool daylight_only = true;
  std::vector<double> exceedance_thresholds{0.10, 0.20};
  bool seasonal = true;
  bool exceedance = true;
  bool weather_cases = true;
  double cloud_threshold = 0.05;
  bool sweep = true;
  int sweep_points = 101;
  bool training_length = false;
  std::vector<int> training_lengths_days{3, 7, 14, 30, 60, 90};
  int training_length_eval_days = 7;
};

struct SynthConfig {
  WeatherProfile profile;
  std::optional<SdmParamsRef> true_params;  // default: extracted from the datasheet
  DegradationScenario scenario;
  double noise_v = 0.005;
  double noise_i = 0.005;
  std::optional<double> p_dc_limit_w;
};

struct PredictConfig {
  std::string weather;                 // CSV in the telemetry schema; v_dc/i_dc used as measurements
  std::optional<SdmParamsRef> params;  // default: fit the last window of data.telemetry
};

struct RunConfig {
  DataConfig data;
  SystemConfig system;
  PreprocessOptions preprocess;
  FitConfig fit;
  ModelsConfig models;
  StudiesConfig studies;
  SynthConfig synth;
  PredictConfig predict;
  std::uint64_t seed = 1;
};

// Throws ConfigError on malformed JSON, unknown keys, wrong types or
// violated invariants (empty roster, unknown model, nominal without
// datasheet, nonpositive p_nominal ...).
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);
void validate(const RunConfig& cfg);

// Canonical JSON of the normalized configuration (all defaults filled in).
std::string canonical_json(const RunConfig& cfg);
// FNV-1a 64 of canonical_json with the output paths cleared, as 16 hex
// digits.
std::string config_hash(const RunConfig& cfg);

// Comma-separated roster override, e.g. "pvpro,kr".
std::vector<std::string> parse_roster(const std::string& csv);

FitOptions fit_options(const RunConfig& cfg);
RollingFitOptions rolling_options(const RunConfig& cfg);

}  // namespace pvprof
