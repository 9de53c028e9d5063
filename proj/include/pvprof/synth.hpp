#pragma once

// Ground-truth telemetry generator: clear-sky irradiance, cloud attenuation,
// module temperature and MPP telemetry from known single-diode parameters
// with optional drift, steps, clipping and multiplicative noise.

#include <chrono>
#include <cstdint>
#include <optional>
#include <set>
#include <vector>

#include "pvprof/core_sdm.hpp"
#include "pvprof/param_fit.hpp"
#include "pvprof/telemetry.hpp"

namespace pvprof {

struct WeatherProfile {
  Day start_day = std::chrono::sys_days{std::chrono::year{2018} / 1 / 1};
  int days = 3;
  std::chrono::minutes cadence{15};
  double peak_irradiance = 1000.0;  // W/m^2 at solar noon (12:00 UTC)
  double day_length_hours = 12.0;
  std::set<int> cloud_days;
  double cloud_depth = 0.4;
  double cloud_timescale_minutes = 30.0;
  double ambient_base = 20.0;  // C
  std::uint64_t seed = 1;
};

void validate(const WeatherProfile& profile);

std::vector<Instant> sample_times(const WeatherProfile& profile);

// g = peak * max(0, sin(pi (t - sunrise) / day_length))^1.2 inside daylight.
double clear_sky_irradiance(const WeatherProfile& profile, double hour);
std::vector<double> clear_sky_profile(const WeatherProfile& profile);

// Multiplies irradiance on cloud days by a smoothed random attenuation in
// [1 - cloud_depth, 1] with correlation time cloud_timescale_minutes.
std::vector<double> apply_clouds(const std::vector<double>& irradiance, const WeatherProfile& profile);
// Per-sample attenuation factors used by apply_clouds (1 on clear days).
std::vector<double> cloud_attenuation(const WeatherProfile& profile);

// Ambient: +-5 C sinusoid about ambient_base peaking at 14:00; module
// temperature adds 28 C per 800 W/m^2.
double ambient_temperature(double ambient_base, double hour);
std::vector<double> module_temperature(const std::vector<double>& irradiance, const std::vector<Instant>& times,
                                       double ambient_base);

struct Trajectory {
  enum class Kind { constant, linear, step };
  Kind kind = Kind::constant;
  double relative_change = 0.0;  // total change over the span (linear) or step size
  int step_day = 0;              // first day carrying the step

  double factor(double elapsed_days, double span_days) const;
};

struct DegradationScenario {
  std::array<Trajectory, kParamCount> trajectory{};  // indexed by ParamIndex

  SdmParamsRef at(const SdmParamsRef& base, double elapsed_days, double span_days) const;
};

struct SynthOptions {
  double noise_v = 0.005;  // relative standard deviation
  double noise_i = 0.005;
  double alpha_isc = 0.0;
  std::optional<double> p_dc_limit;          // W, array level; clipped operation above
  std::optional<ParameterBounds> bounds;     // trajectory must stay inside when set
};

struct GroundTruthDay {
  Day day{};
  SdmParamsRef params{};  // at the start of the day
  bool cloudy = false;
};

struct GroundTruth {
  SdmParamsRef true_params{};
  ArrayTopology topology{};
  WeatherProfile profile{};
  DegradationScenario scenario{};
  SynthOptions options{};
  std::vector<GroundTruthDay> days;
  std::vector<std::size_t> clipped_indices;
};

struct SyntheticDataset {
  TelemetrySeries records;
  GroundTruth truth;
};

// Pure function of its inputs and profile.seed. Throws ConfigError when the
// degradation trajectory leaves the configured bounds.
SyntheticDataset generate_dataset(const SdmParamsRef& true_params, const ArrayTopology& topo,
                                  const WeatherProfile& profile, const DegradationScenario& scenario,
                                  const SynthOptions& options);

// splitmix64 step; used to derive independent per-day streams.
std::uint64_t splitmix64(std::uint64_t x);

}  // namespace pvprof
