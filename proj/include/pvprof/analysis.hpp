#pragma once

// Forecast error metrics normalized by nameplate capacity and the study
// drivers built on them: seasonal split, clear/cloudy cases, bias
// exceedance, one-feature sweeps and training-length sweeps.

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pvprof/baselines.hpp"
#include "pvprof/core_sdm.hpp"
#include "pvprof/telemetry.hpp"

namespace pvprof {

struct MetricsOptions {
  bool daylight_only = true;
  double g_min = 50.0;
  std::vector<double> exceedance_thresholds{0.10, 0.20};
};

struct MetricsReport {
  std::size_t n_samples = 0;
  double nmae = 0.0;
  double nrmse = 0.0;
  double nbe_mean = 0.0;
  std::vector<double> nbe_series;
  std::vector<std::pair<double, double>> exceedance;  // (threshold, density)
};

// nMAE = mean |pred - meas| / p_nominal, nRMSE = sqrt(mean (pred - meas)^2) /
// p_nominal, nBE_i = (pred_i - meas_i) / p_nominal. With daylight_only,
// samples whose g_poa is below g_min are excluded (g_poa must then be
// aligned). Throws DataError when no sample remains.
MetricsReport compute_metrics(std::span<const double> pred, std::span<const double> meas, double p_nominal,
                              std::span<const double> g_poa, const MetricsOptions& opts = {});

// density(tau) = #{nbe > tau} / N for each threshold.
std::vector<std::pair<double, double>> exceedance_density(std::span<const double> nbe,
                                                          std::span<const double> thresholds);

// Spring Mar-May, summer Jun-Aug, fall Sep-Nov, winter Dec-Feb (Feb 29
// included).
std::string season_of(Day d);

struct GroupMetrics {
  std::string label;
  std::optional<MetricsReport> metrics;  // absent when the group is empty
  std::string note;
};

struct SweepCurve {
  std::string name;
  std::string feature;
  std::vector<double> x;
  std::vector<double> y;
};

struct StudyResult {
  std::string study;  // seasonal, weather_cases, exceedance, sweep, training_length
  std::string model;
  std::vector<GroupMetrics> groups;
  std::vector<SweepCurve> curves;
  std::optional<double> cv_of_cases;
  bool weather_sensitive = false;
};

// One evaluated sample: forecast, measurement and the measured irradiance.
struct EvaluatedSample {
  Instant timestamp{};
  double p_pred = 0.0;
  double p_meas = 0.0;
  double g_poa = 0.0;
};

StudyResult seasonal_partition(std::span<const EvaluatedSample> samples, double p_nominal,
                               const MetricsOptions& opts = {});

enum class DayLabel { clear, cloudy };
std::string to_string(DayLabel l);

struct LabeledDay {
  Day day{};
  DayLabel label = DayLabel::clear;
  double variability = 0.0;
};

// Variability index per day: mean over interior daylight samples of
// |p[k+1] - 2 p[k] + p[k-1]| / (2 p[k]), i.e. sample-to-sample relative
// change after removing the local diurnal trend. Clear iff index < threshold.
// Days without three consecutive daylight samples are labelled clear with
// index 0.
std::vector<LabeledDay> classify_days(std::span<const TelemetryRecord> series, double threshold = 0.05,
                                      double g_min = 50.0);

// Predictions for `target` records from a model trained on `training`.
using Predictor = std::function<std::vector<double>(std::span<const TelemetryRecord> target)>;
using Trainer = std::function<Predictor(std::span<const TelemetryRecord> training)>;

struct NamedTrainer {
  std::string name;
  Trainer train;
};

// Within each label the earlier half of the days (rounded up) forms the
// training pool and the rest the test pool; "mixed" trains on both pools.
// Six cases (train clear|cloudy|mixed x test clear|cloudy) per model, with
// the coefficient of variation of the six nMAE values (population standard
// deviation). Throws DataError when a pool is empty.
std::vector<StudyResult> weather_case_study(std::span<const TelemetryRecord> series,
                                            std::span<const LabeledDay> labels,
                                            std::span<const NamedTrainer> models, double p_nominal,
                                            const MetricsOptions& opts = {});

// Population standard deviation over mean.
double coefficient_of_variation(std::span<const double> values);

inline constexpr double kWeatherSensitiveCv = 0.20;

enum class SweepFeature { g_poa, t_module, hod };
std::string to_string(SweepFeature f);

struct SweepModel {
  std::string name;
  std::function<double(const FeatureVector&)> predict;
};

struct SweepSpec {
  SweepFeature varied = SweepFeature::g_poa;
  double lo = 0.0;
  double hi = 1000.0;
  int points = 101;
  FeatureVector fixed{1000.0, 25.0, 0.5};
};

// Curves of each model over a uniform grid of one feature with the others
// held at `fixed`. With reference parameters a "reference" curve from the
// single-diode model is added (hod ignored).
StudyResult interpretability_sweep(std::span<const SweepModel> models, const SweepSpec& spec,
                                   const std::optional<SdmParamsRef>& reference, const ArrayTopology& topo,
                                   double alpha_isc);

// Forecast for `day` records from `history` (all records in the training span).
using DayForecaster =
    std::function<std::vector<double>(std::span<const TelemetryRecord> history, std::span<const TelemetryRecord> day)>;
// Builds a forecaster for a given training length in days.
using ForecasterFactory = std::function<DayForecaster(int training_days)>;

// For each length: day-ahead forecasts of every day in [eval_start,
// eval_start + eval_days) trained on the preceding `length` days, scored by
// pooling all evaluated samples. Lengths without enough history get a note
// and no metrics.
StudyResult training_length_sweep(const std::string& model, const ForecasterFactory& factory,
                                  std::span<const TelemetryRecord> series, std::span<const int> lengths_days,
                                  Day eval_start, int eval_days, double p_nominal, const MetricsOptions& opts = {});

}  // namespace pvprof
