#pragma once

// Comparison models: naive and smart persistence, the datasheet-only
// ("nominal") physical model and two regressors (ridge linear regression and
// RBF kernel ridge) with a grid search that treats training length as a
// hyperparameter.

#include <chrono>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pvprof/datasheet.hpp"
#include "pvprof/param_fit.hpp"
#include "pvprof/telemetry.hpp"

namespace pvprof {

// P(t+h) = P(t) G(t+h)/G(t). Below g_min at t the forecast is zero when
// G(t+h) is also below g_min, otherwise the nearest earlier same-day sample
// with G >= g_min serves as the base (zero if none). Throws DataError when a
// future timestamp has no history sample exactly h earlier.
ForecastSeries smart_persistence(std::span<const TelemetryRecord> history, std::span<const TelemetryRecord> future,
                                 std::chrono::seconds horizon, double g_min);

// P(t+h) = P(t).
ForecastSeries naive_persistence(std::span<const TelemetryRecord> history, std::span<const TelemetryRecord> future,
                                 std::chrono::seconds horizon);

struct FeatureVector {
  double g_poa = 0.0;
  double t_module = 0.0;
  double hod = 0.0;  // hour of day / 24
};
inline constexpr std::size_t kFeatureCount = 3;

FeatureVector features_of(const TelemetryRecord& r);

enum class RegressorFamily { linear, kernel_ridge };
std::string to_string(RegressorFamily f);
RegressorFamily regressor_family_from_string(const std::string& s);

struct RegressorHyperparams {
  double lambda = 1e-3;  // ridge strength
  double gamma = 1.0;    // RBF bandwidth, kernel ridge only
  bool operator==(const RegressorHyperparams&) const = default;
};

struct RegressorModel {
  RegressorFamily family = RegressorFamily::linear;
  RegressorHyperparams hyper;
  std::array<double, kFeatureCount> mean{};
  std::array<double, kFeatureCount> stddev{};
  double target_mean = 0.0;
  Eigen::VectorXd coefficients;  // linear: weights; kernel ridge: dual coefficients
  Eigen::MatrixXd support;       // kernel ridge: standardized training features (n x 3)
};

// Closed-form ridge (linear) or kernel ridge with exp(-gamma |x - x'|^2) on
// standardized features, targets centered on their mean. Throws DataError
// with fewer than 20 pairs or a constant feature, NumericError when the
// regularized system cannot be solved.
RegressorModel train_regressor(RegressorFamily family, std::span<const FeatureVector> features,
                               std::span<const double> power, const RegressorHyperparams& hyper);

double predict_regressor(const RegressorModel& model, const FeatureVector& x);  // clamped at 0
std::vector<double> predict_regressor(const RegressorModel& model, std::span<const FeatureVector> xs);

// Training pairs from daylight records (g_poa >= g_min).
void daylight_training_set(std::span<const TelemetryRecord> records, double g_min, std::vector<FeatureVector>& features,
                           std::vector<double>& power);

struct GridSearchSpec {
  std::vector<double> lambdas{1e-4, 1e-3, 1e-2, 1e-1, 1.0};
  std::vector<double> gammas{0.1, 0.5, 1.0, 2.0, 5.0};
  std::vector<int> training_days{3, 7, 14, 30, 60, 90};
  int holdout_days = 1;
};

void validate(const GridSearchSpec& spec);

struct GridCell {
  int training_days = 0;
  RegressorHyperparams hyper;
  double validation_nmae = 0.0;
  bool valid = false;
  std::string note;
};

struct GridSearchResult {
  RegressorFamily family = RegressorFamily::linear;
  RegressorHyperparams best_hyper;
  int best_training_days = 0;
  std::vector<GridCell> table;  // fixed grid order
};

// Exhaustive search over (training length, lambda[, gamma]) with the
// trailing holdout_days of `history` as validation; training windows end
// where the holdout starts. Selection by smallest validation nMAE over
// daylight samples, ties toward shorter training then smaller lambda then
// smaller gamma. Throws DataError when no cell is valid.
GridSearchResult grid_search(const GridSearchSpec& spec, RegressorFamily family,
                             std::span<const TelemetryRecord> history, double p_nominal, double g_min);

}  // namespace pvprof
