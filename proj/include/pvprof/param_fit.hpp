#pragma once

// Estimation of reference single-diode parameters from production telemetry:
// simulated array MPP (v_dc, i_dc) is matched to measurements by bounded
// quasi-Newton minimization of a normalized mean-square loss, re-run on a
// rolling schedule.

#include <array>
#include <chrono>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pvprof/core_sdm.hpp"
#include "pvprof/datasheet.hpp"
#include "pvprof/preprocess.hpp"
#include "pvprof/telemetry.hpp"

namespace pvprof {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double x) const { return x >= lo && x <= hi; }
};

enum ParamIndex : std::size_t { kIph = 0, kI0 = 1, kRs = 2, kRsh = 3, kN = 4 };
inline constexpr std::size_t kParamCount = 5;

std::array<double, kParamCount> to_array(const SdmParamsRef& p);
SdmParamsRef from_array(const std::array<double, kParamCount>& a);

struct ParameterBounds {
  std::array<Interval, kParamCount> range{};

  bool contains(const SdmParamsRef& p) const;
  SdmParamsRef clamp(const SdmParamsRef& p) const;
  // i_ph in [0.1, 2] x Isc, i_0 in [1e-13, 1e-5] A, r_s in [1e-4, 5] Ohm,
  // r_sh in [10, 1e5] Ohm, n in [0.5, 2.5].
  static ParameterBounds defaults(double datasheet_isc);
};

struct FitOptions {
  ParameterBounds bounds;
  int max_iterations = 200;
  double loss_tolerance = 1e-10;
  double v_scale = 1.0;  // V
  double i_scale = 1.0;  // A
  std::array<bool, kParamCount> log_space{false, true, false, true, false};
  double alpha_isc = 0.0;          // A/C, enters the photocurrent translation
  double fd_step = 1e-6;           // in normalized optimizer coordinates
  std::size_t min_records = 50;
  double g_min = 50.0;             // night rule for predictions

  // Defaults derived from the datasheet: bounds around its Isc and loss
  // scales Vmp * modules_per_string and Imp * strings_in_parallel.
  static FitOptions from_datasheet(const Datasheet& ds, const ArrayTopology& topo);
};

struct FitWindowResult {
  Instant window_start{};
  Instant window_end{};
  SdmParamsRef params{};
  double final_loss = 0.0;
  int iterations = 0;
  bool converged = false;
  std::size_t n_points = 0;
  std::string error;  // non-empty when the window could not be fitted

  bool ok() const { return error.empty(); }
};

// Datasheet extraction, or heuristic seeds when extraction fails. Throws
// ConfigError when the datasheet is incomplete or infeasible.
SdmParamsRef initial_guess(const Datasheet& ds);

struct LossEvaluation {
  double loss = 0.0;
  std::size_t used = 0;
  std::size_t skipped = 0;
};

// Mean over records of ((v - v_sim)/v_scale)^2 + ((i - i_sim)/i_scale)^2.
// Records whose simulation fails are skipped; more than 10% skipped throws
// NumericError.
LossEvaluation evaluate_loss(const SdmParamsRef& params, std::span<const TelemetryRecord> window,
                             const ArrayTopology& topo, const FitOptions& opts);
double loss(const SdmParamsRef& params, std::span<const TelemetryRecord> window, const ArrayTopology& topo,
            const FitOptions& opts);

// Finite-difference gradient of the loss with respect to the normalized
// optimizer coordinates (log10 or linear per parameter, scaled to the unit
// box). `stencil` is 3 (central) or 5 points.
std::array<double, kParamCount> loss_gradient(const SdmParamsRef& params, std::span<const TelemetryRecord> window,
                                              const ArrayTopology& topo, const FitOptions& opts, int stencil = 3);

// Fits one window of retained records. Throws DataError with fewer than
// min_records records, ConfigError when init lies outside the bounds and
// NumericError when the loss at init is not finite.
FitWindowResult fit_window(std::span<const TelemetryRecord> window, const ArrayTopology& topo,
                           const SdmParamsRef& init, const FitOptions& opts);

struct RollingFitOptions {
  std::chrono::seconds window_length = std::chrono::days{3};
  std::chrono::seconds update_period = std::chrono::days{1};
  bool warm_start = true;
  PreprocessOptions preprocess;
};

// One fit per update instant t = day(first) + window_length + k * update_period
// up to the day boundary after the last record, each over the preprocessed
// records in [t - window_length, t). Per-window failures are recorded in the
// result, not thrown.
std::vector<FitWindowResult> rolling_fit(std::span<const TelemetryRecord> series, const ArrayTopology& topo,
                                         const SdmParamsRef& init, const FitOptions& fit_opts,
                                         const RollingFitOptions& rolling);

struct ForecastSeries {
  std::string model;
  std::vector<Instant> timestamps;
  std::vector<double> p_pred;  // W
  std::vector<double> p_meas;  // W, NaN where unknown
};

// Array MPP power for each weather record; zero below g_min.
ForecastSeries predict_power(const SdmParamsRef& params, std::span<const TelemetryRecord> weather,
                             const ArrayTopology& topo, const FitOptions& opts, std::string model = "pvpro");
// Requires a converged result (ConfigError otherwise).
ForecastSeries predict_power(const FitWindowResult& result, std::span<const TelemetryRecord> weather,
                             const ArrayTopology& topo, const FitOptions& opts);

}  // namespace pvprof
