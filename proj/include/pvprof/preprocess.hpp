#pragma once

// Telemetry cleaning ahead of parameter fitting. Filters run in a fixed
// order (night, clipping, outliers) and only ever remove records.

#include <optional>
#include <span>
#include <vector>

#include "pvprof/telemetry.hpp"

namespace pvprof {

struct QualityFlags {
  bool night = false;
  bool clipped = false;
  bool outlier_current = false;
  bool outlier_voltage = false;

  bool retained() const { return !(night || clipped || outlier_current || outlier_voltage); }
  bool operator==(const QualityFlags&) const = default;
};

using QualityMask = std::vector<QualityFlags>;

struct ClippingOptions {
  std::optional<double> p_ac_limit;  // W; plateau detection when absent
  double limit_fraction = 0.98;
  double plateau_band = 0.005;
  int plateau_run = 3;
};

struct PreprocessOptions {
  double g_min = 50.0;  // W/m^2
  ClippingOptions clipping;
  double k_sigma = 3.0;
};

// Flags records with g_poa < g_min.
void filter_night(std::span<const TelemetryRecord> series, QualityMask& mask, double g_min);

// With a limit: flags v_dc * i_dc >= limit_fraction * limit. Without: flags
// runs of at least plateau_run samples whose power stays within plateau_band
// of the running daily maximum while irradiance keeps moving by more than
// twice that band (power no longer follows irradiance).
void filter_clipping(std::span<const TelemetryRecord> series, QualityMask& mask, const ClippingOptions& opts);

// One OLS pass of i_dc on g_poa and of v_dc on t_module over records not
// flagged night or clipped; residuals above k_sigma residual standard
// deviations are flagged. Throws DataError with fewer than 10 usable records.
void remove_outliers_regression(std::span<const TelemetryRecord> series, QualityMask& mask, double k_sigma);

QualityMask preprocess(std::span<const TelemetryRecord> series, const PreprocessOptions& opts);

TelemetrySeries retained_records(std::span<const TelemetryRecord> series, const QualityMask& mask);

}  // namespace pvprof
