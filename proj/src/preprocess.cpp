#include "pvprof/preprocess.hpp"

#include <algorithm>
#include <cmath>

#include "pvprof/error.hpp"

namespace pvprof {

namespace {

void require_nonempty(std::span<const TelemetryRecord> series, const QualityMask& mask) {
  if (series.empty()) throw DataError("telemetry series is empty");
  if (mask.size() != series.size()) throw DataError("quality mask length does not match series");
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

LineFit ordinary_least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    mx += x[k];
    my += y[k];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
  }
  LineFit fit;
  fit.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  fit.intercept = my - fit.slope * mx;
  return fit;
}

// Residuals of y on x; returns the residual standard deviation (n - 2 dof).
double residuals(const std::vector<double>& x, const std::vector<double>& y, std::vector<double>& res) {
  const LineFit fit = ordinary_least_squares(x, y);
  res.resize(x.size());
  double ss = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    res[k] = y[k] - (fit.slope * x[k] + fit.intercept);
    ss += res[k] * res[k];
  }
  return std::sqrt(ss / static_cast<double>(x.size() - 2));
}

}  // namespace

void filter_night(std::span<const TelemetryRecord> series, QualityMask& mask, double g_min) {
  require_nonempty(series, mask);
  for (std::size_t k = 0; k < series.size(); ++k)
    if (series[k].g_poa < g_min) mask[k].night = true;
}

void filter_clipping(std::span<const TelemetryRecord> series, QualityMask& mask, const ClippingOptions& opts) {
  require_nonempty(series, mask);
  if (opts.p_ac_limit) {
    const double threshold = opts.limit_fraction * *opts.p_ac_limit;
    for (std::size_t k = 0; k < series.size(); ++k)
      if (series[k].power() >= threshold) mask[k].clipped = true;
    return;
  }

  const double band = opts.plateau_band;
  auto flag_run = [&](std::size_t begin, std::size_t end) {
    if (end - begin < static_cast<std::size_t>(std::max(opts.plateau_run, 1))) return;
    double g_lo = series[begin].g_poa, g_hi = g_lo;
    for (std::size_t k = begin; k < end; ++k) {
      g_lo = std::min(g_lo, series[k].g_poa);
      g_hi = std::max(g_hi, series[k].g_poa);
    }
    if (g_hi - g_lo <= 2.0 * band * g_hi) return;
    for (std::size_t k = begin; k < end; ++k) mask[k].clipped = true;
  };

  std::size_t run_begin = 0, run_len = 0;
  double running_max = 0.0;
  Day current_day = day_of(series.front().timestamp);
  for (std::size_t k = 0; k < series.size(); ++k) {
    const Day d = day_of(series[k].timestamp);
    if (d != current_day) {
      flag_run(run_begin, run_begin + run_len);
      run_len = 0;
      running_max = 0.0;
      current_day = d;
    }
    const double p = series[k].power();
    // A candidate sits on the running maximum without having jumped above it.
    const bool candidate = p > 0.0 && running_max > 0.0 && p >= (1.0 - band) * std::max(running_max, p) &&
                           p <= (1.0 + band) * running_max;
    if (candidate) {
      if (run_len == 0) run_begin = k;
      ++run_len;
    } else {
      flag_run(run_begin, run_begin + run_len);
      run_len = 0;
    }
    running_max = std::max(running_max, p);
  }
  flag_run(run_begin, run_begin + run_len);
}

void remove_outliers_regression(std::span<const TelemetryRecord> series, QualityMask& mask, double k_sigma) {
  require_nonempty(series, mask);
  std::vector<std::size_t> usable;
  for (std::size_t k = 0; k < series.size(); ++k)
    if (!mask[k].night && !mask[k].clipped) usable.push_back(k);
  if (usable.size() < 10)
    throw DataError("outlier regression needs at least 10 usable records, got " + std::to_string(usable.size()));

  std::vector<double> g, t, v, i;
  for (std::size_t k : usable) {
    g.push_back(series[k].g_poa);
    t.push_back(series[k].t_module);
    v.push_back(series[k].v_dc);
    i.push_back(series[k].i_dc);
  }
  std::vector<double> res_i, res_v;
  const double sd_i = residuals(g, i, res_i);
  const double sd_v = residuals(t, v, res_v);

  auto mean_abs = [](const std::vector<double>& xs) {
    double s = 0.0;
    for (double x : xs) s += std::abs(x);
    return s / static_cast<double>(xs.size());
  };
  // Treat residual noise at rounding level as an exact fit.
  const bool exact_i = sd_i <= 1e-12 * std::max(1.0, mean_abs(i));
  const bool exact_v = sd_v <= 1e-12 * std::max(1.0, mean_abs(v));
  for (std::size_t n = 0; n < usable.size(); ++n) {
    QualityFlags& f = mask[usable[n]];
    f.outlier_current = !exact_i && std::abs(res_i[n]) > k_sigma * sd_i;
    f.outlier_voltage = !exact_v && std::abs(res_v[n]) > k_sigma * sd_v;
  }
}

QualityMask preprocess(std::span<const TelemetryRecord> series, const PreprocessOptions& opts) {
  QualityMask mask(series.size());
  filter_night(series, mask, opts.g_min);
  filter_clipping(series, mask, opts.clipping);
  remove_outliers_regression(series, mask, opts.k_sigma);
  return mask;
}

TelemetrySeries retained_records(std::span<const TelemetryRecord> series, const QualityMask& mask) {
  TelemetrySeries out;
  for (std::size_t k = 0; k < series.size(); ++k)
    if (mask[k].retained()) out.push_back(series[k]);
  return out;
}

}  // namespace pvprof
