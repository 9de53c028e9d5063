#include "pvprof/param_fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pvprof/error.hpp"
#include "pvprof/optimizer.hpp"

namespace pvprof {

namespace {

using Coords = std::vector<double>;

// Maps parameters to the optimizer's unit box: log10 or linear per
// parameter, then affinely onto [0, 1] using the bounds.
struct CoordinateMap {
  std::array<double, kParamCount> lo{}, hi{};
  std::array<bool, kParamCount> log_space{};

  explicit CoordinateMap(const FitOptions& opts) : log_space(opts.log_space) {
    for (std::size_t j = 0; j < kParamCount; ++j) {
      const Interval& r = opts.bounds.range[j];
      lo[j] = log_space[j] ? std::log10(r.lo) : r.lo;
      hi[j] = log_space[j] ? std::log10(r.hi) : r.hi;
    }
  }

  Coords to_coords(const SdmParamsRef& p) const {
    const auto a = to_array(p);
    Coords u(kParamCount);
    for (std::size_t j = 0; j < kParamCount; ++j) {
      const double z = log_space[j] ? std::log10(a[j]) : a[j];
      u[j] = (z - lo[j]) / (hi[j] - lo[j]);
    }
    return u;
  }

  SdmParamsRef to_params(const Coords& u) const {
    std::array<double, kParamCount> a{};
    for (std::size_t j = 0; j < kParamCount; ++j) {
      const double z = lo[j] + std::clamp(u[j], 0.0, 1.0) * (hi[j] - lo[j]);
      a[j] = log_space[j] ? std::pow(10.0, z) : z;
    }
    return from_array(a);
  }
};

double guarded_loss(const SdmParamsRef& p, std::span<const TelemetryRecord> window, const ArrayTopology& topo,
                    const FitOptions& opts) {
  try {
    return evaluate_loss(p, window, topo, opts).loss;
  } catch (const Error&) {
    return std::numeric_limits<double>::infinity();
  }
}

void validate_options(const FitOptions& opts) {
  for (std::size_t j = 0; j < kParamCount; ++j) {
    const Interval& r = opts.bounds.range[j];
    if (!(r.lo < r.hi) || (opts.log_space[j] && !(r.lo > 0.0)))
      throw ConfigError("invalid fitting bounds for parameter " + std::to_string(j));
  }
  if (!(opts.v_scale > 0.0) || !(opts.i_scale > 0.0)) throw ConfigError("loss scales must be positive");
  if (opts.max_iterations < 1) throw ConfigError("max_iterations must be >= 1");
}

}  // namespace

std::array<double, kParamCount> to_array(const SdmParamsRef& p) {
  return {p.i_ph_ref, p.i_0_ref, p.r_s, p.r_sh_ref, p.n_diode};
}

SdmParamsRef from_array(const std::array<double, kParamCount>& a) { return {a[0], a[1], a[2], a[3], a[4]}; }

bool ParameterBounds::contains(const SdmParamsRef& p) const {
  const auto a = to_array(p);
  for (std::size_t j = 0; j < kParamCount; ++j)
    if (!range[j].contains(a[j])) return false;
  return true;
}

SdmParamsRef ParameterBounds::clamp(const SdmParamsRef& p) const {
  auto a = to_array(p);
  for (std::size_t j = 0; j < kParamCount; ++j) a[j] = std::clamp(a[j], range[j].lo, range[j].hi);
  return from_array(a);
}

ParameterBounds ParameterBounds::defaults(double datasheet_isc) {
  ParameterBounds b;
  b.range[kIph] = {0.1 * datasheet_isc, 2.0 * datasheet_isc};
  b.range[kI0] = {1e-13, 1e-5};
  b.range[kRs] = {1e-4, 5.0};
  b.range[kRsh] = {10.0, 1e5};
  b.range[kN] = {0.5, 2.5};
  return b;
}

FitOptions FitOptions::from_datasheet(const Datasheet& ds, const ArrayTopology& topo) {
  validate(ds);
  validate(topo);
  FitOptions o;
  o.bounds = ParameterBounds::defaults(ds.i_sc);
  o.v_scale = ds.v_mp * topo.modules_per_string;
  o.i_scale = ds.i_mp * topo.strings_in_parallel;
  o.alpha_isc = ds.alpha_isc;
  return o;
}

SdmParamsRef initial_guess(const Datasheet& ds) {
  validate(ds);
  try {
    return fit_desoto_from_datasheet(ds);
  } catch (const NumericError&) {
    SdmParamsRef p;
    p.i_ph_ref = ds.i_sc;
    p.n_diode = 1.1;
    p.r_s = 0.5 * (ds.v_oc - ds.v_mp) / ds.i_mp;
    p.r_sh_ref = 10.0 * ds.v_mp / ds.i_mp * ds.cells_in_series;
    const double a = p.n_diode * ds.cells_in_series * constants::kBoltzmannJ *
                     (constants::kTempRefC + constants::kKelvinOffset) / constants::kElementaryCharge;
    p.i_0_ref = (ds.i_sc - ds.v_oc / p.r_sh_ref) / std::expm1(ds.v_oc / a);
    return p;
  }
}

LossEvaluation evaluate_loss(const SdmParamsRef& params, std::span<const TelemetryRecord> window,
                             const ArrayTopology& topo, const FitOptions& opts) {
  if (window.empty()) throw DataError("loss requires a nonempty window");
  LossEvaluation out;
  double sum = 0.0;
  for (const TelemetryRecord& r : window) {
    try {
      const ArrayOperatingPoint sim = simulate_array_mpp(params, topo, {r.g_poa, r.t_module}, opts.alpha_isc);
      const double dv = (r.v_dc - sim.v_dc) / opts.v_scale;
      const double di = (r.i_dc - sim.i_dc) / opts.i_scale;
      sum += dv * dv + di * di;
      ++out.used;
    } catch (const Error&) {
      ++out.skipped;
    }
  }
  if (out.skipped * 10 > window.size())
    throw NumericError("fit degeneracy: simulation failed for " + std::to_string(out.skipped) + " of " +
                       std::to_string(window.size()) + " records");
  out.loss = sum / static_cast<double>(out.used);
  return out;
}

double loss(const SdmParamsRef& params, std::span<const TelemetryRecord> window, const ArrayTopology& topo,
            const FitOptions& opts) {
  return evaluate_loss(params, window, topo, opts).loss;
}

std::array<double, kParamCount> loss_gradient(const SdmParamsRef& params, std::span<const TelemetryRecord> window,
                                              const ArrayTopology& topo, const FitOptions& opts, int stencil) {
  if (stencil != 3 && stencil != 5) throw ConfigError("gradient stencil must be 3 or 5 points");
  const CoordinateMap map(opts);
  const Coords u = map.to_coords(params);
  auto f = [&](const Coords& c) { return loss(map.to_params(c), window, topo, opts); };
  std::array<double, kParamCount> g{};
  const double h = opts.fd_step;
  for (std::size_t j = 0; j < kParamCount; ++j) {
    Coords c = u;
    auto at = [&](double offset) {
      c[j] = u[j] + offset;
      return f(c);
    };
    if (stencil == 5)
      g[j] = (-at(2 * h) + 8 * at(h) - 8 * at(-h) + at(-2 * h)) / (12 * h);
    else
      g[j] = (at(h) - at(-h)) / (2 * h);
  }
  return g;
}

FitWindowResult fit_window(std::span<const TelemetryRecord> window, const ArrayTopology& topo,
                           const SdmParamsRef& init, const FitOptions& opts) {
  validate_options(opts);
  validate(topo);
  if (window.size() < opts.min_records)
    throw DataError("fit window has " + std::to_string(window.size()) + " records, need at least " +
                    std::to_string(opts.min_records));
  if (!opts.bounds.contains(init)) throw ConfigError("initial guess lies outside the fitting bounds");

  const CoordinateMap map(opts);
  auto objective = [&](const Coords& u) { return guarded_loss(map.to_params(u), window, topo, opts); };
  const Coords u0 = map.to_coords(init);
  if (!std::isfinite(objective(u0))) throw NumericError("loss is not finite at the initial guess");

  BoundedMinimizeOptions mo;
  mo.max_iterations = opts.max_iterations;
  mo.relative_tolerance = opts.loss_tolerance;
  mo.fd_step = opts.fd_step;
  const Coords lo(kParamCount, 0.0), hi(kParamCount, 1.0);
  const BoundedMinimizeResult r = minimize_bounded(objective, u0, lo, hi, mo);

  FitWindowResult out;
  out.window_start = window.front().timestamp;
  out.window_end = window.back().timestamp;
  out.params = opts.bounds.clamp(map.to_params(r.x));
  out.final_loss = r.f;
  out.iterations = r.iterations;
  out.converged = r.converged;
  out.n_points = window.size();
  return out;
}

std::vector<FitWindowResult> rolling_fit(std::span<const TelemetryRecord> series, const ArrayTopology& topo,
                                         const SdmParamsRef& init, const FitOptions& fit_opts,
                                         const RollingFitOptions& rolling) {
  if (series.empty()) throw DataError("rolling fit requires a nonempty series");
  if (rolling.window_length.count() <= 0 || rolling.update_period.count() <= 0)
    throw ConfigError("window length and update period must be positive");
  const Instant first{day_of(series.front().timestamp)};
  const Instant end{day_of(series.back().timestamp) + std::chrono::days{1}};
  if (end - first < rolling.window_length) throw DataError("series is shorter than the fitting window");

  std::vector<FitWindowResult> results;
  SdmParamsRef warm = init;
  for (Instant t = first + rolling.window_length; t <= end; t += rolling.update_period) {
    FitWindowResult result;
    result.window_start = t - rolling.window_length;
    result.window_end = t;
    result.params = warm;
    try {
      const auto raw = slice(series, t - rolling.window_length, t);
      if (raw.empty()) throw DataError("no records in window");
      const QualityMask mask = preprocess(raw, rolling.preprocess);
      const TelemetrySeries retained = retained_records(raw, mask);
      const SdmParamsRef start = rolling.warm_start ? warm : init;
      FitWindowResult fit = fit_window(retained, topo, fit_opts.bounds.clamp(start), fit_opts);
      fit.window_start = result.window_start;
      fit.window_end = result.window_end;
      result = fit;
      if (rolling.warm_start) warm = fit.params;
    } catch (const Error& e) {
      result.error = e.what();
      result.converged = false;
    }
    results.push_back(result);
  }
  return results;
}

ForecastSeries predict_power(const SdmParamsRef& params, std::span<const TelemetryRecord> weather,
                             const ArrayTopology& topo, const FitOptions& opts, std::string model) {
  ForecastSeries out;
  out.model = std::move(model);
  out.timestamps.reserve(weather.size());
  for (const TelemetryRecord& r : weather) {
    double p = 0.0;
    if (r.g_poa >= opts.g_min) p = simulate_array_mpp(params, topo, {r.g_poa, r.t_module}, opts.alpha_isc).power();
    out.timestamps.push_back(r.timestamp);
    out.p_pred.push_back(p);
    out.p_meas.push_back(r.power());
  }
  return out;
}

ForecastSeries predict_power(const FitWindowResult& result, std::span<const TelemetryRecord> weather,
                             const ArrayTopology& topo, const FitOptions& opts) {
  if (!result.ok() || !result.converged) throw ConfigError("prediction requires a converged fit");
  return predict_power(result.params, weather, topo, opts);
}

}  // namespace pvprof
