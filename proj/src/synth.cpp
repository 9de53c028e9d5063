#include "pvprof/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "pvprof/error.hpp"

namespace pvprof {

namespace {

constexpr std::uint64_t kCloudStream = 0x636c6f7564ULL;
constexpr std::uint64_t kNoiseStream = 0x6e6f697365ULL;

std::mt19937_64 day_stream(std::uint64_t seed, std::uint64_t stream, int day) {
  return std::mt19937_64(splitmix64(splitmix64(seed ^ stream) + static_cast<std::uint64_t>(day)));
}

double elapsed_days(const WeatherProfile& profile, Instant t) {
  return static_cast<double>((t - Instant{profile.start_day}).count()) / 86400.0;
}

int day_index(const WeatherProfile& profile, Instant t) {
  return static_cast<int>((day_of(t) - profile.start_day).count());
}

// Operating point above the MPP voltage where module power equals target.
IvPoint clipped_point(const SdmParamsOperating& op, const IvPoint& mpp, double target) {
  double lo = mpp.v + mpp.i * op.r_s;
  double hi = open_circuit_voltage(op);
  for (int k = 0; k < 200 && hi - lo > 1e-12 * hi; ++k) {
    const double mid = 0.5 * (lo + hi);
    const double i = current_at_diode_voltage(mid, op);
    if ((mid - i * op.r_s) * i > target)
      lo = mid;
    else
      hi = mid;
  }
  IvPoint pt;
  pt.i = current_at_diode_voltage(lo, op);
  pt.v = lo - pt.i * op.r_s;
  pt.p = pt.v * pt.i;
  return pt;
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void validate(const WeatherProfile& p) {
  const auto day_minutes = std::chrono::minutes{24 * 60};
  if (p.days < 1) throw ConfigError("synthetic profile needs at least one day");
  if (p.cadence.count() <= 0 || day_minutes.count() % p.cadence.count() != 0)
    throw ConfigError("cadence must divide 24 h");
  if (!(p.cloud_depth >= 0.0 && p.cloud_depth <= 1.0)) throw ConfigError("cloud_depth must lie in [0, 1]");
  if (!(p.day_length_hours > 0.0 && p.day_length_hours <= 24.0)) throw ConfigError("day length must lie in (0, 24]");
  if (!(p.peak_irradiance >= 0.0)) throw ConfigError("peak irradiance must be >= 0");
  if (!(p.cloud_timescale_minutes > 0.0)) throw ConfigError("cloud timescale must be positive");
}

std::vector<Instant> sample_times(const WeatherProfile& profile) {
  validate(profile);
  const auto per_day = (24 * 60) / profile.cadence.count();
  std::vector<Instant> times;
  times.reserve(static_cast<std::size_t>(per_day * profile.days));
  for (long k = 0; k < per_day * profile.days; ++k) times.push_back(Instant{profile.start_day} + k * profile.cadence);
  return times;
}

double clear_sky_irradiance(const WeatherProfile& profile, double hour) {
  const double sunrise = 12.0 - 0.5 * profile.day_length_hours;
  const double x = (hour - sunrise) / profile.day_length_hours;
  if (x <= 0.0 || x >= 1.0) return 0.0;
  return profile.peak_irradiance * std::pow(std::max(0.0, std::sin(std::numbers::pi * x)), 1.2);
}

std::vector<double> clear_sky_profile(const WeatherProfile& profile) {
  std::vector<double> g;
  for (Instant t : sample_times(profile)) g.push_back(clear_sky_irradiance(profile, hour_of_day(t)));
  return g;
}

std::vector<double> cloud_attenuation(const WeatherProfile& profile) {
  const auto times = sample_times(profile);
  std::vector<double> att(times.size(), 1.0);
  const double rho = std::exp(-static_cast<double>(profile.cadence.count()) / profile.cloud_timescale_minutes);
  const double innovation = std::sqrt(1.0 - rho * rho);
  int current = -1;
  std::mt19937_64 rng;
  std::normal_distribution<double> normal(0.0, 1.0);
  double state = 0.0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    const int d = day_index(profile, times[k]);
    if (!profile.cloud_days.contains(d)) continue;
    if (d != current) {
      current = d;
      rng = day_stream(profile.seed, kCloudStream, d);
      normal.reset();
      state = normal(rng);
    } else {
      state = rho * state + innovation * normal(rng);
    }
    const double u = 0.5 * std::erfc(-state / std::numbers::sqrt2);
    att[k] = 1.0 - profile.cloud_depth * u;
  }
  return att;
}

std::vector<double> apply_clouds(const std::vector<double>& irradiance, const WeatherProfile& profile) {
  const auto att = cloud_attenuation(profile);
  if (att.size() != irradiance.size()) throw ConfigError("irradiance length does not match the profile");
  std::vector<double> out(irradiance.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = irradiance[k] * att[k];
  return out;
}

double ambient_temperature(double ambient_base, double hour) {
  return ambient_base + 5.0 * std::cos(2.0 * std::numbers::pi * (hour - 14.0) / 24.0);
}

std::vector<double> module_temperature(const std::vector<double>& irradiance, const std::vector<Instant>& times,
                                       double ambient_base) {
  if (irradiance.size() != times.size()) throw ConfigError("irradiance and timestamps differ in length");
  std::vector<double> t(irradiance.size());
  for (std::size_t k = 0; k < t.size(); ++k)
    t[k] = ambient_temperature(ambient_base, hour_of_day(times[k])) + irradiance[k] / 800.0 * 28.0;
  return t;
}

double Trajectory::factor(double elapsed, double span_days) const {
  switch (kind) {
    case Kind::linear:
      return 1.0 + relative_change * elapsed / span_days;
    case Kind::step:
      return elapsed >= step_day ? 1.0 + relative_change : 1.0;
    case Kind::constant:
      break;
  }
  return 1.0;
}

SdmParamsRef DegradationScenario::at(const SdmParamsRef& base, double elapsed, double span_days) const {
  auto a = to_array(base);
  for (std::size_t j = 0; j < kParamCount; ++j) a[j] *= trajectory[j].factor(elapsed, span_days);
  return from_array(a);
}

SyntheticDataset generate_dataset(const SdmParamsRef& true_params, const ArrayTopology& topo,
                                  const WeatherProfile& profile, const DegradationScenario& scenario,
                                  const SynthOptions& options) {
  validate(true_params);
  validate(topo);
  validate(profile);
  if (!(options.noise_v >= 0.0) || !(options.noise_i >= 0.0)) throw ConfigError("noise levels must be >= 0");

  const auto times = sample_times(profile);
  const auto g = apply_clouds(clear_sky_profile(profile), profile);
  const auto tm = module_temperature(g, times, profile.ambient_base);
  const double span = profile.days;

  SyntheticDataset ds;
  ds.truth.true_params = true_params;
  ds.truth.topology = topo;
  ds.truth.profile = profile;
  ds.truth.scenario = scenario;
  ds.truth.options = options;
  ds.records.reserve(times.size());

  int current = -1;
  std::mt19937_64 rng;
  std::normal_distribution<double> normal(0.0, 1.0);
  const double arrays = static_cast<double>(topo.modules_per_string) * topo.strings_in_parallel;
  for (std::size_t k = 0; k < times.size(); ++k) {
    const int d = day_index(profile, times[k]);
    const double elapsed = elapsed_days(profile, times[k]);
    const SdmParamsRef params = scenario.at(true_params, elapsed, span);
    if (d != current) {
      current = d;
      rng = day_stream(profile.seed, kNoiseStream, d);
      normal.reset();
      ds.truth.days.push_back({day_of(times[k]), params, profile.cloud_days.contains(d)});
    }
    try {
      validate(params);
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("degradation trajectory produces invalid parameters: ") + e.what());
    }
    if (options.bounds && !options.bounds->contains(params))
      throw ConfigError("degradation trajectory leaves the fitting bounds on day " + std::to_string(d));

    TelemetryRecord r;
    r.timestamp = times[k];
    r.g_poa = g[k];
    r.t_module = tm[k];
    const SdmParamsOperating op = translate_to_operating(params, {g[k], tm[k]}, topo.cells_in_series, options.alpha_isc);
    IvPoint pt = find_mpp(op);
    if (options.p_dc_limit && pt.p * arrays > *options.p_dc_limit) {
      pt = clipped_point(op, pt, *options.p_dc_limit / arrays);
      ds.truth.clipped_indices.push_back(k);
    }
    // Both draws happen for every sample so the stream does not depend on
    // which samples are dark.
    const double ev = normal(rng);
    const double ei = normal(rng);
    r.v_dc = std::max(0.0, pt.v * topo.modules_per_string * (1.0 + options.noise_v * ev));
    r.i_dc = pt.i * topo.strings_in_parallel * (1.0 + options.noise_i * ei);
    ds.records.push_back(r);
  }
  return ds;
}

}  // namespace pvprof
