#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "fixtures.hpp"
#include "pvprof/error.hpp"
#include "pvprof/io.hpp"
#include "pvprof/param_fit.hpp"
#include "pvprof/synth.hpp"

using namespace pvprof;
using pvprof::testing::kCells;
using pvprof::testing::kReferenceModule;

namespace {

ArrayTopology single_module() { return {kCells, 1, 1}; }

FitOptions loss_options() {
  FitOptions o;
  o.bounds = ParameterBounds::defaults(9.5);
  o.v_scale = 36.0;
  o.i_scale = 9.0;
  return o;
}

std::string csv_of(const TelemetrySeries& s) {
  std::ostringstream out;
  write_telemetry_csv(out, s);
  return out.str();
}

}  // namespace

TEST_CASE("clear-sky profile: noon, midnight and daily energy") {
  WeatherProfile p;
  CHECK(clear_sky_irradiance(p, 12.0) == 1000.0);
  CHECK(clear_sky_irradiance(p, 0.0) == 0.0);
  CHECK(clear_sky_irradiance(p, 5.9) == 0.0);
  CHECK(clear_sky_irradiance(p, 18.1) == 0.0);

  // Sampled energy (Wh/m^2) against Simpson quadrature of the closed form.
  p.days = 1;
  const auto g = clear_sky_profile(p);
  REQUIRE(g.size() == 96);
  double sampled = 0.0;
  for (double x : g) sampled += x * 0.25;
  const int n = 200000;
  const double h = 12.0 / n;
  double simpson = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double w = (k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0);
    simpson += w * 1000.0 * std::pow(std::sin(std::numbers::pi * k / n), 1.2);
  }
  simpson *= h / 3.0;
  CHECK(std::abs(sampled - simpson) / simpson < 1e-3);
}

TEST_CASE("clouds: identity at zero depth, seeded, bounded") {
  WeatherProfile p;
  p.days = 4;
  p.cloud_days = {0, 1, 2, 3};
  const auto clear = clear_sky_profile(p);

  WeatherProfile flat = p;
  flat.cloud_depth = 0.0;
  CHECK(apply_clouds(clear, flat) == clear);

  CHECK(apply_clouds(clear, p) == apply_clouds(clear, p));
  WeatherProfile other = p;
  other.seed = 2;
  CHECK(apply_clouds(clear, other) != apply_clouds(clear, p));

  WeatherProfile many = p;
  many.days = 105;
  for (int d = 0; d < many.days; ++d) many.cloud_days.insert(d);
  const auto att = cloud_attenuation(many);
  REQUIRE(att.size() >= 10000);
  const auto [lo, hi] = std::minmax_element(att.begin(), att.end());
  CHECK(*lo >= 1.0 - many.cloud_depth);
  CHECK(*hi <= 1.0);
  // The process actually explores the range.
  CHECK(*lo < 1.0 - 0.9 * many.cloud_depth);
  CHECK(*hi > 1.0 - 0.1 * many.cloud_depth);

  // Days outside cloud_days are untouched.
  WeatherProfile some = p;
  some.cloud_days = {1};
  const auto a = cloud_attenuation(some);
  for (std::size_t k = 0; k < 96; ++k) CHECK(a[k] == 1.0);
}

TEST_CASE("module temperature surrogate") {
  WeatherProfile p;
  p.days = 1;
  const auto times = sample_times(p);
  const std::vector<double> dark(times.size(), 0.0);
  const auto t0 = module_temperature(dark, times, 20.0);
  for (std::size_t k = 0; k < times.size(); ++k) CHECK(t0[k] == ambient_temperature(20.0, hour_of_day(times[k])));
  CHECK(ambient_temperature(20.0, 14.0) == doctest::Approx(25.0).epsilon(1e-15));
  CHECK(ambient_temperature(20.0, 2.0) == doctest::Approx(15.0).epsilon(1e-15));

  const std::vector<double> bright(times.size(), 800.0);
  const auto t1 = module_temperature(bright, times, 20.0);
  for (std::size_t k = 0; k < times.size(); ++k) CHECK(t1[k] - t0[k] == doctest::Approx(28.0).epsilon(1e-14));

  // Full-day profile against the pointwise formula.
  const auto g = clear_sky_profile(p);
  const auto tm = module_temperature(g, times, 20.0);
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double h = static_cast<double>(k) / 4.0;
    const double want = 20.0 + 5.0 * std::cos(2.0 * std::numbers::pi * (h - 14.0) / 24.0) + g[k] / 800.0 * 28.0;
    CHECK(tm[k] == doctest::Approx(want).epsilon(1e-13));
  }
}

TEST_CASE("profile validation") {
  WeatherProfile p;
  p.cadence = std::chrono::minutes{7};
  CHECK_THROWS_AS(validate(p), ConfigError);
  p = WeatherProfile{};
  p.cloud_depth = 1.5;
  CHECK_THROWS_AS(validate(p), ConfigError);
  p = WeatherProfile{};
  p.days = 0;
  CHECK_THROWS_AS(validate(p), ConfigError);
}

TEST_CASE("noiseless generation lies on the model manifold") {
  WeatherProfile p;
  p.days = 2;
  p.cloud_days = {1};
  SynthOptions so;
  so.noise_v = so.noise_i = 0.0;
  const auto ds = generate_dataset(kReferenceModule, single_module(), p, {}, so);
  REQUIRE(ds.records.size() == 192);
  TelemetrySeries day;
  for (const auto& r : ds.records)
    if (r.g_poa >= 50.0) day.push_back(r);
  CHECK(loss(kReferenceModule, day, single_module(), loss_options()) < 1e-12);

  REQUIRE(ds.truth.days.size() == 2);
  CHECK_FALSE(ds.truth.days[0].cloudy);
  CHECK(ds.truth.days[1].cloudy);
  CHECK(ds.truth.days[0].params == kReferenceModule);
}

TEST_CASE("generation is a pure function of inputs and seed") {
  WeatherProfile p;
  p.days = 3;
  p.cloud_days = {0, 2};
  SynthOptions so;
  const auto a = generate_dataset(kReferenceModule, {kCells, 10, 2}, p, {}, so);
  const auto b = generate_dataset(kReferenceModule, {kCells, 10, 2}, p, {}, so);
  CHECK(csv_of(a.records) == csv_of(b.records));
  p.seed = 99;
  const auto c = generate_dataset(kReferenceModule, {kCells, 10, 2}, p, {}, so);
  CHECK(csv_of(a.records) != csv_of(c.records));

  // Per-day streams: changing the number of days leaves earlier days alone.
  WeatherProfile shorter = p;
  shorter.days = 2;
  const auto d = generate_dataset(kReferenceModule, {kCells, 10, 2}, shorter, {}, so);
  const auto e = generate_dataset(kReferenceModule, {kCells, 10, 2}, p, {}, so);
  for (std::size_t k = 0; k < d.records.size(); ++k) CHECK(d.records[k] == e.records[k]);
}

TEST_CASE("degradation trajectories") {
  Trajectory lin{Trajectory::Kind::linear, 0.2, 0};
  CHECK(lin.factor(0.0, 60.0) == 1.0);
  CHECK(lin.factor(30.0, 60.0) == doctest::Approx(1.1));
  CHECK(lin.factor(60.0, 60.0) == doctest::Approx(1.2));
  Trajectory step{Trajectory::Kind::step, -0.2, 15};
  CHECK(step.factor(14.99, 30.0) == 1.0);
  CHECK(step.factor(15.0, 30.0) == doctest::Approx(0.8));

  WeatherProfile p;
  p.days = 30;
  DegradationScenario s;
  s.trajectory[kIph] = step;
  SynthOptions so;
  so.noise_v = so.noise_i = 0.0;
  const auto ds = generate_dataset(kReferenceModule, single_module(), p, s, so);
  CHECK(ds.truth.days[14].params.i_ph_ref == kReferenceModule.i_ph_ref);
  CHECK(ds.truth.days[15].params.i_ph_ref == doctest::Approx(0.8 * kReferenceModule.i_ph_ref));

  // A trajectory that leaves the fitting box is rejected.
  DegradationScenario bad;
  bad.trajectory[kRs] = {Trajectory::Kind::linear, 20.0, 0};
  so.bounds = ParameterBounds::defaults(9.5);
  CHECK_THROWS_AS(generate_dataset(kReferenceModule, single_module(), p, bad, so), ConfigError);
}

TEST_CASE("clipping holds array power at the limit") {
  WeatherProfile p;
  p.days = 1;
  SynthOptions so;
  so.noise_v = so.noise_i = 0.0;
  const ArrayTopology topo{kCells, 10, 1};
  const auto free_run = generate_dataset(kReferenceModule, topo, p, {}, so);
  double pmax = 0.0;
  for (const auto& r : free_run.records) pmax = std::max(pmax, r.power());
  so.p_dc_limit = 0.85 * pmax;
  const auto clipped = generate_dataset(kReferenceModule, topo, p, {}, so);
  REQUIRE_FALSE(clipped.truth.clipped_indices.empty());
  for (std::size_t k : clipped.truth.clipped_indices) {
    CHECK(clipped.records[k].power() == doctest::Approx(*so.p_dc_limit).epsilon(1e-9));
    CHECK(free_run.records[k].power() > *so.p_dc_limit);
    // Clipped operation sits above the MPP voltage.
    CHECK(clipped.records[k].v_dc > free_run.records[k].v_dc);
  }
  for (std::size_t k = 0; k < clipped.records.size(); ++k)
    if (!std::binary_search(clipped.truth.clipped_indices.begin(), clipped.truth.clipped_indices.end(), k))
      CHECK(clipped.records[k] == free_run.records[k]);
}
