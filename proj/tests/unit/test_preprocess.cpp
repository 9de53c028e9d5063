#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "pvprof/error.hpp"
#include "pvprof/preprocess.hpp"
#include "pvprof/synth.hpp"

using namespace pvprof;
using pvprof::testing::kCells;
using pvprof::testing::kReferenceModule;

namespace {

TelemetrySeries clean_days(int days, std::optional<double> limit = std::nullopt, const ArrayTopology& topo = {kCells, 10, 2}) {
  WeatherProfile p;
  p.days = days;
  SynthOptions so;
  so.noise_v = so.noise_i = 0.0;
  so.p_dc_limit = limit;
  return generate_dataset(kReferenceModule, topo, p, {}, so).records;
}

Instant at_minute(int m) { return Instant{std::chrono::sys_days{std::chrono::year{2020} / 6 / 1}} + std::chrono::minutes{m}; }

// i = 0.01 g + noise, v = 400 - 1.5 t + noise.
TelemetrySeries linear_gaussian(int n, std::uint64_t seed, double noise) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ug(100.0, 1000.0), ut(10.0, 60.0);
  std::normal_distribution<double> e(0.0, 1.0);
  TelemetrySeries s;
  for (int k = 0; k < n; ++k) {
    TelemetryRecord r;
    r.timestamp = at_minute(k);
    r.g_poa = ug(rng);
    r.t_module = ut(rng);
    r.i_dc = 0.01 * r.g_poa + noise * e(rng);
    r.v_dc = 400.0 - 1.5 * r.t_module + 100.0 * noise * e(rng);
    s.push_back(r);
  }
  return s;
}

std::size_t count(const QualityMask& m, bool QualityFlags::*flag) {
  return static_cast<std::size_t>(std::count_if(m.begin(), m.end(), [&](const QualityFlags& f) { return f.*flag; }));
}

}  // namespace

TEST_CASE("night filter uses a strict threshold") {
  TelemetrySeries s(3);
  for (int k = 0; k < 3; ++k) s[k].timestamp = at_minute(k);
  s[0].g_poa = 0.0;
  s[1].g_poa = 50.0;
  s[2].g_poa = 49.999;
  QualityMask m(3);
  filter_night(s, m, 50.0);
  CHECK(m[0].night);
  CHECK_FALSE(m[1].night);
  CHECK(m[2].night);
  CHECK(m[1].retained());

  // Count against an independent scan of the generated profile.
  WeatherProfile p;
  p.days = 1;
  const auto g = clear_sky_profile(p);
  const auto day = clean_days(1);
  QualityMask dm(day.size());
  filter_night(day, dm, 50.0);
  std::size_t dark = 0;
  for (double x : g) dark += x < 50.0 ? 1 : 0;
  CHECK(count(dm, &QualityFlags::night) == dark);
  CHECK(dark > 40);
  CHECK(dark < 60);

  QualityMask empty;
  CHECK_THROWS_AS(filter_night({}, empty, 50.0), DataError);
}

TEST_CASE("clipping with a known limit") {
  TelemetrySeries s(2);
  s[0].timestamp = at_minute(0);
  s[1].timestamp = at_minute(1);
  s[0].v_dc = 1000.0;
  s[0].i_dc = 99.0;  // 99 kW
  s[1].v_dc = 1000.0;
  s[1].i_dc = 97.0;
  QualityMask m(2);
  ClippingOptions o;
  o.p_ac_limit = 100e3;
  filter_clipping(s, m, o);
  CHECK(m[0].clipped);
  CHECK_FALSE(m[1].clipped);
}

TEST_CASE("plateau detection: none on smooth days, the injected window on clipped days") {
  const auto smooth = clean_days(3);
  QualityMask m(smooth.size());
  filter_clipping(smooth, m, {});
  CHECK(count(m, &QualityFlags::clipped) == 0);

  // Limit chosen so clipping lasts roughly three hours around noon.
  double pmax = 0.0;
  for (const auto& r : smooth) pmax = std::max(pmax, r.power());
  WeatherProfile p;
  p.days = 2;
  SynthOptions so;
  so.noise_v = so.noise_i = 0.0;
  so.p_dc_limit = 0.92 * pmax;
  const auto ds = generate_dataset(kReferenceModule, {kCells, 10, 2}, p, {}, so);
  const auto& truth = ds.truth.clipped_indices;
  REQUIRE(truth.size() >= 20);  // about 11-13 samples per day
  QualityMask cm(ds.records.size());
  filter_clipping(ds.records, cm, {});
  for (std::size_t k = 0; k < ds.records.size(); ++k) {
    const bool injected = std::binary_search(truth.begin(), truth.end(), k);
    if (cm[k].clipped == injected) continue;
    // Disagreement only at the window edges.
    const bool edge = (k > 0 && std::binary_search(truth.begin(), truth.end(), k - 1)) ||
                      std::binary_search(truth.begin(), truth.end(), k + 1);
    CHECK_MESSAGE(edge, "sample " << k << " misclassified away from the clip window");
  }
  std::size_t flagged = count(cm, &QualityFlags::clipped);
  CHECK(flagged + 2 * 2 >= truth.size());
  CHECK(flagged <= truth.size() + 2 * 2);
}

TEST_CASE("outlier regression: exact fits flag nothing") {
  TelemetrySeries s;
  for (int k = 0; k < 40; ++k) {
    TelemetryRecord r;
    r.timestamp = at_minute(k);
    r.g_poa = 100.0 + 20.0 * k;
    r.t_module = 10.0 + 0.5 * k;
    r.i_dc = 0.02 * r.g_poa + 0.1;
    r.v_dc = 500.0 - 2.0 * r.t_module;
    s.push_back(r);
  }
  for (double k_sigma : {0.01, 1.0, 3.0}) {
    QualityMask m(s.size());
    remove_outliers_regression(s, m, k_sigma);
    CHECK(count(m, &QualityFlags::outlier_current) == 0);
    CHECK(count(m, &QualityFlags::outlier_voltage) == 0);
  }
  QualityMask small(9);
  CHECK_THROWS_AS(remove_outliers_regression(std::span(s).first(9), small, 3.0), DataError);
}

TEST_CASE("outlier regression: a single corrupted current is the only flag") {
  auto s = clean_days(1);
  QualityMask base(s.size());
  filter_night(s, base, 50.0);
  // Corrupt one mid-morning daylight record.
  std::size_t victim = 0;
  for (std::size_t k = 0; k < s.size(); ++k)
    if (hour_of_day(s[k].timestamp) == 10.0) victim = k;
  REQUIRE(victim > 0);
  s[victim].i_dc *= 10.0;
  QualityMask m = base;
  remove_outliers_regression(s, m, 3.0);
  for (std::size_t k = 0; k < s.size(); ++k) {
    CHECK(m[k].outlier_current == (k == victim));
  }
}

TEST_CASE("outlier regression: flagged fraction under Gaussian noise") {
  std::size_t flagged = 0, total = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto s = linear_gaussian(2000, seed, 0.05);
    QualityMask m(s.size());
    remove_outliers_regression(s, m, 3.0);
    std::size_t f = 0;
    for (const auto& q : m) f += q.retained() ? 0 : 1;
    const double frac = static_cast<double>(f) / static_cast<double>(s.size());
    CHECK(frac >= 0.001);
    CHECK(frac <= 0.015);
    flagged += f;
    total += s.size();
  }
  CHECK(flagged > 0);
  CHECK(total == 20000);
}

TEST_CASE("filters are idempotent, ordered and only remove records") {
  WeatherProfile p;
  p.days = 2;
  p.cloud_days = {1};
  SynthOptions so;
  const auto s = generate_dataset(kReferenceModule, {kCells, 10, 2}, p, {}, so).records;

  QualityMask once(s.size());
  filter_night(s, once, 50.0);
  QualityMask twice = once;
  filter_night(s, twice, 50.0);
  CHECK(once == twice);

  filter_clipping(s, once, {});
  twice = once;
  filter_clipping(s, twice, {});
  CHECK(once == twice);

  remove_outliers_regression(s, once, 3.0);
  twice = once;
  remove_outliers_regression(s, twice, 3.0);
  CHECK(once == twice);

  PreprocessOptions opts;
  const QualityMask full = preprocess(s, opts);
  CHECK(full == once);
  CHECK(preprocess(s, opts) == full);

  const auto kept = retained_records(s, full);
  CHECK(kept.size() <= s.size());
  double p_all = 0.0, p_kept = 0.0;
  for (const auto& r : s) p_all += r.power();
  for (const auto& r : kept) p_kept += r.power();
  CHECK(p_kept <= p_all);
  for (std::size_t k = 0; k < s.size(); ++k) {
    const auto& f = full[k];
    CHECK(f.retained() == !(f.night || f.clipped || f.outlier_current || f.outlier_voltage));
  }
}
