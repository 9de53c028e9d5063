// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 when any
// criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "../unit/fixtures.hpp"
#include "json.hpp"
#include "pvprof/analysis.hpp"
#include "pvprof/baselines.hpp"
#include "pvprof/config.hpp"
#include "pvprof/datasheet.hpp"
#include "pvprof/io.hpp"
#include "pvprof/param_fit.hpp"
#include "pvprof/pipeline.hpp"
#include "pvprof/synth.hpp"

using namespace pvprof;
using pvprof::testing::kCells;
using pvprof::testing::kReferenceModule;
using pvprof::testing::rel_err;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    mx += x[k];
    my += y[k];
  }
  mx /= x.size();
  my /= y.size();
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxy += (x[k] - mx) * (y[k] - my);
    sxx += (x[k] - mx) * (x[k] - mx);
  }
  return sxy / sxx;
}

// Every metrics report produced by the suite, for the identities in #6.
std::vector<MetricsReport> g_reports;

void collect(const BenchmarkReport& r) {
  for (const auto& d : r.daily)
    if (d.metrics) g_reports.push_back(*d.metrics);
  for (const auto& a : r.aggregate)
    if (a.metrics) g_reports.push_back(*a.metrics);
  for (const auto& s : r.studies)
    for (const auto& g : s.groups)
      if (g.metrics) g_reports.push_back(*g.metrics);
}

const MetricsReport* aggregate_of(const BenchmarkReport& r, const std::string& model) {
  for (const auto& a : r.aggregate)
    if (a.model == model && a.metrics) return &*a.metrics;
  return nullptr;
}

nlohmann::json base_config() {
  return nlohmann::json::parse(R"({
    "seed": 11,
    "system": {
      "p_nominal_w": 7800,
      "topology": {"cells_in_series": 72, "modules_per_string": 12, "strings_in_parallel": 2},
      "datasheet": {"v_oc": 45.6, "i_sc": 9.32, "v_mp": 37.1, "i_mp": 8.76,
                    "alpha_isc": 0.0047, "beta_voc": -0.137, "cells_in_series": 72}
    },
    "models": {"roster": ["pvpro"], "grid": {"training_days": [3, 7]}},
    "studies": {"weather_cases": false, "sweep": false, "seasonal": false},
    "synth": {"start": "2018-05-01", "days": 10}
  })");
}

RunConfig config(const nlohmann::json& patch) {
  auto j = base_config();
  j.merge_patch(patch);
  return parse_config(j.dump());
}

FitOptions module_options() {
  FitOptions o;
  o.bounds = ParameterBounds::defaults(9.5);
  o.v_scale = 36.0;
  o.i_scale = 9.0;
  return o;
}

TelemetrySeries daylight(const TelemetrySeries& s) {
  TelemetrySeries out;
  for (const auto& r : s)
    if (r.g_poa >= 50.0) out.push_back(r);
  return out;
}

// Max of v * i over a uniform grid of the diode-node voltage, where the
// current is explicit.
double explicit_grid_pmax(const SdmParamsOperating& op, double voc, int points) {
  double best = 0.0;
  for (int k = 0; k < points; ++k) {
    const double vd = voc * k / (points - 1);
    const double i = op.i_ph - op.i_0 * std::expm1(vd / op.a_mod) - vd / op.r_sh;
    const double v = vd - i * op.r_s;
    if (v >= 0.0 && i >= 0.0) best = std::max(best, v * i);
  }
  return best;
}

// 1. Solver correctness. The time limit applies to the solver calls; the
// 10^9-evaluation reference scan is timed separately.
Outcome solver_correctness() {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_residual = 0.0, worst_mpp = 0.0, solver_s = 0.0, oracle_s = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const auto params = testing::random_csi_params(rng);
    const OperatingConditions cond{100.0 + 1000.0 * u(rng), -5.0 + 70.0 * u(rng)};
    auto t0 = Clock::now();
    const auto op = translate_to_operating(params, cond, kCells);
    const double voc = open_circuit_voltage(op);
    const double isc = short_circuit_current(op);
    for (int s = 0; s <= 20; ++s) {
      const double v = voc * s / 20.0;
      worst_residual = std::max(worst_residual, std::abs(diode_residual(v, solve_current(v, op), op)));
      const double i = isc * s / 20.0;
      worst_residual = std::max(worst_residual, std::abs(diode_residual(solve_voltage(i, op), i, op)));
    }
    const double p_mpp = find_mpp(op).p;
    solver_s += seconds_since(t0);
    t0 = Clock::now();
    const double scan = explicit_grid_pmax(op, voc, 1'000'000);
    oracle_s += seconds_since(t0);
    worst_mpp = std::max(worst_mpp, std::abs(p_mpp - scan) / scan);
  }
  return {worst_residual < 1e-9 && worst_mpp < 1e-6 && solver_s < 30.0,
          fmt("1000 sets: max residual %.2e A, max MPP deviation %.2e, solver %.2f s (oracle scan %.1f s)",
              worst_residual, worst_mpp, solver_s, oracle_s)};
}

// 2. Noiseless recovery of all five parameters.
Outcome noiseless_recovery() {
  SdmParamsRef truth = kReferenceModule;
  truth.i_ph_ref *= 0.96;
  truth.r_s *= 1.25;
  truth.r_sh_ref *= 0.8;
  WeatherProfile p;
  p.days = 3;
  p.cloud_days = {1};
  SynthOptions so;
  so.noise_v = so.noise_i = 0.0;
  const auto w = daylight(generate_dataset(truth, {kCells, 1, 1}, p, {}, so).records);
  const SdmParamsRef init = initial_guess(datasheet_from_params(kReferenceModule, kCells));
  const auto t0 = Clock::now();
  const auto r = fit_window(w, {kCells, 1, 1}, init, module_options());
  const double dt = seconds_since(t0);
  const auto a = to_array(r.params), b = to_array(truth);
  double worst = 0.0;
  for (std::size_t j = 0; j < kParamCount; ++j) worst = std::max(worst, rel_err(a[j], b[j]));
  return {r.ok() && worst < 0.01 && r.final_loss < 1e-10 && dt < 2.0,
          fmt("max parameter error %.2e, final loss %.2e, %.2f s", worst, r.final_loss, dt)};
}

// 3. Recovery under 0.5% noise.
Outcome noisy_recovery() {
  const SdmParamsRef init = initial_guess(datasheet_from_params(kReferenceModule, kCells));
  const double voc_truth =
      open_circuit_voltage(translate_to_operating(kReferenceModule, {1000.0, 25.0}, kCells));
  std::vector<double> e_iph, e_rs, e_n, e_i0, e_voc;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    WeatherProfile p;
    p.days = 3;
    p.seed = seed;
    p.cloud_days = {1};
    const auto w = daylight(generate_dataset(kReferenceModule, {kCells, 1, 1}, p, {}, SynthOptions{}).records);
    const auto r = fit_window(w, {kCells, 1, 1}, init, module_options());
    if (!r.ok()) return {false, "seed " + std::to_string(seed) + ": " + r.error};
    e_iph.push_back(rel_err(r.params.i_ph_ref, kReferenceModule.i_ph_ref));
    e_rs.push_back(rel_err(r.params.r_s, kReferenceModule.r_s));
    e_n.push_back(rel_err(r.params.n_diode, kReferenceModule.n_diode));
    e_i0.push_back(std::abs(std::log10(r.params.i_0_ref / kReferenceModule.i_0_ref)));
    e_voc.push_back(rel_err(open_circuit_voltage(translate_to_operating(r.params, {1000.0, 25.0}, kCells)), voc_truth));
  }
  const double m_iph = median(e_iph), m_rs = median(e_rs), m_n = median(e_n), m_i0 = median(e_i0);
  // The Voc check qualifies the i_0 median, so it is a median as well.
  const double m_voc = median(e_voc);
  const double voc_worst = *std::max_element(e_voc.begin(), e_voc.end());
  return {m_iph <= 0.05 && m_rs <= 0.05 && m_n <= 0.05 && m_i0 <= 1.0 && m_voc <= 0.005,
          fmt("medians i_ph %.3f, r_s %.3f, n %.3f, |log10 i_0| %.2f, STC Voc %.4f (worst seed %.4f)", m_iph, m_rs,
              m_n, m_i0, m_voc, voc_worst)};
}

// 4. Series-resistance drift tracking. Gated on noiseless telemetry; the
// 0.5% noise slope is reported alongside.
double drift_slope_ratio(double noise, std::size_t& windows) {
  WeatherProfile p;
  p.days = 60;
  for (int d = 2; d < 60; d += 5) p.cloud_days.insert(d);
  DegradationScenario sc;
  sc.trajectory[kRs] = {Trajectory::Kind::linear, 0.20, 0};
  SynthOptions so;
  so.noise_v = so.noise_i = noise;
  const auto ds = generate_dataset(kReferenceModule, {kCells, 1, 1}, p, sc, so);
  const SdmParamsRef init = initial_guess(datasheet_from_params(kReferenceModule, kCells));
  const auto fits = rolling_fit(ds.records, {kCells, 1, 1}, init, module_options(), {});
  std::vector<double> x, y;
  for (const auto& f : fits) {
    if (!f.ok()) continue;
    const auto mid = f.window_start + (f.window_end - f.window_start) / 2 - Instant{p.start_day};
    x.push_back(std::chrono::duration<double>(mid).count() / 86400.0);
    y.push_back(f.params.r_s);
  }
  windows = x.size();
  return ls_slope(x, y) / (0.20 * kReferenceModule.r_s / 60.0);
}

Outcome drift_tracking() {
  std::size_t n_clean = 0, n_noisy = 0;
  const double clean = drift_slope_ratio(0.0, n_clean);
  const double noisy = drift_slope_ratio(0.005, n_noisy);
  return {n_clean >= 50 && std::abs(clean - 1.0) < 0.15,
          fmt("%zu windows, fitted/injected slope %.3f (with 0.5%% noise: %.3f over %zu windows)", n_clean, clean,
              noisy, n_noisy)};
}

// 5. Datasheet round trip.
Outcome datasheet_round_trip() {
  std::mt19937_64 rng(5);
  double worst_sheet = 0.0, worst_param = 0.0;
  for (int k = 0; k < 50; ++k) {
    const auto truth = testing::random_csi_params(rng);
    const Datasheet ds = datasheet_from_params(truth, kCells);
    const auto fit = fit_desoto_from_datasheet(ds);
    const auto op = translate_to_operating(fit, {1000.0, 25.0}, kCells);
    const auto mpp = find_mpp(op);
    worst_sheet = std::max({worst_sheet, rel_err(short_circuit_current(op), ds.i_sc),
                            rel_err(open_circuit_voltage(op), ds.v_oc), rel_err(mpp.p, ds.v_mp * ds.i_mp)});
    const auto a = to_array(fit), b = to_array(truth);
    for (std::size_t j = 0; j < kParamCount; ++j) worst_param = std::max(worst_param, rel_err(a[j], b[j]));
  }
  return {worst_sheet < 1e-3 && worst_param < 5e-3,
          fmt("50 sets: worst Isc/Voc/Pmp error %.2e, worst parameter error %.2e", worst_sheet, worst_param)};
}

// 7. Degraded system: PVPro against the datasheet-only model.
Outcome degraded_direction() {
  RunConfig cfg = config({{"models", {{"roster", {"pvpro", "nominal"}}}}, {"synth", {{"days", 12}}}});
  SdmParamsRef truth = nominal_params(cfg);
  truth.i_ph_ref *= 0.85;
  cfg.synth.true_params = truth;
  const auto rep = run_benchmark(cfg, synthesize(cfg).records);
  collect(rep);
  const auto* pv = aggregate_of(rep, "pvpro");
  const auto* nom = aggregate_of(rep, "nominal");
  if (!pv || !nom) return {false, "missing aggregate"};
  return {pv->nmae < nom->nmae && nom->nmae >= 3.0 * pv->nmae,
          fmt("nMAE pvpro %.4f, nominal %.4f (ratio %.1f)", pv->nmae, nom->nmae, nom->nmae / pv->nmae)};
}

// 8. Short fitting windows.
Outcome short_windows() {
  auto run = [](int window) {
    RunConfig cfg = config({{"synth", {{"days", 70}, {"cloud_days", {3, 9, 17, 26, 38, 45, 52, 61, 66}}}},
                            {"fit", {{"window_days", window}}},
                            {"studies", {{"evaluation_start", "2018-06-30"}, {"evaluation_days", 10}}}});
    const auto rep = run_benchmark(cfg, synthesize(cfg).records);
    collect(rep);
    const auto* m = aggregate_of(rep, "pvpro");
    return m ? m->nmae : NAN;
  };
  const double n3 = run(3), n60 = run(60);
  return {n3 <= 2.0 * n60, fmt("nMAE 3-day %.5f, 60-day %.5f (ratio %.2f)", n3, n60, n3 / n60)};
}

// 9. Weather-case robustness.
Outcome weather_robustness() {
  int wins = 0;
  std::string detail;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    RunConfig cfg = config({{"seed", seed},
                            {"models", {{"roster", {"pvpro", "kr"}}}},
                            {"studies", {{"weather_cases", true}}},
                            {"synth", {{"days", 16}, {"cloud_days", {1, 3, 4, 7, 9, 10, 12, 15}}}}});
    const auto rep = run_benchmark(cfg, synthesize(cfg).records);
    collect(rep);
    double cv_pv = NAN, cv_kr = NAN;
    for (const auto& s : rep.studies) {
      if (s.study != "weather_cases" || !s.cv_of_cases) continue;
      if (s.model == "pvpro") cv_pv = *s.cv_of_cases;
      if (s.model == "kr") cv_kr = *s.cv_of_cases;
    }
    wins += cv_pv < cv_kr ? 1 : 0;
    detail += fmt("%s%.3f/%.3f", seed == 1 ? "" : ", ", cv_pv, cv_kr);
  }
  return {wins >= 4, fmt("pvpro below kr in %d of 5 seeds (CV pvpro/kr: ", wins) + detail + ")"};
}

// 10. Smart persistence on irradiance-proportional days.
Outcome persistence_exactness() {
  RunConfig cfg = config({{"models", {{"roster", {"smart_persistence"}}}}});
  TelemetrySeries s;
  WeatherProfile p;
  p.days = 6;
  const auto g = clear_sky_profile(p);
  const auto times = sample_times(p);
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double day_factor = 0.7 + 0.05 * static_cast<double>(k / 96);
    TelemetryRecord r;
    r.timestamp = times[k];
    r.g_poa = g[k] * day_factor;
    r.t_module = 25.0;
    r.v_dc = r.g_poa > 0.0 ? 400.0 : 0.0;
    r.i_dc = 7.5 * r.g_poa / 400.0;
    s.push_back(r);
  }
  const auto rep = run_benchmark(cfg, s);
  collect(rep);
  const auto* m = aggregate_of(rep, "smart_persistence");
  if (!m) return {false, "missing aggregate"};
  return {m->nmae < 1e-12, fmt("nMAE %.2e over %zu samples", m->nmae, m->n_samples)};
}

// 11. Temporal hygiene.
Outcome temporal_canary() {
  const RunConfig cfg = config({{"models", {{"roster", {"pvpro", "smart_persistence", "naive_persistence", "nominal",
                                                          "lr", "kr"}}}},
                                {"synth", {{"days", 14}, {"cloud_days", {2, 5, 6, 9, 12}}}}});
  const auto series = synthesize(cfg).records;
  const auto base = run_benchmark(cfg, series);
  collect(base);
  const Day d = base.evaluation_start + std::chrono::days{3};
  const Instant d0{d}, d1{d + std::chrono::days{1}};
  std::size_t victim = 0;
  for (std::size_t k = 0; k < series.size(); ++k)
    if (series[k].timestamp == d0 + std::chrono::hours{11}) victim = k;

  // Forecasts are compared up to `until`; fits only when they feed a day <= D.
  auto unchanged = [&](const BenchmarkReport& other, Instant until, std::string& why) {
    for (std::size_t m = 0; m < base.forecasts.size(); ++m) {
      const auto& a = base.forecasts[m];
      const auto& b = other.forecasts[m];
      for (std::size_t k = 0; k < a.timestamps.size(); ++k)
        if (a.timestamps[k] < until && a.p_pred[k] != b.p_pred[k]) {
          why = a.model + " at " + format_instant(a.timestamps[k]);
          return false;
        }
    }
    for (std::size_t k = 0; k < base.pvpro_fits.size(); ++k)
      if (base.pvpro_fits[k].window_end <= d0 && !(base.pvpro_fits[k].params == other.pvpro_fits[k].params)) {
        why = "pvpro fit ending " + format_instant(base.pvpro_fits[k].window_end);
        return false;
      }
    return true;
  };

  // Measurements of day D must not reach any forecast for days <= D.
  auto meas = series;
  meas[victim].v_dc *= 0.5;
  meas[victim].i_dc *= 3.0;
  std::string why;
  const bool ok_meas = unchanged(run_benchmark(cfg, meas), d1, why);
  // Weather of day D is an input for day D only.
  auto weather = series;
  weather[victim].g_poa *= 0.3;
  weather[victim].t_module += 15.0;
  std::string why_w;
  const bool ok_weather = unchanged(run_benchmark(cfg, weather), d0, why_w);
  return {ok_meas && ok_weather,
          ok_meas && ok_weather ? "measurement and weather mutations on " + format_day(d) + " leave earlier outputs intact"
                                : "leak after mutating " + format_day(d) + ": " + (ok_meas ? "" : "measurement -> " + why + "; ") +
                                      (ok_weather ? "" : "weather -> " + why_w)};
}

// 12. Determinism.
Outcome determinism() {
  const auto root = std::filesystem::temp_directory_path() / "pvprof_acceptance_det";
  std::filesystem::remove_all(root);
  std::vector<std::string> dirs{(root / "a").string(), (root / "b").string()};
  for (const auto& dir : dirs) {
    RunConfig cfg = config({{"models", {{"roster", {"pvpro", "smart_persistence", "naive_persistence", "nominal",
                                                    "lr", "kr"}}}},
                            {"studies", {{"weather_cases", true}, {"sweep", true}, {"seasonal", true}}},
                            {"synth", {{"days", 12}, {"cloud_days", {1, 4, 5, 8, 10}}}}});
    cfg.data.output = dir;
    cmd_synth(cfg);
    cmd_benchmark(cfg);
  }
  std::size_t compared = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dirs[0])) {
    const std::string name = entry.path().filename().string();
    std::string a = read_text_file(entry.path().string());
    std::string b = read_text_file(dirs[1] + "/" + name);
    if (name == "benchmark_report.json") {
      auto ja = nlohmann::ordered_json::parse(a), jb = nlohmann::ordered_json::parse(b);
      ja["provenance"].erase("run_timestamp");
      jb["provenance"].erase("run_timestamp");
      a = ja.dump();
      b = jb.dump();
    }
    if (a != b) return {false, name + " differs between runs"};
    ++compared;
  }
  std::filesystem::remove_all(root);
  return {compared >= 7, fmt("%zu output files identical across two runs", compared)};
}

// 6. Metric identities; runs last so it can audit every report above.
Outcome metric_identities() {
  const std::vector<double> meas{50.0, 60.0, 70.0, 80.0}, pred{52.0, 59.0, 70.0, 83.0}, g(4, 800.0);
  const auto m = compute_metrics(pred, meas, 100.0, g);
  const bool hand = std::abs(m.nmae - 0.015) <= 1e-12 && std::abs(m.nrmse - std::sqrt(3.5) / 100.0) <= 1e-12;
  std::size_t jensen_bad = 0, mono_bad = 0;
  g_reports.push_back(m);
  for (const auto& r : g_reports) {
    if (r.nrmse < r.nmae) ++jensen_bad;
    std::vector<double> taus;
    for (int k = -30; k <= 30; ++k) taus.push_back(0.01 * k);
    const auto d = exceedance_density(r.nbe_series, taus);
    for (std::size_t k = 1; k < d.size(); ++k)
      if (d[k].second > d[k - 1].second) ++mono_bad;
  }
  return {hand && jensen_bad == 0 && mono_bad == 0,
          fmt("hand case nMAE %.15f nRMSE %.15f; %zu reports audited, %zu Jensen and %zu monotonicity violations",
              m.nmae, m.nrmse, g_reports.size(), jensen_bad, mono_bad)};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "solver correctness", solver_correctness},
      {2, "noiseless recovery", noiseless_recovery},
      {3, "noisy recovery", noisy_recovery},
      {4, "degradation tracking", drift_tracking},
      {5, "datasheet round trip", datasheet_round_trip},
      {7, "degraded system: PVPro vs nominal", degraded_direction},
      {8, "short windows: 3 vs 60 days", short_windows},
      {9, "weather-case robustness", weather_robustness},
      {10, "smart persistence exactness", persistence_exactness},
      {11, "temporal hygiene canary", temporal_canary},
      {12, "determinism", determinism},
      {6, "metric identities", metric_identities},
  };
  std::vector<std::pair<int, std::string>> lines;
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    const std::string line =
        fmt("%s  #%-2d %-36s %s [%.1f s]", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), seconds_since(t0));
    std::fprintf(stderr, "%s\n", line.c_str());
    lines.emplace_back(c.id, line);
  }
  std::sort(lines.begin(), lines.end());
  std::printf("acceptance summary\n");
  for (const auto& [id, line] : lines) std::printf("%s\n", line.c_str());
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
