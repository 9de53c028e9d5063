#include "pvprof/pipeline.hpp"

#include <algorithm>
#include <ctime>
#include <map>
#include <memory>
#include <sstream>

#include "json.hpp"

#include "pvprof/error.hpp"
#include "pvprof/io.hpp"
#include "pvprof/log.hpp"

namespace pvprof {

namespace {

using ojson = nlohmann::ordered_json;

bool in_roster(const RunConfig& cfg, const std::string& m) {
  return std::find(cfg.models.roster.begin(), cfg.models.roster.end(), m) != cfg.models.roster.end();
}

MetricsOptions metrics_options(const RunConfig& cfg) {
  MetricsOptions o;
  o.daylight_only = cfg.studies.daylight_only;
  o.g_min = cfg.preprocess.g_min;
  o.exceedance_thresholds = cfg.studies.exceedance_thresholds;
  return o;
}

std::span<const TelemetryRecord> day_records(std::span<const TelemetryRecord> series, Day d) {
  return slice(series, Instant{d}, Instant{d + std::chrono::days{1}});
}

// PVPro fit over preprocessed records of one training span.
FitWindowResult fit_span(std::span<const TelemetryRecord> records, const RunConfig& cfg, const SdmParamsRef& start) {
  if (records.empty()) throw DataError("no records in fitting window");
  const FitOptions opts = fit_options(cfg);
  const TelemetrySeries retained = retained_records(records, preprocess(records, cfg.preprocess));
  return fit_window(retained, cfg.system.topology, opts.bounds.clamp(start), opts);
}

std::vector<double> regressor_forecast(const RegressorModel& m, std::span<const TelemetryRecord> day, double g_min) {
  std::vector<double> out;
  out.reserve(day.size());
  for (const auto& r : day) out.push_back(r.g_poa < g_min ? 0.0 : predict_regressor(m, features_of(r)));
  return out;
}

RegressorModel train_on(RegressorFamily family, std::span<const TelemetryRecord> history,
                        const RegressorHyperparams& hyper, double g_min) {
  std::vector<FeatureVector> xs;
  std::vector<double> ys;
  daylight_training_set(history, g_min, xs, ys);
  return train_regressor(family, xs, ys, hyper);
}

ojson metrics_json(const MetricsReport& m, bool with_series) {
  ojson j;
  j["n_samples"] = m.n_samples;
  j["nmae"] = m.nmae;
  j["nrmse"] = m.nrmse;
  j["nbe_mean"] = m.nbe_mean;
  ojson ex = ojson::array();
  for (const auto& [tau, d] : m.exceedance) ex.push_back({{"threshold", tau}, {"density", d}});
  j["exceedance"] = ex;
  if (with_series) j["nbe_series"] = m.nbe_series;
  return j;
}

ojson params_json(const SdmParamsRef& p) {
  return {{"i_ph_ref", p.i_ph_ref}, {"i_0_ref", p.i_0_ref}, {"r_s", p.r_s}, {"r_sh_ref", p.r_sh_ref},
          {"n_diode", p.n_diode}};
}

ojson study_json(const StudyResult& s) {
  ojson j;
  j["study"] = s.study;
  j["model"] = s.model;
  ojson groups = ojson::array();
  for (const auto& g : s.groups) {
    ojson gj;
    gj["label"] = g.label;
    gj["metrics"] = g.metrics ? metrics_json(*g.metrics, false) : ojson(nullptr);
    gj["note"] = g.note;
    groups.push_back(gj);
  }
  j["groups"] = groups;
  ojson curves = ojson::array();
  for (const auto& c : s.curves) curves.push_back({{"name", c.name}, {"feature", c.feature}, {"x", c.x}, {"y", c.y}});
  j["curves"] = curves;
  j["cv_of_cases"] = s.cv_of_cases ? ojson(*s.cv_of_cases) : ojson(nullptr);
  j["weather_sensitive"] = s.weather_sensitive;
  return j;
}

std::string utc_now() {
  const auto now = std::chrono::time_point_cast<std::chrono::seconds>(std::chrono::system_clock::now());
  return format_instant(now);
}

}  // namespace

const char* library_version() { return "0.1.0"; }

SdmParamsRef nominal_params(const RunConfig& cfg) {
  if (!cfg.system.datasheet) throw ConfigError("the nominal model requires system.datasheet");
  return fit_desoto_from_datasheet(*cfg.system.datasheet);
}

SdmParamsRef pvpro_initial(const RunConfig& cfg) {
  if (cfg.fit.initial) return *cfg.fit.initial;
  if (!cfg.system.datasheet) throw ConfigError("PVPro needs fit.initial or system.datasheet");
  return initial_guess(*cfg.system.datasheet);
}

TelemetrySeries load_series(const RunConfig& cfg, std::vector<std::string>* diagnostics) {
  // Unset telemetry reads what `synth` wrote into the output directory.
  const std::string path = cfg.data.telemetry.empty() ? cfg.data.output + "/telemetry.csv" : cfg.data.telemetry;
  const ColumnMapping mapping = cfg.data.mapping.empty() ? ColumnMapping{} : load_column_mapping(cfg.data.mapping);
  IngestResult r = read_telemetry_csv(path, mapping);
  for (const auto& d : r.diagnostics) log_info(d);
  if (diagnostics) *diagnostics = r.diagnostics;
  if (r.records.empty()) throw DataError("telemetry file has no valid records");
  return std::move(r.records);
}

SyntheticDataset synthesize(const RunConfig& cfg) {
  SdmParamsRef truth = cfg.synth.true_params ? *cfg.synth.true_params : nominal_params(cfg);
  WeatherProfile profile = cfg.synth.profile;
  profile.seed = cfg.seed;
  SynthOptions so;
  so.noise_v = cfg.synth.noise_v;
  so.noise_i = cfg.synth.noise_i;
  so.alpha_isc = cfg.system.datasheet ? cfg.system.datasheet->alpha_isc : 0.0;
  so.p_dc_limit = cfg.synth.p_dc_limit_w;
  so.bounds = fit_options(cfg).bounds;
  return generate_dataset(truth, cfg.system.topology, profile, cfg.synth.scenario, so);
}

std::string ground_truth_json(const GroundTruth& t) {
  ojson j;
  j["true_params"] = params_json(t.true_params);
  j["topology"] = {{"cells_in_series", t.topology.cells_in_series},
                   {"modules_per_string", t.topology.modules_per_string},
                   {"strings_in_parallel", t.topology.strings_in_parallel}};
  const WeatherProfile& p = t.profile;
  j["profile"] = {{"start", format_day(p.start_day)},
                  {"days", p.days},
                  {"cadence_minutes", p.cadence.count()},
                  {"peak_irradiance", p.peak_irradiance},
                  {"day_length_hours", p.day_length_hours},
                  {"cloud_days", std::vector<int>(p.cloud_days.begin(), p.cloud_days.end())},
                  {"cloud_depth", p.cloud_depth},
                  {"cloud_timescale_minutes", p.cloud_timescale_minutes},
                  {"ambient_base", p.ambient_base},
                  {"seed", p.seed}};
  static const char* names[kParamCount] = {"i_ph_ref", "i_0_ref", "r_s", "r_sh_ref", "n_diode"};
  static const char* kinds[] = {"constant", "linear", "step"};
  ojson scen;
  for (std::size_t k = 0; k < kParamCount; ++k) {
    const Trajectory& tr = t.scenario.trajectory[k];
    scen[names[k]] = {{"kind", kinds[static_cast<int>(tr.kind)]},
                      {"relative_change", tr.relative_change},
                      {"step_day", tr.step_day}};
  }
  j["degradation"] = scen;
  j["noise_v"] = t.options.noise_v;
  j["noise_i"] = t.options.noise_i;
  j["alpha_isc"] = t.options.alpha_isc;
  j["p_dc_limit_w"] = t.options.p_dc_limit ? ojson(*t.options.p_dc_limit) : ojson(nullptr);
  ojson days = ojson::array();
  for (const auto& d : t.days)
    days.push_back({{"day", format_day(d.day)}, {"params", params_json(d.params)}, {"cloudy", d.cloudy}});
  j["days"] = days;
  j["clipped_indices"] = t.clipped_indices;
  return j.dump(2) + "\n";
}

BenchmarkReport run_benchmark(const RunConfig& cfg, const TelemetrySeries& series) {
  validate(cfg);
  validate_series(series);
  if (series.empty()) throw DataError("benchmark needs telemetry");

  BenchmarkReport rep;
  rep.config_hash = config_hash(cfg);
  rep.seed = cfg.seed;
  rep.run_timestamp = utc_now();
  rep.p_nominal_w = cfg.system.p_nominal_w;
  rep.climate_zone = cfg.system.climate_zone;
  rep.horizon_hours = cfg.models.horizon_hours;
  rep.models = cfg.models.roster;

  const double p_nom = cfg.system.p_nominal_w;
  const double g_min = cfg.preprocess.g_min;
  const MetricsOptions mopts = metrics_options(cfg);
  const ArrayTopology& topo = cfg.system.topology;
  const FitOptions fopts = fit_options(cfg);
  const auto horizon = std::chrono::hours{cfg.models.horizon_hours};

  const Day first = day_of(series.front().timestamp);
  const Day last = day_of(series.back().timestamp);
  const bool any_regressor = in_roster(cfg, "lr") || in_roster(cfg, "kr");
  int lead = cfg.fit.window_days;
  if (any_regressor) lead = std::max(lead, cfg.models.grid.training_days.front() + cfg.models.grid.holdout_days);
  rep.evaluation_start = cfg.studies.evaluation_start.value_or(first + std::chrono::days{lead});
  rep.evaluation_days = cfg.studies.evaluation_days.value_or(static_cast<int>((last - rep.evaluation_start).count()) + 1);
  if (rep.evaluation_days < 1 || rep.evaluation_start <= first)
    throw DataError("series too short for the evaluation span (needs history before " +
                    format_day(rep.evaluation_start) + ")");

  // Regressor settings from data strictly before the evaluation span.
  struct RegressorState {
    RegressorFamily family;
    std::optional<GridSearchResult> grid;
    std::string error;
    std::optional<RegressorModel> last_model;
  };
  std::vector<RegressorState> regressors;
  const auto before_span = slice(series, Instant{first}, Instant{rep.evaluation_start});
  for (const char* name : {"lr", "kr"}) {
    if (!in_roster(cfg, name)) continue;
    RegressorState st{regressor_family_from_string(name), std::nullopt, "", std::nullopt};
    try {
      log_info(std::string("grid search for ") + name);
      st.grid = grid_search(cfg.models.grid, st.family, before_span, p_nom, g_min);
      rep.grid_searches.push_back(*st.grid);
    } catch (const Error& e) {
      st.error = std::string("grid search failed: ") + e.what();
    }
    regressors.push_back(std::move(st));
  }

  std::optional<SdmParamsRef> nominal;
  std::string nominal_error;
  if (in_roster(cfg, "nominal")) {
    try {
      nominal = nominal_params(cfg);
    } catch (const Error& e) {
      nominal_error = std::string("datasheet extraction failed: ") + e.what();
    }
  }

  std::map<std::string, ForecastSeries> forecasts;
  std::map<std::string, std::vector<EvaluatedSample>> evaluated;
  for (const auto& m : rep.models) forecasts[m].model = m;

  const bool use_pvpro = in_roster(cfg, "pvpro");
  SdmParamsRef warm = use_pvpro ? pvpro_initial(cfg) : SdmParamsRef{};
  const SdmParamsRef pvpro_init = warm;
  std::optional<FitWindowResult> latest_fit;

  for (int k = 0; k < rep.evaluation_days; ++k) {
    const Day d = rep.evaluation_start + std::chrono::days{k};
    const auto day = day_records(series, d);
    const auto history = slice(series, Instant{first}, Instant{d});
    log_info("forecast day " + format_day(d));

    for (const std::string& model : rep.models) {
      DailyResult res;
      res.day = d;
      res.model = model;
      std::vector<double> pred;
      try {
        if (day.empty()) throw DataError("no records on the forecast day");
        if (model == "pvpro") {
          FitWindowResult fit;
          fit.window_start = Instant{d - std::chrono::days{cfg.fit.window_days}};
          fit.window_end = Instant{d};
          try {
            const auto window = slice(series, fit.window_start, fit.window_end);
            FitWindowResult f = fit_span(window, cfg, cfg.fit.warm_start ? warm : pvpro_init);
            f.window_start = fit.window_start;
            f.window_end = fit.window_end;
            fit = f;
            if (cfg.fit.warm_start) warm = fit.params;
            latest_fit = fit;
          } catch (const Error& e) {
            fit.error = e.what();
            fit.params = warm;
          }
          rep.pvpro_fits.push_back(fit);
          if (!latest_fit) throw DataError("no successful fit before this day: " + fit.error);
          pred = predict_power(latest_fit->params, day, topo, fopts).p_pred;
        } else if (model == "nominal") {
          if (!nominal) throw ConfigError(nominal_error);
          pred = predict_power(*nominal, day, topo, fopts, "nominal").p_pred;
        } else if (model == "smart_persistence") {
          pred = smart_persistence(history, day, horizon, g_min).p_pred;
        } else if (model == "naive_persistence") {
          pred = naive_persistence(history, day, horizon).p_pred;
        } else {
          auto& st = *std::find_if(regressors.begin(), regressors.end(), [&](const RegressorState& s) {
            return to_string(s.family) == model;
          });
          if (!st.grid) throw DataError(st.error);
          const auto train = slice(series, Instant{d - std::chrono::days{st.grid->best_training_days}}, Instant{d});
          st.last_model = train_on(st.family, train, st.grid->best_hyper, g_min);
          pred = regressor_forecast(*st.last_model, day, g_min);
        }
        std::vector<double> meas, g;
        for (const auto& r : day) {
          meas.push_back(r.power());
          g.push_back(r.g_poa);
        }
        res.metrics = compute_metrics(pred, meas, p_nom, g, mopts);
        ForecastSeries& fs = forecasts[model];
        for (std::size_t j = 0; j < day.size(); ++j) {
          fs.timestamps.push_back(day[j].timestamp);
          fs.p_pred.push_back(pred[j]);
          fs.p_meas.push_back(meas[j]);
          evaluated[model].push_back({day[j].timestamp, pred[j], meas[j], g[j]});
        }
      } catch (const Error& e) {
        res.skip_reason = e.what();
        if (res.skip_reason.empty()) res.skip_reason = "skipped";
      }
      rep.daily.push_back(std::move(res));
    }
  }

  for (const auto& model : rep.models) {
    ModelAggregate a;
    a.model = model;
    const auto& ev = evaluated[model];
    std::vector<double> p, m, g;
    for (const auto& s : ev) {
      p.push_back(s.p_pred);
      m.push_back(s.p_meas);
      g.push_back(s.g_poa);
    }
    try {
      a.metrics = compute_metrics(p, m, p_nom, g, mopts);
    } catch (const DataError& e) {
      a.note = e.what();
    }
    rep.aggregate.push_back(std::move(a));
    rep.forecasts.push_back(forecasts[model]);
  }

  // Studies.
  if (cfg.studies.seasonal)
    for (const auto& model : rep.models) {
      StudyResult s = seasonal_partition(evaluated[model], p_nom, mopts);
      s.model = model;
      rep.studies.push_back(std::move(s));
    }
  if (cfg.studies.exceedance)
    for (const auto& a : rep.aggregate) {
      StudyResult s;
      s.study = "exceedance";
      s.model = a.model;
      GroupMetrics g;
      g.label = "all";
      g.metrics = a.metrics;
      g.note = a.note;
      s.groups.push_back(std::move(g));
      rep.studies.push_back(std::move(s));
    }

  auto hyper_for = [&](RegressorFamily f) {
    for (const auto& st : regressors)
      if (st.family == f && st.grid) return std::pair{st.grid->best_hyper, st.grid->best_training_days};
    return std::pair{RegressorHyperparams{}, cfg.models.grid.training_days.front()};
  };

  if (cfg.studies.weather_cases) {
    std::vector<NamedTrainer> trainers;
    if (use_pvpro)
      trainers.push_back({"pvpro", [&](std::span<const TelemetryRecord> train) -> Predictor {
                            const SdmParamsRef p = fit_span(train, cfg, pvpro_init).params;
                            return [&, p](std::span<const TelemetryRecord> test) {
                              return predict_power(p, test, topo, fopts).p_pred;
                            };
                          }});
    for (const auto& st : regressors) {
      const RegressorFamily fam = st.family;
      trainers.push_back({to_string(fam), [&, fam](std::span<const TelemetryRecord> train) -> Predictor {
                            const RegressorModel m = train_on(fam, train, hyper_for(fam).first, g_min);
                            return [m, g_min](std::span<const TelemetryRecord> test) {
                              return regressor_forecast(m, test, g_min);
                            };
                          }});
    }
    try {
      const auto labels = classify_days(series, cfg.studies.cloud_threshold, g_min);
      for (auto& s : weather_case_study(series, labels, trainers, p_nom, mopts)) rep.studies.push_back(std::move(s));
    } catch (const Error& e) {
      rep.notes.push_back(std::string("weather_cases study skipped: ") + e.what());
    }
  }

  if (cfg.studies.sweep) {
    std::vector<SweepModel> models;
    const double alpha = fopts.alpha_isc;
    auto physical = [&, alpha](const SdmParamsRef& p) {
      return [p, &topo, alpha](const FeatureVector& f) {
        return f.g_poa <= 0.0 ? 0.0 : simulate_array_mpp(p, topo, {f.g_poa, f.t_module}, alpha).power();
      };
    };
    if (latest_fit) models.push_back({"pvpro", physical(latest_fit->params)});
    if (nominal) models.push_back({"nominal", physical(*nominal)});
    for (const auto& st : regressors)
      if (st.last_model) {
        const RegressorModel m = *st.last_model;
        models.push_back({to_string(st.family), [m](const FeatureVector& f) { return predict_regressor(m, f); }});
      }
    std::optional<SdmParamsRef> reference;
    if (cfg.system.datasheet) {
      try {
        reference = nominal_params(cfg);
      } catch (const Error& e) {
        rep.notes.push_back(std::string("sweep reference curve omitted: ") + e.what());
      }
    }
    const FeatureVector fixed{1000.0, 25.0, 0.5};
    const SweepSpec specs[] = {{SweepFeature::g_poa, 0.0, 1000.0, cfg.studies.sweep_points, fixed},
                               {SweepFeature::t_module, -10.0, 70.0, cfg.studies.sweep_points, fixed},
                               {SweepFeature::hod, 0.0, 1.0 - 1.0 / 96.0, cfg.studies.sweep_points, fixed}};
    for (const auto& spec : specs) {
      try {
        rep.studies.push_back(interpretability_sweep(models, spec, reference, topo, alpha));
      } catch (const Error& e) {
        rep.notes.push_back("sweep over " + to_string(spec.varied) + " failed: " + e.what());
      }
    }
  }

  if (cfg.studies.training_length) {
    const int eval_days = cfg.studies.training_length_eval_days;
    const Day eval_start = last - std::chrono::days{eval_days - 1};
    if (use_pvpro) {
      ForecasterFactory factory = [&](int) -> DayForecaster {
        auto state = std::make_shared<SdmParamsRef>(pvpro_init);
        return [&, state](std::span<const TelemetryRecord> hist, std::span<const TelemetryRecord> day) {
          const FitWindowResult f = fit_span(hist, cfg, *state);
          *state = f.params;
          return predict_power(f.params, day, topo, fopts).p_pred;
        };
      };
      rep.studies.push_back(training_length_sweep("pvpro", factory, series, cfg.studies.training_lengths_days,
                                                  eval_start, eval_days, p_nom, mopts));
    }
    for (const auto& st : regressors) {
      const RegressorFamily fam = st.family;
      const RegressorHyperparams hyper = hyper_for(fam).first;
      ForecasterFactory factory = [fam, hyper, g_min](int) -> DayForecaster {
        return [fam, hyper, g_min](std::span<const TelemetryRecord> hist, std::span<const TelemetryRecord> day) {
          return regressor_forecast(train_on(fam, hist, hyper, g_min), day, g_min);
        };
      };
      rep.studies.push_back(training_length_sweep(to_string(fam), factory, series, cfg.studies.training_lengths_days,
                                                  eval_start, eval_days, p_nom, mopts));
    }
  }
  return rep;
}

std::string report_to_json(const BenchmarkReport& r) {
  ojson j;
  j["schema_version"] = kReportSchemaVersion;
  j["provenance"] = {{"config_hash", r.config_hash},
                     {"seed", r.seed},
                     {"version", library_version()},
                     {"run_timestamp", r.run_timestamp}};
  j["system"] = {{"p_nominal_w", r.p_nominal_w}, {"climate_zone", r.climate_zone}};
  j["evaluation"] = {{"start", format_day(r.evaluation_start)},
                     {"days", r.evaluation_days},
                     {"horizon_hours", r.horizon_hours}};
  j["models"] = r.models;
  ojson daily = ojson::array();
  for (const auto& d : r.daily)
    daily.push_back({{"day", format_day(d.day)},
                     {"model", d.model},
                     {"metrics", d.metrics ? metrics_json(*d.metrics, false) : ojson(nullptr)},
                     {"skip_reason", d.skip_reason}});
  j["daily"] = daily;
  ojson agg = ojson::array();
  for (const auto& a : r.aggregate)
    agg.push_back({{"model", a.model},
                   {"metrics", a.metrics ? metrics_json(*a.metrics, true) : ojson(nullptr)},
                   {"note", a.note}});
  j["aggregate"] = agg;
  ojson grids = ojson::array();
  for (const auto& g : r.grid_searches) {
    ojson table = ojson::array();
    for (const auto& c : g.table)
      table.push_back({{"training_days", c.training_days},
                       {"lambda", c.hyper.lambda},
                       {"gamma", c.hyper.gamma},
                       {"validation_nmae", c.valid ? ojson(c.validation_nmae) : ojson(nullptr)},
                       {"note", c.note}});
    grids.push_back({{"family", to_string(g.family)},
                     {"best_lambda", g.best_hyper.lambda},
                     {"best_gamma", g.best_hyper.gamma},
                     {"best_training_days", g.best_training_days},
                     {"table", table}});
  }
  j["grid_search"] = grids;
  ojson fits = ojson::array();
  for (const auto& f : r.pvpro_fits)
    fits.push_back({{"window_start", format_instant(f.window_start)},
                    {"window_end", format_instant(f.window_end)},
                    {"params", f.ok() ? params_json(f.params) : ojson(nullptr)},
                    {"final_loss", f.ok() ? ojson(f.final_loss) : ojson(nullptr)},
                    {"iterations", f.iterations},
                    {"converged", f.converged},
                    {"n_points", f.n_points},
                    {"error", f.error}});
  j["pvpro_fits"] = fits;
  ojson studies = ojson::array();
  for (const auto& s : r.studies) studies.push_back(study_json(s));
  j["studies"] = studies;
  j["notes"] = r.notes;
  return j.dump(2) + "\n";
}

void cmd_synth(const RunConfig& cfg) {
  const SyntheticDataset ds = synthesize(cfg);
  const std::string dir = cfg.data.output;
  write_telemetry_csv(dir + "/telemetry.csv", ds.records);
  write_text_file(dir + "/ground_truth.json", ground_truth_json(ds.truth));
  log_info("wrote " + std::to_string(ds.records.size()) + " records to " + dir);
}

void cmd_fit(const RunConfig& cfg) {
  const TelemetrySeries series = load_series(cfg);
  validate_series(series);
  const auto fits = rolling_fit(series, cfg.system.topology, pvpro_initial(cfg), fit_options(cfg), rolling_options(cfg));
  std::ostringstream s;
  write_trajectory_csv(s, fits);
  write_text_file(cfg.data.output + "/parameter_trajectory.csv", s.str());
  const auto ok = std::count_if(fits.begin(), fits.end(), [](const FitWindowResult& f) { return f.ok(); });
  if (ok == 0) throw NumericError("no fitting window succeeded: " + fits.front().error);
}

void cmd_predict(const RunConfig& cfg) {
  if (cfg.predict.weather.empty()) throw ConfigError("predict.weather is not set");
  SdmParamsRef params;
  if (cfg.predict.params) {
    params = *cfg.predict.params;
  } else {
    const TelemetrySeries series = load_series(cfg);
    const Day end = day_of(series.back().timestamp) + std::chrono::days{1};
    const auto window = slice(series, Instant{end - std::chrono::days{cfg.fit.window_days}}, Instant{end});
    params = fit_span(window, cfg, pvpro_initial(cfg)).params;
  }
  const ColumnMapping mapping = cfg.data.mapping.empty() ? ColumnMapping{} : load_column_mapping(cfg.data.mapping);
  const IngestResult weather = read_telemetry_csv(cfg.predict.weather, mapping);
  const ForecastSeries fs = predict_power(params, weather.records, cfg.system.topology, fit_options(cfg));
  std::ostringstream s;
  write_forecast_csv(s, std::span<const ForecastSeries>(&fs, 1));
  write_text_file(cfg.data.output + "/forecast.csv", s.str());
}

void cmd_benchmark(const RunConfig& cfg) {
  const TelemetrySeries series = load_series(cfg);
  const BenchmarkReport rep = run_benchmark(cfg, series);
  const std::string dir = cfg.data.output;
  write_text_file(dir + "/benchmark_report.json", report_to_json(rep));

  std::ostringstream fc;
  write_forecast_csv(fc, rep.forecasts);
  write_text_file(dir + "/forecast.csv", fc.str());

  std::ostringstream tr;
  write_trajectory_csv(tr, rep.pvpro_fits);
  write_text_file(dir + "/pvpro_trajectory.csv", tr.str());

  auto metric_cells = [](const std::optional<MetricsReport>& m) {
    if (!m) return std::string(",,,");
    return std::to_string(m->n_samples) + "," + format_double(m->nmae) + "," + format_double(m->nrmse) + "," +
           format_double(m->nbe_mean);
  };
  auto quoted = [](const std::string& s) {
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  };
  std::ostringstream daily;
  daily << "day,model,n_samples,nmae,nrmse,nbe_mean,skip_reason\n";
  for (const auto& d : rep.daily)
    daily << format_day(d.day) << ',' << d.model << ',' << metric_cells(d.metrics) << ',' << quoted(d.skip_reason)
          << '\n';
  write_text_file(dir + "/daily_metrics.csv", daily.str());

  std::ostringstream agg;
  agg << "model,n_samples,nmae,nrmse,nbe_mean\n";
  for (const auto& a : rep.aggregate) agg << a.model << ',' << metric_cells(a.metrics) << '\n';
  write_text_file(dir + "/aggregate_metrics.csv", agg.str());

  std::ostringstream studies;
  studies << "study,model,group,n_samples,nmae,nrmse,nbe_mean,note\n";
  for (const auto& s : rep.studies)
    for (const auto& g : s.groups)
      studies << s.study << ',' << s.model << ',' << quoted(g.label) << ',' << metric_cells(g.metrics) << ','
              << quoted(g.note) << '\n';
  write_text_file(dir + "/study_metrics.csv", studies.str());
}

void cmd_report(const std::string& report_path, const std::string& out_dir) {
  const std::string text = read_text_file(report_path);
  for (const auto& [name, svg] : render_charts(text)) write_text_file(out_dir + "/" + name, svg);
}

}  // namespace pvprof
