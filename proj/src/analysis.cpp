#include "pvprof/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "pvprof/error.hpp"

namespace pvprof {

namespace {

struct Pooled {
  std::vector<double> pred, meas, g;
  void add(double p, double m, double gp) {
    pred.push_back(p);
    meas.push_back(m);
    g.push_back(gp);
  }
  bool empty() const { return pred.empty(); }
};

std::optional<MetricsReport> try_metrics(const Pooled& s, double p_nominal, const MetricsOptions& opts,
                                         std::string& note) {
  try {
    return compute_metrics(s.pred, s.meas, p_nominal, s.g, opts);
  } catch (const DataError& e) {
    note = e.what();
    return std::nullopt;
  }
}

std::vector<Day> days_with(std::span<const LabeledDay> labels, DayLabel l) {
  std::vector<Day> out;
  for (const auto& d : labels)
    if (d.label == l) out.push_back(d.day);
  std::sort(out.begin(), out.end());
  return out;
}

TelemetrySeries gather(std::span<const TelemetryRecord> series, std::span<const Day> days) {
  TelemetrySeries out;
  for (Day d : days) {
    const auto s = slice(series, Instant{d}, Instant{d + std::chrono::days{1}});
    out.insert(out.end(), s.begin(), s.end());
  }
  return out;
}

}  // namespace

MetricsReport compute_metrics(std::span<const double> pred, std::span<const double> meas, double p_nominal,
                              std::span<const double> g_poa, const MetricsOptions& opts) {
  if (!(p_nominal > 0.0)) throw ConfigError("p_nominal must be positive");
  if (pred.size() != meas.size()) throw DataError("prediction and measurement series are not aligned");
  if (opts.daylight_only && g_poa.size() != pred.size())
    throw DataError("daylight-only metrics need irradiance aligned with the predictions");
  MetricsReport r;
  double abs_sum = 0.0, sq_sum = 0.0, sum = 0.0;
  for (std::size_t k = 0; k < pred.size(); ++k) {
    if (opts.daylight_only && g_poa[k] < opts.g_min) continue;
    const double e = (pred[k] - meas[k]) / p_nominal;
    r.nbe_series.push_back(e);
    abs_sum += std::abs(e);
    sq_sum += e * e;
    sum += e;
  }
  r.n_samples = r.nbe_series.size();
  if (r.n_samples == 0) throw DataError("no samples to score");
  const double n = static_cast<double>(r.n_samples);
  r.nmae = abs_sum / n;
  r.nrmse = std::sqrt(sq_sum / n);
  r.nbe_mean = sum / n;
  r.exceedance = exceedance_density(r.nbe_series, opts.exceedance_thresholds);
  return r;
}

std::vector<std::pair<double, double>> exceedance_density(std::span<const double> nbe,
                                                          std::span<const double> thresholds) {
  if (nbe.empty()) throw DataError("exceedance density needs a nonempty series");
  std::vector<std::pair<double, double>> out;
  for (double tau : thresholds) {
    const auto c = std::count_if(nbe.begin(), nbe.end(), [tau](double e) { return e > tau; });
    out.emplace_back(tau, static_cast<double>(c) / static_cast<double>(nbe.size()));
  }
  return out;
}

std::string season_of(Day d) {
  const unsigned m = static_cast<unsigned>(std::chrono::year_month_day{d}.month());
  if (m >= 3 && m <= 5) return "spring";
  if (m >= 6 && m <= 8) return "summer";
  if (m >= 9 && m <= 11) return "fall";
  return "winter";
}

StudyResult seasonal_partition(std::span<const EvaluatedSample> samples, double p_nominal,
                               const MetricsOptions& opts) {
  StudyResult out;
  out.study = "seasonal";
  std::map<std::string, Pooled> by_season;
  for (const auto& s : samples) by_season[season_of(day_of(s.timestamp))].add(s.p_pred, s.p_meas, s.g_poa);
  for (const char* season : {"spring", "summer", "fall", "winter"}) {
    GroupMetrics g;
    g.label = season;
    const auto it = by_season.find(season);
    if (it == by_season.end())
      g.note = "no samples";
    else
      g.metrics = try_metrics(it->second, p_nominal, opts, g.note);
    out.groups.push_back(std::move(g));
  }
  return out;
}

std::string to_string(DayLabel l) { return l == DayLabel::clear ? "clear" : "cloudy"; }

std::vector<LabeledDay> classify_days(std::span<const TelemetryRecord> series, double threshold, double g_min) {
  std::vector<LabeledDay> out;
  for (Day d : days_in(series)) {
    const auto s = slice(series, Instant{d}, Instant{d + std::chrono::days{1}});
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t k = 1; k + 1 < s.size(); ++k) {
      if (s[k - 1].g_poa < g_min || s[k].g_poa < g_min || s[k + 1].g_poa < g_min) continue;
      const double p = s[k].power();
      if (!(p > 0.0)) continue;
      sum += std::abs(s[k + 1].power() - 2.0 * p + s[k - 1].power()) / (2.0 * p);
      ++n;
    }
    LabeledDay ld;
    ld.day = d;
    ld.variability = n ? sum / static_cast<double>(n) : 0.0;
    ld.label = ld.variability < threshold ? DayLabel::clear : DayLabel::cloudy;
    out.push_back(ld);
  }
  return out;
}

double coefficient_of_variation(std::span<const double> values) {
  if (values.empty()) throw DataError("coefficient of variation of an empty set");
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= static_cast<double>(values.size());
  if (mean == 0.0) return var == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::sqrt(var) / mean;
}

std::vector<StudyResult> weather_case_study(std::span<const TelemetryRecord> series,
                                            std::span<const LabeledDay> labels,
                                            std::span<const NamedTrainer> models, double p_nominal,
                                            const MetricsOptions& opts) {
  const auto clear = days_with(labels, DayLabel::clear);
  const auto cloudy = days_with(labels, DayLabel::cloudy);
  auto split = [](const std::vector<Day>& days) {
    const std::size_t half = (days.size() + 1) / 2;
    return std::pair{std::vector<Day>(days.begin(), days.begin() + static_cast<long>(half)),
                     std::vector<Day>(days.begin() + static_cast<long>(half), days.end())};
  };
  const auto [clear_train, clear_test] = split(clear);
  const auto [cloudy_train, cloudy_test] = split(cloudy);
  if (clear_train.empty() || clear_test.empty() || cloudy_train.empty() || cloudy_test.empty())
    throw DataError("weather cases need at least two clear and two cloudy days (have " +
                    std::to_string(clear.size()) + " clear, " + std::to_string(cloudy.size()) + " cloudy)");

  std::vector<Day> mixed_train = clear_train;
  mixed_train.insert(mixed_train.end(), cloudy_train.begin(), cloudy_train.end());
  std::sort(mixed_train.begin(), mixed_train.end());

  const std::vector<std::pair<std::string, TelemetrySeries>> train_sets{
      {"clear", gather(series, clear_train)}, {"cloudy", gather(series, cloudy_train)}, {"mixed", gather(series, mixed_train)}};
  const std::vector<std::pair<std::string, TelemetrySeries>> test_sets{{"clear", gather(series, clear_test)},
                                                                       {"cloudy", gather(series, cloudy_test)}};

  std::vector<StudyResult> out;
  for (const NamedTrainer& m : models) {
    StudyResult r;
    r.study = "weather_cases";
    r.model = m.name;
    std::vector<double> values;
    for (const auto& [train_name, train] : train_sets) {
      const Predictor predict = m.train(train);
      for (const auto& [test_name, test] : test_sets) {
        GroupMetrics g;
        g.label = "train_" + train_name + "/test_" + test_name;
        Pooled p;
        const auto pred = predict(test);
        for (std::size_t k = 0; k < test.size(); ++k) p.add(pred[k], test[k].power(), test[k].g_poa);
        g.metrics = compute_metrics(p.pred, p.meas, p_nominal, p.g, opts);
        values.push_back(g.metrics->nmae);
        r.groups.push_back(std::move(g));
      }
    }
    r.cv_of_cases = coefficient_of_variation(values);
    r.weather_sensitive = *r.cv_of_cases > kWeatherSensitiveCv;
    out.push_back(std::move(r));
  }
  return out;
}

std::string to_string(SweepFeature f) {
  switch (f) {
    case SweepFeature::t_module:
      return "t_module";
    case SweepFeature::hod:
      return "hod";
    case SweepFeature::g_poa:
      break;
  }
  return "g_poa";
}

StudyResult interpretability_sweep(std::span<const SweepModel> models, const SweepSpec& spec,
                                   const std::optional<SdmParamsRef>& reference, const ArrayTopology& topo,
                                   double alpha_isc) {
  if (spec.points < 2 || !(spec.hi > spec.lo)) throw ConfigError("sweep needs at least two points over a nonempty range");
  std::vector<double> xs(static_cast<std::size_t>(spec.points));
  for (int k = 0; k < spec.points; ++k)
    xs[static_cast<std::size_t>(k)] = spec.lo + (spec.hi - spec.lo) * k / (spec.points - 1);
  auto at = [&](double x) {
    FeatureVector f = spec.fixed;
    if (spec.varied == SweepFeature::g_poa) f.g_poa = x;
    if (spec.varied == SweepFeature::t_module) f.t_module = x;
    if (spec.varied == SweepFeature::hod) f.hod = x;
    return f;
  };

  StudyResult out;
  out.study = "sweep";
  auto add = [&](const std::string& name, const std::function<double(const FeatureVector&)>& f) {
    SweepCurve c;
    c.name = name;
    c.feature = to_string(spec.varied);
    c.x = xs;
    for (double x : xs) c.y.push_back(f(at(x)));
    out.curves.push_back(std::move(c));
  };
  for (const SweepModel& m : models) add(m.name, m.predict);
  if (reference)
    add("reference", [&](const FeatureVector& f) {
      if (f.g_poa <= 0.0) return 0.0;
      return simulate_array_mpp(*reference, topo, {f.g_poa, f.t_module}, alpha_isc).power();
    });
  return out;
}

StudyResult training_length_sweep(const std::string& model, const ForecasterFactory& factory,
                                  std::span<const TelemetryRecord> series, std::span<const int> lengths_days,
                                  Day eval_start, int eval_days, double p_nominal, const MetricsOptions& opts) {
  if (series.empty()) throw DataError("training-length sweep needs data");
  if (eval_days < 1) throw ConfigError("evaluation span must cover at least one day");
  StudyResult out;
  out.study = "training_length";
  out.model = model;
  const Day first = day_of(series.front().timestamp);
  for (int length : lengths_days) {
    GroupMetrics g;
    g.label = std::to_string(length) + "d";
    if (length < 1 || eval_start - std::chrono::days{length} < first) {
      g.note = "skipped: series does not cover " + std::to_string(length) + " days before the evaluation span";
      out.groups.push_back(std::move(g));
      continue;
    }
    const DayForecaster forecast = factory(length);
    Pooled p;
    try {
      for (int k = 0; k < eval_days; ++k) {
        const Day d = eval_start + std::chrono::days{k};
        const auto history = slice(series, Instant{d - std::chrono::days{length}}, Instant{d});
        const auto day = slice(series, Instant{d}, Instant{d + std::chrono::days{1}});
        if (day.empty()) continue;
        const auto pred = forecast(history, day);
        for (std::size_t j = 0; j < day.size(); ++j) p.add(pred[j], day[j].power(), day[j].g_poa);
      }
      g.metrics = try_metrics(p, p_nominal, opts, g.note);
    } catch (const Error& e) {
      g.note = std::string("skipped: ") + e.what();
    }
    out.groups.push_back(std::move(g));
  }
  return out;
}

}  // namespace pvprof
