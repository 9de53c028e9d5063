#include "pvprof/config.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include "json.hpp"

#include "pvprof/error.hpp"
#include "pvprof/io.hpp"

namespace pvprof {

namespace {

using json = nlohmann::json;

const char* kParamNames[kParamCount] = {"i_ph_ref", "i_0_ref", "r_s", "r_sh_ref", "n_diode"};

// Reads keys of one JSON object and rejects any key left unread.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + " must be an object");
  }
  Section(const Section&) = delete;

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) && !j_.at(key).is_null();
  }

  template <class T>
  T get(const std::string& key, T fallback) {
    if (!has(key)) return fallback;
    return convert<T>(key);
  }

  template <class T>
  T require(const std::string& key) {
    if (!has(key)) throw ConfigError(where() + " is missing '" + key + "'");
    return convert<T>(key);
  }

  template <class T>
  std::optional<T> optional(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return convert<T>(key);
  }

  Section sub(const std::string& key) {
    seen_.insert(key);
    static const json empty = json::object();
    return Section(j_.contains(key) && !j_.at(key).is_null() ? j_.at(key) : empty, path_ + "." + key);
  }

  const json& raw(const std::string& key) const { return j_.at(key); }
  std::string where() const { return path_; }

  ~Section() noexcept(false) {
    if (std::uncaught_exceptions()) return;
    for (const auto& [k, v] : j_.items())
      if (!seen_.contains(k)) throw ConfigError("unknown key '" + k + "' in " + path_);
  }

 private:
  template <class T>
  T convert(const std::string& key) {
    try {
      return j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(path_ + "." + key + " has the wrong type");
    }
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

SdmParamsRef read_params(Section s) {
  SdmParamsRef p;
  p.i_ph_ref = s.require<double>("i_ph_ref");
  p.i_0_ref = s.require<double>("i_0_ref");
  p.r_s = s.require<double>("r_s");
  p.r_sh_ref = s.require<double>("r_sh_ref");
  p.n_diode = s.require<double>("n_diode");
  return p;
}

json write_params(const SdmParamsRef& p) {
  return {{"i_ph_ref", p.i_ph_ref}, {"i_0_ref", p.i_0_ref}, {"r_s", p.r_s}, {"r_sh_ref", p.r_sh_ref},
          {"n_diode", p.n_diode}};
}

Datasheet read_datasheet(Section s) {
  Datasheet d;
  d.v_oc = s.require<double>("v_oc");
  d.i_sc = s.require<double>("i_sc");
  d.v_mp = s.require<double>("v_mp");
  d.i_mp = s.require<double>("i_mp");
  d.alpha_isc = s.require<double>("alpha_isc");
  d.beta_voc = s.require<double>("beta_voc");
  d.cells_in_series = s.require<int>("cells_in_series");
  return d;
}

ParameterBounds read_bounds(Section s) {
  ParameterBounds b;
  for (std::size_t j = 0; j < kParamCount; ++j) {
    const auto v = s.require<std::vector<double>>(kParamNames[j]);
    if (v.size() != 2) throw ConfigError(s.where() + "." + kParamNames[j] + " must be [lo, hi]");
    b.range[j] = {v[0], v[1]};
  }
  return b;
}

json write_bounds(const ParameterBounds& b) {
  json j = json::object();
  for (std::size_t j2 = 0; j2 < kParamCount; ++j2) j[kParamNames[j2]] = {b.range[j2].lo, b.range[j2].hi};
  return j;
}

Trajectory read_trajectory(Section s) {
  Trajectory t;
  const auto kind = s.get<std::string>("kind", "constant");
  if (kind == "constant")
    t.kind = Trajectory::Kind::constant;
  else if (kind == "linear")
    t.kind = Trajectory::Kind::linear;
  else if (kind == "step")
    t.kind = Trajectory::Kind::step;
  else
    throw ConfigError(s.where() + ".kind must be constant, linear or step");
  t.relative_change = s.get<double>("relative_change", 0.0);
  t.step_day = s.get<int>("step_day", 0);
  return t;
}

std::string kind_name(Trajectory::Kind k) {
  switch (k) {
    case Trajectory::Kind::linear:
      return "linear";
    case Trajectory::Kind::step:
      return "step";
    case Trajectory::Kind::constant:
      break;
  }
  return "constant";
}

template <class T>
json opt_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

json to_json(const RunConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["data"] = {{"telemetry", c.data.telemetry},
               {"mapping", c.data.mapping},
               {"output", c.data.output},
               {"report", c.data.report}};

  json ds = nullptr;
  if (c.system.datasheet) {
    const Datasheet& d = *c.system.datasheet;
    ds = {{"v_oc", d.v_oc},           {"i_sc", d.i_sc},         {"v_mp", d.v_mp},
          {"i_mp", d.i_mp},           {"alpha_isc", d.alpha_isc}, {"beta_voc", d.beta_voc},
          {"cells_in_series", d.cells_in_series}};
  }
  j["system"] = {{"p_nominal_w", c.system.p_nominal_w},
                 {"topology",
                  {{"cells_in_series", c.system.topology.cells_in_series},
                   {"modules_per_string", c.system.topology.modules_per_string},
                   {"strings_in_parallel", c.system.topology.strings_in_parallel}}},
                 {"datasheet", ds},
                 {"climate_zone", c.system.climate_zone}};

  const ClippingOptions& cl = c.preprocess.clipping;
  j["preprocess"] = {{"g_min", c.preprocess.g_min},
                     {"k_sigma", c.preprocess.k_sigma},
                     {"clipping",
                      {{"p_ac_limit_w", opt_json(cl.p_ac_limit)},
                       {"limit_fraction", cl.limit_fraction},
                       {"plateau_band", cl.plateau_band},
                       {"plateau_run", cl.plateau_run}}}};

  j["fit"] = {{"window_days", c.fit.window_days},
              {"update_days", c.fit.update_days},
              {"warm_start", c.fit.warm_start},
              {"max_iterations", c.fit.max_iterations},
              {"loss_tolerance", c.fit.loss_tolerance},
              {"bounds", c.fit.bounds ? write_bounds(*c.fit.bounds) : json(nullptr)},
              {"initial", c.fit.initial ? write_params(*c.fit.initial) : json(nullptr)},
              {"v_scale", opt_json(c.fit.v_scale)},
              {"i_scale", opt_json(c.fit.i_scale)}};

  j["models"] = {{"roster", c.models.roster},
                 {"horizon_hours", c.models.horizon_hours},
                 {"grid",
                  {{"lambdas", c.models.grid.lambdas},
                   {"gammas", c.models.grid.gammas},
                   {"training_days", c.models.grid.training_days},
                   {"holdout_days", c.models.grid.holdout_days}}}};

  const StudiesConfig& s = c.studies;
  j["studies"] = {{"evaluation_start", s.evaluation_start ? json(format_day(*s.evaluation_start)) : json(nullptr)},
                  {"evaluation_days", opt_json(s.evaluation_days)},
                  {"daylight_only", s.daylight_only},
                  {"exceedance_thresholds", s.exceedance_thresholds},
                  {"seasonal", s.seasonal},
                  {"exceedance", s.exceedance},
                  {"weather_cases", s.weather_cases},
                  {"cloud_threshold", s.cloud_threshold},
                  {"sweep", s.sweep},
                  {"sweep_points", s.sweep_points},
                  {"training_length", s.training_length},
                  {"training_lengths_days", s.training_lengths_days},
                  {"training_length_eval_days", s.training_length_eval_days}};

  const WeatherProfile& p = c.synth.profile;
  json degradation = json::object();
  for (std::size_t k = 0; k < kParamCount; ++k) {
    const Trajectory& t = c.synth.scenario.trajectory[k];
    degradation[kParamNames[k]] = {
        {"kind", kind_name(t.kind)}, {"relative_change", t.relative_change}, {"step_day", t.step_day}};
  }
  j["synth"] = {{"start", format_day(p.start_day)},
                {"days", p.days},
                {"cadence_minutes", p.cadence.count()},
                {"peak_irradiance", p.peak_irradiance},
                {"day_length_hours", p.day_length_hours},
                {"cloud_days", std::vector<int>(p.cloud_days.begin(), p.cloud_days.end())},
                {"cloud_depth", p.cloud_depth},
                {"cloud_timescale_minutes", p.cloud_timescale_minutes},
                {"ambient_base", p.ambient_base},
                {"true_params", c.synth.true_params ? write_params(*c.synth.true_params) : json(nullptr)},
                {"degradation", degradation},
                {"noise_v", c.synth.noise_v},
                {"noise_i", c.synth.noise_i},
                {"p_dc_limit_w", opt_json(c.synth.p_dc_limit_w)}};

  j["predict"] = {{"weather", c.predict.weather},
                  {"params", c.predict.params ? write_params(*c.predict.params) : json(nullptr)}};
  return j;
}

RunConfig from_json(const json& root) {
  RunConfig c;
  Section top(root, "config");
  c.seed = top.get<std::uint64_t>("seed", 1);

  {
    Section s = top.sub("data");
    c.data.telemetry = s.get<std::string>("telemetry", "");
    c.data.mapping = s.get<std::string>("mapping", "");
    c.data.output = s.get<std::string>("output", "out");
    c.data.report = s.get<std::string>("report", "");
  }
  {
    Section s = top.sub("system");
    c.system.p_nominal_w = s.require<double>("p_nominal_w");
    Section t = s.sub("topology");
    c.system.topology.cells_in_series = t.get<int>("cells_in_series", 60);
    c.system.topology.modules_per_string = t.get<int>("modules_per_string", 1);
    c.system.topology.strings_in_parallel = t.get<int>("strings_in_parallel", 1);
    if (s.has("datasheet")) c.system.datasheet = read_datasheet(s.sub("datasheet"));
    c.system.climate_zone = s.get<std::string>("climate_zone", "");
  }
  {
    Section s = top.sub("preprocess");
    c.preprocess.g_min = s.get<double>("g_min", 50.0);
    c.preprocess.k_sigma = s.get<double>("k_sigma", 3.0);
    Section cl = s.sub("clipping");
    c.preprocess.clipping.p_ac_limit = cl.optional<double>("p_ac_limit_w");
    c.preprocess.clipping.limit_fraction = cl.get<double>("limit_fraction", 0.98);
    c.preprocess.clipping.plateau_band = cl.get<double>("plateau_band", 0.005);
    c.preprocess.clipping.plateau_run = cl.get<int>("plateau_run", 3);
  }
  {
    Section s = top.sub("fit");
    c.fit.window_days = s.get<int>("window_days", 3);
    c.fit.update_days = s.get<int>("update_days", 1);
    c.fit.warm_start = s.get<bool>("warm_start", true);
    c.fit.max_iterations = s.get<int>("max_iterations", 200);
    c.fit.loss_tolerance = s.get<double>("loss_tolerance", 1e-10);
    if (s.has("bounds")) c.fit.bounds = read_bounds(s.sub("bounds"));
    if (s.has("initial")) c.fit.initial = read_params(s.sub("initial"));
    c.fit.v_scale = s.optional<double>("v_scale");
    c.fit.i_scale = s.optional<double>("i_scale");
  }
  {
    Section s = top.sub("models");
    c.models.roster = s.get<std::vector<std::string>>("roster", c.models.roster);
    c.models.horizon_hours = s.get<int>("horizon_hours", 24);
    Section g = s.sub("grid");
    c.models.grid.lambdas = g.get<std::vector<double>>("lambdas", c.models.grid.lambdas);
    c.models.grid.gammas = g.get<std::vector<double>>("gammas", c.models.grid.gammas);
    c.models.grid.training_days = g.get<std::vector<int>>("training_days", c.models.grid.training_days);
    c.models.grid.holdout_days = g.get<int>("holdout_days", 1);
  }
  {
    Section s = top.sub("studies");
    StudiesConfig& st = c.studies;
    if (const auto d = s.optional<std::string>("evaluation_start")) {
      try {
        st.evaluation_start = parse_day(*d);
      } catch (const Error&) {
        throw ConfigError("studies.evaluation_start is not a YYYY-MM-DD date");
      }
    }
    st.evaluation_days = s.optional<int>("evaluation_days");
    st.daylight_only = s.get<bool>("daylight_only", true);
    st.exceedance_thresholds = s.get<std::vector<double>>("exceedance_thresholds", st.exceedance_thresholds);
    st.seasonal = s.get<bool>("seasonal", true);
    st.exceedance = s.get<bool>("exceedance", true);
    st.weather_cases = s.get<bool>("weather_cases", true);
    st.cloud_threshold = s.get<double>("cloud_threshold", 0.05);
    st.sweep = s.get<bool>("sweep", true);
    st.sweep_points = s.get<int>("sweep_points", 101);
    st.training_length = s.get<bool>("training_length", false);
    st.training_lengths_days = s.get<std::vector<int>>("training_lengths_days", st.training_lengths_days);
    st.training_length_eval_days = s.get<int>("training_length_eval_days", 7);
  }
  {
    Section s = top.sub("synth");
    WeatherProfile& p = c.synth.profile;
    if (const auto d = s.optional<std::string>("start")) {
      try {
        p.start_day = parse_day(*d);
      } catch (const Error&) {
        throw ConfigError("synth.start is not a YYYY-MM-DD date");
      }
    }
    p.days = s.get<int>("days", p.days);
    p.cadence = std::chrono::minutes{s.get<int>("cadence_minutes", 15)};
    p.peak_irradiance = s.get<double>("peak_irradiance", p.peak_irradiance);
    p.day_length_hours = s.get<double>("day_length_hours", p.day_length_hours);
    const auto cloud = s.get<std::vector<int>>("cloud_days", {});
    p.cloud_days = std::set<int>(cloud.begin(), cloud.end());
    p.cloud_depth = s.get<double>("cloud_depth", p.cloud_depth);
    p.cloud_timescale_minutes = s.get<double>("cloud_timescale_minutes", p.cloud_timescale_minutes);
    p.ambient_base = s.get<double>("ambient_base", p.ambient_base);
    if (s.has("true_params")) c.synth.true_params = read_params(s.sub("true_params"));
    Section d = s.sub("degradation");
    for (std::size_t k = 0; k < kParamCount; ++k)
      if (d.has(kParamNames[k])) c.synth.scenario.trajectory[k] = read_trajectory(d.sub(kParamNames[k]));
    c.synth.noise_v = s.get<double>("noise_v", 0.005);
    c.synth.noise_i = s.get<double>("noise_i", 0.005);
    c.synth.p_dc_limit_w = s.optional<double>("p_dc_limit_w");
  }
  {
    Section s = top.sub("predict");
    c.predict.weather = s.get<std::string>("weather", "");
    if (s.has("params")) c.predict.params = read_params(s.sub("params"));
  }
  return c;
}

}  // namespace

void validate(const RunConfig& c) {
  if (!(c.system.p_nominal_w > 0.0)) throw ConfigError("system.p_nominal_w must be positive");
  validate(c.system.topology);
  if (c.system.datasheet) {
    validate(*c.system.datasheet);
    if (c.system.datasheet->cells_in_series != c.system.topology.cells_in_series)
      throw ConfigError("datasheet cells_in_series differs from system.topology.cells_in_series");
  }
  if (c.models.roster.empty()) throw ConfigError("models.roster must not be empty");
  std::set<std::string> seen;
  for (const auto& m : c.models.roster) {
    if (std::find(kKnownModels.begin(), kKnownModels.end(), m) == kKnownModels.end())
      throw ConfigError("unknown model '" + m + "' in roster");
    if (!seen.insert(m).second) throw ConfigError("model '" + m + "' listed twice");
  }
  const bool has = [&] {
    return std::find(c.models.roster.begin(), c.models.roster.end(), "nominal") != c.models.roster.end();
  }();
  if (has && !c.system.datasheet) throw ConfigError("the nominal model requires system.datasheet");
  if (!c.system.datasheet && (!c.fit.initial || !c.fit.bounds || !c.fit.v_scale || !c.fit.i_scale))
    throw ConfigError("without a datasheet fit.initial, fit.bounds, fit.v_scale and fit.i_scale are required");
  if (c.fit.window_days < 1 || c.fit.update_days < 1) throw ConfigError("fit window and update period must be >= 1 day");
  if (c.fit.max_iterations < 1) throw ConfigError("fit.max_iterations must be >= 1");
  if (c.models.horizon_hours < 0) throw ConfigError("models.horizon_hours must be >= 0");
  validate(c.models.grid);
  if (c.preprocess.g_min < 0.0 || c.preprocess.k_sigma <= 0.0) throw ConfigError("invalid preprocess thresholds");
  if (c.studies.evaluation_days && *c.studies.evaluation_days < 1) throw ConfigError("studies.evaluation_days must be >= 1");
  if (c.studies.sweep_points < 2) throw ConfigError("studies.sweep_points must be >= 2");
  if (c.studies.training_length_eval_days < 1) throw ConfigError("studies.training_length_eval_days must be >= 1");
  if (!std::is_sorted(c.studies.training_lengths_days.begin(), c.studies.training_lengths_days.end()))
    throw ConfigError("studies.training_lengths_days must be ascending");
  if (c.synth.noise_v < 0.0 || c.synth.noise_i < 0.0) throw ConfigError("synth noise must be >= 0");
  validate(c.synth.profile);
  if (c.fit.bounds)
    for (const auto& r : c.fit.bounds->range)
      if (!(r.lo < r.hi)) throw ConfigError("fit.bounds entries must satisfy lo < hi");
}

RunConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig c = from_json(root);
  validate(c);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const DataError& e) {
    throw ConfigError(e.what());
  }
  return parse_config(text);
}

std::string canonical_json(const RunConfig& cfg) { return to_json(cfg).dump(); }

std::string config_hash(const RunConfig& cfg) {
  // Output locations say where results go, not what is computed.
  RunConfig hashed = cfg;
  hashed.data.output.clear();
  hashed.data.report.clear();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical_json(hashed)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<std::string> parse_roster(const std::string& csv) {
  std::vector<std::string> out;
  for (auto& f : split_csv_line(csv)) {
    const auto b = f.find_first_not_of(' ');
    const auto e = f.find_last_not_of(' ');
    if (b != std::string::npos) out.push_back(f.substr(b, e - b + 1));
  }
  if (out.empty()) throw ConfigError("model list is empty");
  return out;
}

FitOptions fit_options(const RunConfig& cfg) {
  FitOptions o;
  if (cfg.system.datasheet) o = FitOptions::from_datasheet(*cfg.system.datasheet, cfg.system.topology);
  if (cfg.fit.bounds) o.bounds = *cfg.fit.bounds;
  if (cfg.fit.v_scale) o.v_scale = *cfg.fit.v_scale;
  if (cfg.fit.i_scale) o.i_scale = *cfg.fit.i_scale;
  o.max_iterations = cfg.fit.max_iterations;
  o.loss_tolerance = cfg.fit.loss_tolerance;
  o.g_min = cfg.preprocess.g_min;
  return o;
}

RollingFitOptions rolling_options(const RunConfig& cfg) {
  RollingFitOptions r;
  r.window_length = std::chrono::days{cfg.fit.window_days};
  r.update_period = std::chrono::days{cfg.fit.update_days};
  r.warm_start = cfg.fit.warm_start;
  r.preprocess = cfg.preprocess;
  return r;
}

}  // namespace pvprof
