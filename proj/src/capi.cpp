#include "pvprof/pvprof.h"

#include <exception>
#include <new>
#include <string>

#include "pvprof/config.hpp"
#include "pvprof/error.hpp"
#include "pvprof/io.hpp"
#include "pvprof/log.hpp"
#include "pvprof/pipeline.hpp"

struct pvprof_config {
  pvprof::RunConfig cfg;
  std::string hash;
};

struct pvprof_series {
  pvprof::TelemetrySeries records;
};

struct pvprof_trajectory {
  std::vector<pvprof::FitWindowResult> fits;
};

namespace {

thread_local std::string g_last_error;

pvprof_status fail(pvprof_status s, const char* what) {
  g_last_error = what;
  return s;
}

template <class F>
pvprof_status guarded(F&& f) {
  try {
    f();
    g_last_error.clear();
    return PVPROF_OK;
  } catch (const pvprof::Error& e) {
    return fail(static_cast<pvprof_status>(e.kind()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(PVPROF_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(PVPROF_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(PVPROF_ERR_INTERNAL, "unknown error");
  }
}

void require(const void* p, const char* name) {
  if (!p) throw pvprof::ConfigError(std::string(name) + " must not be NULL");
}

pvprof::SdmParamsRef from_c(const pvprof_sdm_params& p) { return {p.i_ph_ref, p.i_0_ref, p.r_s, p.r_sh_ref, p.n_diode}; }

pvprof_sdm_params to_c(const pvprof::SdmParamsRef& p) { return {p.i_ph_ref, p.i_0_ref, p.r_s, p.r_sh_ref, p.n_diode}; }

int64_t seconds(pvprof::Instant t) { return t.time_since_epoch().count(); }

void refresh_hash(pvprof_config* c) { c->hash = pvprof::config_hash(c->cfg); }

std::string report_path(const pvprof::RunConfig& cfg) {
  return cfg.data.report.empty() ? cfg.data.output + "/benchmark_report.json" : cfg.data.report;
}

}  // namespace

extern "C" {

const char* pvprof_version(void) { return pvprof::library_version(); }

const char* pvprof_last_error(void) { return g_last_error.c_str(); }

void pvprof_set_verbose(int on) { pvprof::set_verbose(on != 0); }

pvprof_status pvprof_array_mpp(const pvprof_sdm_params* params, const pvprof_topology* topo, double g_poa,
                               double t_cell, double alpha_isc, double* v_dc, double* i_dc) {
  return guarded([&] {
    require(params, "params");
    require(topo, "topo");
    require(v_dc, "v_dc");
    require(i_dc, "i_dc");
    const pvprof::ArrayTopology t{topo->cells_in_series, topo->modules_per_string, topo->strings_in_parallel};
    const auto op = pvprof::simulate_array_mpp(from_c(*params), t, {g_poa, t_cell}, alpha_isc);
    *v_dc = op.v_dc;
    *i_dc = op.i_dc;
  });
}

pvprof_status pvprof_fit_datasheet(const pvprof_datasheet* ds, pvprof_sdm_params* out) {
  return guarded([&] {
    require(ds, "ds");
    require(out, "out");
    const pvprof::Datasheet d{ds->v_oc, ds->i_sc, ds->v_mp, ds->i_mp, ds->alpha_isc, ds->beta_voc, ds->cells_in_series};
    *out = to_c(pvprof::fit_desoto_from_datasheet(d));
  });
}

pvprof_status pvprof_config_load(const char* path, pvprof_config** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = nullptr;
    auto* c = new pvprof_config{pvprof::load_config(path), {}};
    refresh_hash(c);
    *out = c;
  });
}

pvprof_status pvprof_config_parse(const char* json_text, pvprof_config** out) {
  return guarded([&] {
    require(json_text, "json_text");
    require(out, "out");
    *out = nullptr;
    auto* c = new pvprof_config{pvprof::parse_config(json_text), {}};
    refresh_hash(c);
    *out = c;
  });
}

pvprof_status pvprof_config_set_seed(pvprof_config* cfg, uint64_t seed) {
  return guarded([&] {
    require(cfg, "cfg");
    cfg->cfg.seed = seed;
    refresh_hash(cfg);
  });
}

pvprof_status pvprof_config_set_models(pvprof_config* cfg, const char* csv_list) {
  return guarded([&] {
    require(cfg, "cfg");
    require(csv_list, "csv_list");
    pvprof::RunConfig next = cfg->cfg;
    next.models.roster = pvprof::parse_roster(csv_list);
    pvprof::validate(next);
    cfg->cfg = std::move(next);
    refresh_hash(cfg);
  });
}

pvprof_status pvprof_config_set_output(pvprof_config* cfg, const char* dir) {
  return guarded([&] {
    require(cfg, "cfg");
    require(dir, "dir");
    cfg->cfg.data.output = dir;
    refresh_hash(cfg);
  });
}

const char* pvprof_config_hash(const pvprof_config* cfg) { return cfg ? cfg->hash.c_str() : ""; }

void pvprof_config_free(pvprof_config* cfg) { delete cfg; }

pvprof_status pvprof_series_load(const char* path, const char* mapping_path, pvprof_series** out, size_t* n_rejected) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = nullptr;
    const pvprof::ColumnMapping m =
        mapping_path && *mapping_path ? pvprof::load_column_mapping(mapping_path) : pvprof::ColumnMapping{};
    pvprof::IngestResult r = pvprof::read_telemetry_csv(std::string(path), m);
    for (const auto& d : r.diagnostics) pvprof::log_info(d);
    if (n_rejected) *n_rejected = r.diagnostics.size();
    *out = new pvprof_series{std::move(r.records)};
  });
}

size_t pvprof_series_size(const pvprof_series* s) { return s ? s->records.size() : 0; }

pvprof_status pvprof_series_get(const pvprof_series* s, size_t index, pvprof_record* out) {
  return guarded([&] {
    require(s, "series");
    require(out, "out");
    if (index >= s->records.size()) throw pvprof::ConfigError("record index out of range");
    const auto& r = s->records[index];
    *out = {seconds(r.timestamp), r.g_poa, r.t_module, r.v_dc, r.i_dc};
  });
}

pvprof_status pvprof_series_save(const pvprof_series* s, const char* path) {
  return guarded([&] {
    require(s, "series");
    require(path, "path");
    pvprof::write_telemetry_csv(std::string(path), s->records);
  });
}

void pvprof_series_free(pvprof_series* s) { delete s; }

pvprof_status pvprof_rolling_fit(const pvprof_config* cfg, const pvprof_series* s, pvprof_trajectory** out) {
  return guarded([&] {
    require(cfg, "cfg");
    require(s, "series");
    require(out, "out");
    *out = nullptr;
    const auto& c = cfg->cfg;
    pvprof::validate_series(s->records);
    auto fits = pvprof::rolling_fit(s->records, c.system.topology, pvprof::pvpro_initial(c), pvprof::fit_options(c),
                                    pvprof::rolling_options(c));
    *out = new pvprof_trajectory{std::move(fits)};
  });
}

size_t pvprof_trajectory_size(const pvprof_trajectory* t) { return t ? t->fits.size() : 0; }

pvprof_status pvprof_trajectory_get(const pvprof_trajectory* t, size_t index, pvprof_fit_window* out) {
  return guarded([&] {
    require(t, "trajectory");
    require(out, "out");
    if (index >= t->fits.size()) throw pvprof::ConfigError("window index out of range");
    const auto& f = t->fits[index];
    *out = {seconds(f.window_start), seconds(f.window_end), to_c(f.params), f.final_loss, f.iterations,
            f.converged ? 1 : 0,     f.n_points,            f.ok() ? 1 : 0};
  });
}

void pvprof_trajectory_free(pvprof_trajectory* t) { delete t; }

pvprof_status pvprof_cmd_synth(const pvprof_config* cfg) {
  return guarded([&] {
    require(cfg, "cfg");
    pvprof::cmd_synth(cfg->cfg);
  });
}

pvprof_status pvprof_cmd_fit(const pvprof_config* cfg) {
  return guarded([&] {
    require(cfg, "cfg");
    pvprof::cmd_fit(cfg->cfg);
  });
}

pvprof_status pvprof_cmd_predict(const pvprof_config* cfg) {
  return guarded([&] {
    require(cfg, "cfg");
    pvprof::cmd_predict(cfg->cfg);
  });
}

pvprof_status pvprof_cmd_benchmark(const pvprof_config* cfg) {
  return guarded([&] {
    require(cfg, "cfg");
    pvprof::cmd_benchmark(cfg->cfg);
  });
}

pvprof_status pvprof_cmd_report(const pvprof_config* cfg) {
  return guarded([&] {
    require(cfg, "cfg");
    pvprof::cmd_report(report_path(cfg->cfg), cfg->cfg.data.output);
  });
}

}  // extern "C"
