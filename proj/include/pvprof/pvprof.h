/* C interface of libpvprof. All functions return a status code; on failure
 * pvprof_last_error() describes the problem (thread-local, valid until the
 * next call on the same thread). Handles are opaque and freed with the
 * matching *_free function; passing NULL to a free function is allowed. */
#ifndef PVPROF_H
#define PVPROF_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define PVPROF_API __declspec(dllexport)
#else
#define PVPROF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Values double as CLI exit codes. */
typedef enum pvprof_status {
  PVPROF_OK = 0,
  PVPROF_ERR_INTERNAL = 1,
  PVPROF_ERR_CONFIG = 2,
  PVPROF_ERR_DATA = 3,
  PVPROF_ERR_NUMERIC = 4
} pvprof_status;

typedef struct pvprof_sdm_params {
  double i_ph_ref; /* A */
  double i_0_ref;  /* A */
  double r_s;      /* Ohm */
  double r_sh_ref; /* Ohm */
  double n_diode;
} pvprof_sdm_params;

typedef struct pvprof_topology {
  int cells_in_series;
  int modules_per_string;
  int strings_in_parallel;
} pvprof_topology;

typedef struct pvprof_datasheet {
  double v_oc, i_sc, v_mp, i_mp; /* STC */
  double alpha_isc;              /* A/C */
  double beta_voc;               /* V/C */
  int cells_in_series;
} pvprof_datasheet;

typedef struct pvprof_record {
  int64_t timestamp; /* seconds since 1970-01-01T00:00:00Z */
  double g_poa, t_module, v_dc, i_dc;
} pvprof_record;

typedef struct pvprof_fit_window {
  int64_t window_start, window_end;
  pvprof_sdm_params params;
  double final_loss;
  int iterations;
  int converged;
  size_t n_points;
  int ok; /* 0 when the window could not be fitted */
} pvprof_fit_window;

typedef struct pvprof_config pvprof_config;
typedef struct pvprof_series pvprof_series;
typedef struct pvprof_trajectory pvprof_trajectory;

PVPROF_API const char* pvprof_version(void);
PVPROF_API const char* pvprof_last_error(void);
PVPROF_API void pvprof_set_verbose(int on);

/* Single-diode model */
PVPROF_API pvprof_status pvprof_array_mpp(const pvprof_sdm_params* params, const pvprof_topology* topo, double g_poa,
                                          double t_cell, double alpha_isc, double* v_dc, double* i_dc);
PVPROF_API pvprof_status pvprof_fit_datasheet(const pvprof_datasheet* ds, pvprof_sdm_params* out);

/* Configuration */
PVPROF_API pvprof_status pvprof_config_load(const char* path, pvprof_config** out);
PVPROF_API pvprof_status pvprof_config_parse(const char* json_text, pvprof_config** out);
PVPROF_API pvprof_status pvprof_config_set_seed(pvprof_config* cfg, uint64_t seed);
PVPROF_API pvprof_status pvprof_config_set_models(pvprof_config* cfg, const char* csv_list);
PVPROF_API pvprof_status pvprof_config_set_output(pvprof_config* cfg, const char* dir);
/* Hex digest of the normalized configuration; valid until the handle changes. */
PVPROF_API const char* pvprof_config_hash(const pvprof_config* cfg);
PVPROF_API void pvprof_config_free(pvprof_config* cfg);

/* Telemetry */
PVPROF_API pvprof_status pvprof_series_load(const char* path, const char* mapping_path, pvprof_series** out,
                                            size_t* n_rejected);
PVPROF_API size_t pvprof_series_size(const pvprof_series* s);
PVPROF_API pvprof_status pvprof_series_get(const pvprof_series* s, size_t index, pvprof_record* out);
PVPROF_API pvprof_status pvprof_series_save(const pvprof_series* s, const char* path);
PVPROF_API void pvprof_series_free(pvprof_series* s);

/* Rolling fit with the configuration's fit and preprocess sections. */
PVPROF_API pvprof_status pvprof_rolling_fit(const pvprof_config* cfg, const pvprof_series* s, pvprof_trajectory** out);
PVPROF_API size_t pvprof_trajectory_size(const pvprof_trajectory* t);
PVPROF_API pvprof_status pvprof_trajectory_get(const pvprof_trajectory* t, size_t index, pvprof_fit_window* out);
PVPROF_API void pvprof_trajectory_free(pvprof_trajectory* t);

/* Commands; outputs go to the configuration's output directory. */
PVPROF_API pvprof_status pvprof_cmd_synth(const pvprof_config* cfg);
PVPROF_API pvprof_status pvprof_cmd_fit(const pvprof_config* cfg);
PVPROF_API pvprof_status pvprof_cmd_predict(const pvprof_config* cfg);
PVPROF_API pvprof_status pvprof_cmd_benchmark(const pvprof_config* cfg);
/* Renders the report named by data.report (default <output>/benchmark_report.json). */
PVPROF_API pvprof_status pvprof_cmd_report(const pvprof_config* cfg);

#ifdef __cplusplus
}
#endif

#endif
