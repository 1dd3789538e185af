#ifndef DBD_DBD_H
#define DBD_DBD_H

/* C interface to the double Bragg diffraction library. Handles are opaque;
 * every call reports a dbd_status and keeps a per-thread message available
 * through dbd_last_error(). Strings returned through char** out-parameters
 * are owned by the caller and released with dbd_string_free(). */

#include <stddef.h>
#include <stdint.h>

#if defined(DBD_BUILDING_LIBRARY)
#define DBD_API __attribute__((visibility("default")))
#else
#define DBD_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dbd_status {
  DBD_OK = 0,
  DBD_ERR_INVALID_ARGUMENT = 1,
  DBD_ERR_MISSING_SI_CONTEXT = 2,
  DBD_ERR_BASIS_TOO_SMALL = 3,
  DBD_ERR_QUADRATURE_TOO_COARSE = 4,
  DBD_ERR_TOLERANCE_NOT_MET = 5,
  DBD_ERR_NORM_DRIFT = 6,
  DBD_ERR_GRID_TOO_COARSE = 7,
  DBD_ERR_INCONSISTENT_BASIS = 8,
  DBD_ERR_INVALID_POPULATION = 9,
  DBD_ERR_BUDGET_EXHAUSTED = 10,
  DBD_ERR_INCOMPATIBLE_TIER = 11,
  DBD_ERR_UNKNOWN_FIGURE = 12,
  DBD_ERR_CONFIG = 13,
  DBD_ERR_IO = 14,
  DBD_ERR_INTERNAL = 99
} dbd_status;

typedef struct dbd_scenario dbd_scenario;
typedef struct dbd_result dbd_result;

/* Called with the number of cost evaluations so far and the best cost. */
typedef void (*dbd_progress_fn)(size_t evaluations, double best_cost, void* user);

DBD_API const char* dbd_version(void);
DBD_API const char* dbd_status_name(dbd_status status);
/* Non-zero for failures caused by numerical tolerances rather than input. */
DBD_API int dbd_status_is_numerical(dbd_status status);
/* Message of the last failing call on this thread ("" if none). */
DBD_API const char* dbd_last_error(void);
DBD_API void dbd_string_free(char* s);

/* Scenarios ------------------------------------------------------------- */

DBD_API dbd_status dbd_scenario_new(dbd_scenario** out);
DBD_API dbd_status dbd_scenario_from_json(const char* json, dbd_scenario** out);
DBD_API dbd_status dbd_scenario_to_json(const dbd_scenario* s, char** out);
/* tls | rwa | five_level | n_level(n) | exact */
DBD_API dbd_status dbd_scenario_set_tier(dbd_scenario* s, const char* tier);
/* Keys: eps, p, sigma_p, dt, tol. */
DBD_API dbd_status dbd_scenario_set_value(dbd_scenario* s, const char* key, double value);
DBD_API dbd_status dbd_scenario_set_gaussian(dbd_scenario* s, double omega_r, double tau, double t0);
DBD_API dbd_status dbd_scenario_set_box(dbd_scenario* s, double omega, double tau);
DBD_API dbd_status dbd_scenario_set_constant_detuning(dbd_scenario* s, double delta);
DBD_API void dbd_scenario_free(dbd_scenario* s);

/* Single evolutions ----------------------------------------------------- */

DBD_API dbd_status dbd_simulate(const dbd_scenario* s, dbd_result** out);
DBD_API int dbd_result_max_order(const dbd_result* r);
/* Population of bare order n (|p + 2 n hbar k_L>), 0 outside -K..K. */
DBD_API dbd_status dbd_result_population(const dbd_result* r, int order, double* out);
DBD_API dbd_status dbd_result_dbd_efficiency(const dbd_result* r, double* out);
DBD_API dbd_status dbd_result_oct_bs_efficiency(const dbd_result* r, double* out);
DBD_API dbd_status dbd_result_norm_drift(const dbd_result* r, double* out);
/* Populations, metrics, diagnostics and trajectory as JSON. */
DBD_API dbd_status dbd_result_to_json(const dbd_result* r, char** out);
/* Trajectory as CSV (t, populations, norm); empty body without samples. */
DBD_API dbd_status dbd_result_trajectory_csv(const dbd_result* r, char** out);
DBD_API void dbd_result_free(dbd_result* r);

/* Scans and comparisons -------------------------------------------------
 * axes_json: [{"name": "tau", "values": [...]}] or
 *            [{"name": "tau", "min": a, "max": b, "count": n}] or
 *            [{"name": "tau", "min": a, "max": b, "step": h}]. */

DBD_API dbd_status dbd_scan_csv(const dbd_scenario* s, const char* axes_json, char** csv_out);
DBD_API dbd_status dbd_validate(const char* tier_a, const char* tier_b, const dbd_scenario* s, const char* axes_json,
                                char** report_json);

/* Figure presets. options_json keys: out, seed, dt, tol, outcome, campaigns,
 * quick. Writes the tables and summary into "out"; returns the summary. */
DBD_API dbd_status dbd_figure_ids(char** json_array);
DBD_API dbd_status dbd_reproduce(const char* figure, const char* options_json, dbd_progress_fn progress, void* user,
                                 char** summary_json);
DBD_API dbd_status dbd_presets_json(char** out);

/* Optimization campaign from its JSON definition. A non-zero seed overrides
 * the campaign seed; budget 0 keeps the campaign budget. */
DBD_API dbd_status dbd_optimize(const char* campaign_json, uint64_t seed, size_t budget, dbd_progress_fn progress,
                                void* user, char** outcome_json);

/* Units: quantity "time" | "frequency", direction "to_si" | "to_natural". */
DBD_API dbd_status dbd_recoil_frequency(double wavelength_m, double mass_kg, double* out);
DBD_API dbd_status dbd_convert_units(double value, const char* quantity, const char* direction, double wavelength_m,
                                     double mass_kg, double* out);

#ifdef __cplusplus
}
#endif

#endif
