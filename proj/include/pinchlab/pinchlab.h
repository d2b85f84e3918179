#ifndef PINCHLAB_H
#define PINCHLAB_H

/* C interface to the pinchlab core.  Every fallible call returns a
 * pl_status; on failure the thread-local last error holds a message and,
 * for parse errors, a 1-based line and column.  Strings returned through
 * char** are owned by the caller and released with pl_string_free. */

#include <stddef.h>

#if defined(_WIN32)
#define PL_API __declspec(dllexport)
#else
#define PL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pl_status {
  PL_OK = 0,
  PL_ERR_DOMAIN = 1,      /* argument outside the admissible range */
  PL_ERR_UNSUPPORTED = 2, /* input outside the rotationally invariant model */
  PL_ERR_STRUCTURE = 3,   /* inconsistent surface descriptor */
  PL_ERR_HYPOTHESIS = 4,  /* a lemma hypothesis is violated */
  PL_ERR_PARSE = 5,       /* malformed JSON or inline spec */
  PL_ERR_ARGUMENT = 6,    /* null pointer or index out of range */
  PL_ERR_INTERNAL = 7
} pl_status;

PL_API const char* pl_version(void);
PL_API const char* pl_status_name(pl_status s);
/* Valid until the next failing call on the same thread. */
PL_API const char* pl_last_error_message(void);
PL_API int pl_last_error_line(void);
PL_API int pl_last_error_column(void);
PL_API void pl_string_free(char* s);

/* ---- collar ------------------------------------------------------------ */

typedef struct pl_collar pl_collar;

PL_API pl_status pl_collar_create(double ell, pl_collar** out);
PL_API void pl_collar_destroy(pl_collar* c);
PL_API double pl_collar_ell(const pl_collar* c);
PL_API double pl_collar_half_width(const pl_collar* c);
/* Distance from the central geodesic to the boundary, d(0). */
PL_API double pl_collar_tau_max(const pl_collar* c);
PL_API pl_status pl_collar_rho(const pl_collar* c, double s, double* out);
PL_API pl_status pl_collar_dist_to_boundary(const pl_collar* c, double s, double* out);
PL_API pl_status pl_collar_inj(const pl_collar* c, double s, double* out);
PL_API pl_status pl_collar_area(const pl_collar* c, double s1, double s2, double* out);
/* asinh(e^-d) <= inj <= asinh((1 + sqrt 2) e^-d) at distance d from the boundary. */
PL_API pl_status pl_inj_bounds(double d, double* lo, double* hi);
/* Zero-violation check of the distance-ball bounds of radius r on an n-point grid. */
PL_API pl_status pl_collar_bound_sweep(const pl_collar* c, double r, size_t n, int* passed, double* worst_slack);

/* ---- pinch schedules and curves ---------------------------------------- */

typedef struct pl_schedule pl_schedule;
typedef struct pl_curve pl_curve;

typedef struct pl_curve_config {
  size_t time_samples;
  size_t d_samples;
  double window;
  double delta;
} pl_curve_config;

/* JSON when the text starts with '{', inline spec ("power:p=3", "linear", "constant") otherwise. */
PL_API pl_status pl_schedule_parse(const char* text, pl_schedule** out);
PL_API void pl_schedule_destroy(pl_schedule* s);
PL_API pl_status pl_schedule_to_json(const pl_schedule* s, char** out);

PL_API void pl_curve_config_default(pl_curve_config* cfg);
PL_API pl_status pl_curve_simulate(const pl_schedule* s, const pl_curve_config* cfg, pl_curve** out);
PL_API void pl_curve_destroy(pl_curve* c);
PL_API int pl_curve_finite_length(const pl_curve* c);
PL_API size_t pl_curve_warning_count(const pl_curve* c);
PL_API const char* pl_curve_warning(const pl_curve* c, size_t i);
PL_API pl_status pl_curve_csv(const pl_curve* c, char** out);
PL_API pl_status pl_curve_json(const pl_curve* c, char** out);

/* ---- verification ------------------------------------------------------ */

typedef struct pl_config pl_config;
typedef struct pl_report pl_report;

PL_API pl_status pl_config_create(pl_config** out);
PL_API void pl_config_destroy(pl_config* c);
PL_API pl_status pl_config_set_ell_range(pl_config* c, double ell_min, double ell_max);
PL_API pl_status pl_config_set_samples(pl_config* c, size_t n);
PL_API pl_status pl_config_set_grid(pl_config* c, size_t n);
PL_API pl_status pl_config_set_time_grid(pl_config* c, size_t n);
PL_API pl_status pl_config_set_tolerance(pl_config* c, const char* name, double value);
PL_API pl_status pl_config_set_schedule(pl_config* c, const char* text);
PL_API pl_status pl_config_validate(const pl_config* c);

PL_API size_t pl_suite_count(void);
PL_API const char* pl_suite_id(size_t i);
PL_API pl_status pl_verify(const char* suite_id, const pl_config* cfg, pl_report** out);
PL_API void pl_report_destroy(pl_report* r);
PL_API int pl_report_passed(const pl_report* r);
PL_API pl_status pl_report_json(const pl_report* r, char** out);
PL_API size_t pl_report_record_count(const pl_report* r);
/* One line per record: "PASS id" or "FAIL id: note". */
PL_API pl_status pl_report_summary(const pl_report* r, char** out);
PL_API size_t pl_report_table_count(const pl_report* r);
PL_API const char* pl_report_table_name(const pl_report* r, size_t i);
PL_API pl_status pl_report_table_csv(const pl_report* r, size_t i, char** out);

/* Documentation of every CSV column and every named tolerance. */
PL_API pl_status pl_csv_schema_doc(char** out);
PL_API pl_status pl_tolerance_doc(char** out);

#ifdef __cplusplus
}
#endif

#endif
