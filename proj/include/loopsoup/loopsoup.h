#ifndef LOOPSOUP_H
#define LOOPSOUP_H

#include <stddef.h>
#include <stdint.h>

#if defined(LOOPSOUP_BUILDING)
#define LS_API __attribute__((visibility("default")))
#else
#define LS_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ls_status {
    LS_OK = 0,
    LS_INVALID_ARGUMENT,
    LS_OUT_OF_DOMAIN,
    LS_DEGENERATE_DERIVATIVE,
    LS_NON_CONVERGENT,
    LS_NON_INTEGRABLE,
    LS_ENDPOINT_MISMATCH,
    LS_POINT_NOT_ON_LOOP,
    LS_DEGENERATE_GRID,
    LS_WINDOW_UNBOUNDED,
    LS_WINDOW_TOO_SMALL,
    LS_BUDGET,
    LS_TOO_FEW_SAMPLES,
    LS_SPARSE_TABLE,
    LS_IO,
    LS_CONFIG,
    LS_INTERNAL
} ls_status;

typedef struct ls_config ls_config;

/* Receives each line a command prints, without the trailing newline. */
typedef void (*ls_line_fn)(const char* line, void* user);

LS_API const char* ls_version(void);
LS_API const char* ls_status_name(ls_status s);
/* Message of the last failing call on this thread; "" if none. */
LS_API const char* ls_last_error(void);
LS_API void ls_string_free(char* s);

/* Config for one command, layered as flags > file > defaults. */
LS_API ls_status ls_config_new(const char* command, ls_config** out);
LS_API void ls_config_free(ls_config* cfg);
/* Replaces the file layer with a JSON object. */
LS_API ls_status ls_config_load_json(ls_config* cfg, const char* json_text);
LS_API ls_status ls_config_load_file(ls_config* cfg, const char* path);
/* Sets a flag from its text form ("1e6", "x0,y0,x1,y1", "true"). */
LS_API ls_status ls_config_set(ls_config* cfg, const char* key, const char* value);
/* Merged and validated config; free with ls_string_free. */
LS_API ls_status ls_config_to_json(const ls_config* cfg, char** out);

/* Runs the command. `passed` (may be NULL) is 0 only when verify saw a
   failing criterion; `result_json` (may be NULL) receives the summary. */
LS_API ls_status ls_run(const ls_config* cfg, ls_line_fn on_line, void* user, int* passed, char** result_json);

LS_API ls_status ls_hcap(const char* set, double size, uint64_t n, uint64_t seed, int threads, double* estimate,
                         double* std_error);

/* Exit density per unit arc length at e^{i phi} for Brownian motion started
   at x + iy in the unit half-disk. */
LS_API ls_status ls_poisson_kernel_halfdisk(double x, double y, double phi, double* out);
/* Probability that Brownian motion from e^{-s + i theta} leaves
   {r < |z| < 1} in H through the inner arc between angles phi0 and phi1. */
LS_API ls_status ls_annular_exit_probability(double s, double theta, double r, double phi0, double phi1, double* out);

#ifdef __cplusplus
}
#endif

#endif
