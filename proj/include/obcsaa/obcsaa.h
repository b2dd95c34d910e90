#ifndef OBCSAA_H
#define OBCSAA_H

/*
 * C interface to the federated-learning-over-the-air simulator.
 *
 * Every function returns a status code; 0 means success.  On failure the
 * thread-local message from obcsaa_last_error() describes what went wrong.
 * Strings returned through char** out-parameters are heap-allocated and must
 * be released with obcsaa_string_free().
 */

#ifdef __cplusplus
extern "C" {
#endif

enum {
  OBCSAA_OK = 0,
  OBCSAA_E_ARGUMENT = 1,   /* a value is out of range or missing */
  OBCSAA_E_DIMENSION = 2,  /* shapes disagree */
  OBCSAA_E_INFEASIBLE = 3, /* no admissible schedule or power factor */
  OBCSAA_E_FORMAT = 4,     /* malformed JSON, CSV, or IDX input */
  OBCSAA_E_IO = 5,         /* file system failure */
  OBCSAA_E_NUMERIC = 6,    /* divergence or loss of precision */
  OBCSAA_E_INTERNAL = 7    /* unexpected failure inside the library */
};

/* Message for the most recent failure on the calling thread; empty after a
 * success.  The pointer stays valid until the next call on this thread. */
const char* obcsaa_last_error(void);

const char* obcsaa_version(void);

void obcsaa_string_free(char* text);

/* ------------------------------------------------------------------ */
/* Experiment lifecycle.                                               */

typedef struct obcsaa_experiment obcsaa_experiment;

/* Parse a JSON experiment config.  Unknown keys are rejected. */
int obcsaa_experiment_create(const char* config_json,
                             obcsaa_experiment** out_handle);
int obcsaa_experiment_create_from_file(const char* config_path,
                                       obcsaa_experiment** out_handle);

/* Optional overrides applied before running (for command-line use). */
int obcsaa_experiment_set_mode(obcsaa_experiment* handle, const char* mode);
int obcsaa_experiment_set_seed(obcsaa_experiment* handle,
                               unsigned long long seed);
int obcsaa_experiment_set_output_dir(obcsaa_experiment* handle,
                                     const char* output_dir);

/* The fully resolved configuration, defaults included, as JSON. */
int obcsaa_experiment_config_json(obcsaa_experiment* handle, char** out_json);

/* Runs every (seed, mode) pair; writes metrics.csv and
 * config.resolved.json into the output directory.  On failure the partial
 * CSV is retained with a trailing failure marker row. */
int obcsaa_experiment_run(obcsaa_experiment* handle);

/* CSV text of the completed run (header line included). */
int obcsaa_experiment_metrics_csv(obcsaa_experiment* handle, char** out_csv);

void obcsaa_experiment_destroy(obcsaa_experiment* handle);

/* ------------------------------------------------------------------ */
/* One-shot utilities.                                                 */

/* Reads a metrics CSV and writes loss.svg and accuracy.svg to out_dir. */
int obcsaa_plot_metrics(const char* metrics_csv_path, const char* out_dir);

/* Solves one scheduling instance described as JSON; the reply carries the
 * schedule, power factor, objective, and solver diagnostics. */
int obcsaa_solve_instance(const char* request_json, char** out_json);

/* Evaluates the per-round error decomposition for given parameters,
 * schedule, and power factor. */
int obcsaa_bound_report(const char* request_json, char** out_json);

#ifdef __cplusplus
}
#endif

#endif /* OBCSAA_H */
