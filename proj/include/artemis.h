/* C interface to the compressed distributed SGD simulator.
 *
 * Usage: create an experiment handle from a JSON config file, a JSON string,
 * or a named preset; optionally prepare it (dataset + problem constants only)
 * or run it (simulation + CSV/metadata output); inspect the per-variant
 * series; free the handle. All functions returning artemis_status leave a
 * human-readable message in artemis_last_error() on failure.
 */
#ifndef ARTEMIS_H
#define ARTEMIS_H

#ifdef __cplusplus
extern "C" {
#endif

typedef struct artemis_experiment artemis_experiment;

typedef enum artemis_status {
  ARTEMIS_OK = 0,
  ARTEMIS_ERR_INVALID_ARGUMENT = 1,
  ARTEMIS_ERR_IO = 2,
  ARTEMIS_ERR_DIVERGED = 3,
  ARTEMIS_ERR_INTERNAL = 4
} artemis_status;

const char* artemis_version(void);
const char* artemis_status_message(artemis_status status);
/* Last failure message of the calling thread; empty string if none. */
const char* artemis_last_error(void);

artemis_status artemis_experiment_from_file(const char* path,
                                            artemis_experiment** out);
artemis_status artemis_experiment_from_json(const char* text,
                                            artemis_experiment** out);
artemis_status artemis_experiment_from_preset(const char* name,
                                              artemis_experiment** out);
void artemis_experiment_free(artemis_experiment* handle);

artemis_status artemis_experiment_set_output_dir(artemis_experiment* handle,
                                                 const char* dir);

/* Experiment name; output files are <name>.csv and <name>.meta.json. */
artemis_status artemis_experiment_name(const artemis_experiment* handle,
                                       const char** out);

/* Builds the dataset, solves the reference optimum, measures the problem
 * constants and resolves per-variant step sizes. Idempotent; implied by
 * artemis_experiment_run. */
artemis_status artemis_experiment_prepare(artemis_experiment* handle);

/* Runs all variants and writes <name>.csv plus <name>.meta.json into the
 * output directory. */
artemis_status artemis_experiment_run(artemis_experiment* handle);

/* Result inspection; valid after a successful run. */
artemis_status artemis_experiment_trace_count(const artemis_experiment* handle,
                                              int* out);
artemis_status artemis_experiment_trace_name(const artemis_experiment* handle,
                                             int trace, const char** out);
artemis_status artemis_experiment_trace_length(const artemis_experiment* handle,
                                               long long* out);

typedef enum artemis_series {
  ARTEMIS_SERIES_MEAN_LOG10_EXCESS = 0,
  ARTEMIS_SERIES_STD_LOG10_EXCESS = 1,
  ARTEMIS_SERIES_MEAN_EXCESS = 2,
  ARTEMIS_SERIES_MEAN_DIST_SQ = 3,
  ARTEMIS_SERIES_UP_BITS = 4,
  ARTEMIS_SERIES_DOWN_BITS = 5
} artemis_series;

/* Copies up to capacity points of one series into buf (bit counters are
 * converted to double); *written gets the number copied. */
artemis_status artemis_experiment_series(const artemis_experiment* handle,
                                         int trace, artemis_series series,
                                         double* buf, long long capacity,
                                         long long* written);

/* Theoretical constants for one configured variant; valid after prepare or
 * run. Fields that do not apply (memoryless alpha interval, infinite upper
 * ends) are reported as 0 or +inf respectively. */
typedef struct artemis_theory_report {
  double smoothness;
  double strong_convexity;
  double b_squared;
  double sigma_star_sq;
  double omega_up;
  double omega_down;
  double gamma;      /* resolved step size actually used */
  double gamma_max;  /* largest admissible step size */
  double alpha;
  double alpha_lo;
  double alpha_hi;
  double c_lo;
  double c_hi;
  double constant_e;
  double saturation;      /* predicted limit of E||w_k - w*||^2 */
  double gamma_averaging; /* horizon-optimal step for the averaged iterate */
  double averaged_bound;
} artemis_theory_report;

artemis_status artemis_experiment_theory(const artemis_experiment* handle,
                                         int variant,
                                         artemis_theory_report* out);

/* Named building blocks. kind 0: algorithm variants, kind 1: experiments. */
int artemis_preset_count(int kind);
const char* artemis_preset_name(int kind, int index);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* ARTEMIS_H */
