/* C API for the MESS longitudinal differential-expression library.
 *
 * All functions return a mess_status; on failure mess_last_error() holds a
 * human-readable message for the calling thread. Configuration lives behind
 * an opaque handle mutated by key/value setters; unknown keys are an error.
 */
#ifndef MESS_C_H
#define MESS_C_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mess_status {
    MESS_OK = 0,
    MESS_ERR_USAGE = 1,   /* bad arguments or configuration */
    MESS_ERR_DATA = 2,    /* unreadable or malformed input data */
    MESS_ERR_NUMERIC = 3  /* internal numeric failure */
} mess_status;

typedef struct mess_config mess_config;

const char* mess_version(void);

/* message for the last failing call on this thread; never NULL */
const char* mess_last_error(void);

mess_config* mess_config_create(void);
void mess_config_destroy(mess_config* config);

/* integer keys: seed, bootstrap, threads, genes, group1_size, group2_size,
 * curve_samples, edge_basis_dim, max_em_iterations, max_evaluations */
mess_status mess_config_set_int(mess_config* config, const char* key, int64_t value);
/* real keys: fdr, effect_scale, de_probability, dropout_probability,
 * em_rel_tol, log10_lo, log10_hi, simplex_spread_tol */
mess_status mess_config_set_double(mess_config* config, const char* key, double value);
/* comma-separated design times, e.g. "0,2,6,12,24" */
mess_status mess_config_set_times(mess_config* config, const char* times_csv);
/* merge keys from a JSON config file */
mess_status mess_config_load_file(mess_config* config, const char* path);

/* write a simulated dataset and its truth labels */
mess_status mess_simulate(const mess_config* config, const char* data_csv,
                          const char* truth_csv);

/* fit every gene; emit sampled mean/individual curves and a diagnostics file */
mess_status mess_fit(const mess_config* config, const char* input_csv,
                     const char* curves_csv, const char* diagnostics_csv);

/* full test pipeline: statistic, bootstrap p, BH q, ranks */
mess_status mess_test(const mess_config* config, const char* input_csv,
                      const char* results_csv, const char* diagnostics_csv);

/* simulation benchmark: MESS vs EDGE ROC/AUC/power report */
mess_status mess_benchmark(const mess_config* config, const char* report_csv,
                           const char* roc_csv);

#ifdef __cplusplus
}
#endif

#endif /* MESS_C_H */
