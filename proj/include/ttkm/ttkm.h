/* C interface to the Bayesian tensor-train kernel machine.
 *
 * Objects are opaque handles. Every call returns a ttkm_status; on failure
 * ttkm_last_error() describes the problem for the calling thread.
 * Matrices are dense row-major doubles.
 */
#ifndef TTKM_H
#define TTKM_H

#include <stddef.h>

#if defined(TTKM_BUILDING_LIBRARY)
#define TTKM_API __attribute__((visibility("default")))
#else
#define TTKM_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ttkm_status {
    TTKM_OK = 0,
    TTKM_ERR_INVALID_ARGUMENT = 1, /* null pointer or malformed request */
    TTKM_ERR_VALIDATION = 2,       /* config or data rejected by validation */
    TTKM_ERR_SHAPE = 3,
    TTKM_ERR_BOUNDS = 4,
    TTKM_ERR_NUMERICAL = 5,        /* rank deficiency, non-PD matrix, non-finite result */
    TTKM_ERR_PARSE = 6,
    TTKM_ERR_IO = 7,
    TTKM_ERR_INTERNAL = 8
} ttkm_status;

typedef struct ttkm_dataset ttkm_dataset;
typedef struct ttkm_model ttkm_model;
typedef struct ttkm_result ttkm_result;

TTKM_API const char* ttkm_version(void);
TTKM_API const char* ttkm_last_error(void);
TTKM_API const char* ttkm_status_name(ttkm_status status);
/* Nonzero for statuses that represent bad user input rather than a failure. */
TTKM_API int ttkm_status_is_usage(ttkm_status status);

TTKM_API ttkm_status ttkm_dataset_load_csv(const char* path, const char* target, char delimiter, ttkm_dataset** out);
TTKM_API ttkm_status ttkm_dataset_from_arrays(const double* inputs, const double* targets, size_t rows, size_t cols,
                                              ttkm_dataset** out);
TTKM_API size_t ttkm_dataset_rows(const ttkm_dataset* data);
TTKM_API size_t ttkm_dataset_cols(const ttkm_dataset* data);
TTKM_API void ttkm_dataset_free(ttkm_dataset* data);

/* config_json uses the same keys as the run configuration; NULL means defaults. */
TTKM_API ttkm_status ttkm_model_train(const ttkm_dataset* data, const char* config_json, ttkm_model** out);
TTKM_API ttkm_status ttkm_model_predict(const ttkm_model* model, const double* inputs, size_t rows, size_t cols,
                                        double* mean, double* variance);
TTKM_API ttkm_status ttkm_model_save(const ttkm_model* model, const char* path);
TTKM_API ttkm_status ttkm_model_load(const char* path, ttkm_model** out);
/* Posterior summary as JSON; the string lives as long as the model. */
TTKM_API const char* ttkm_model_info(ttkm_model* model);
TTKM_API void ttkm_model_free(ttkm_model* model);

TTKM_API ttkm_status ttkm_metrics(const double* mean, const double* variance, const double* truth, size_t rows,
                                  double* nll, double* rmse);

/* Default run configuration as a JSON object; every key is a valid config field. */
TTKM_API const char* ttkm_config_defaults(void);

/* Runs a CLI command (train, cv, predict, metrics, ablate-core, ablate-shift, compare-gp, synth). */
TTKM_API ttkm_status ttkm_run_command(const char* command, const char* config_json, ttkm_result** out);
TTKM_API const char* ttkm_result_json(const ttkm_result* result);
TTKM_API void ttkm_result_free(ttkm_result* result);

#ifdef __cplusplus
}
#endif

#endif
