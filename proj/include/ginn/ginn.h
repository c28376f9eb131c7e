#ifndef GINN_GINN_H
#define GINN_GINN_H

/* C interface to the volatility forecasting core. Everything crosses this
 * boundary as opaque handles, plain arrays, or strings the library allocates;
 * no C++ types leak. Functions return a status code and leave a description
 * of the most recent failure in a thread-local buffer. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define GINN_API __declspec(dllexport)
#else
#define GINN_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ginn_status {
  GINN_OK = 0,
  GINN_ERR_ARGUMENT = 1, /* caller mistake: bad option, null pointer, misuse */
  GINN_ERR_DATA = 2,     /* malformed or inconsistent input data */
  GINN_ERR_NUMERIC = 3,  /* non-finite loss, optimizer breakdown */
  GINN_ERR_INTERNAL = 4  /* unexpected failure inside the library */
} ginn_status;

GINN_API const char* ginn_version(void);

/* Message for the most recent failure on this thread; empty string when the
 * last call succeeded. The pointer stays valid until the next library call
 * from the same thread. */
GINN_API const char* ginn_last_error(void);

/* Frees any char* the library handed out. NULL is a no-op. */
GINN_API void ginn_string_free(char* text);

/* ---- dates and numbers -------------------------------------------------- */

/* ISO yyyy-mm-dd text to an epoch day count and back. */
GINN_API ginn_status ginn_date_parse(const char* text, int32_t* day_out);
GINN_API ginn_status ginn_date_to_string(int32_t day, char** text_out);

/* Shortest decimal text that round-trips the exact double. */
GINN_API ginn_status ginn_format_double(double value, char** text_out);

/* ---- dated series ------------------------------------------------------- */

typedef struct ginn_series ginn_series;

/* Entries may arrive in any order and are sorted by day; duplicate days or
 * non-finite values are rejected. */
GINN_API ginn_status ginn_series_create(const int32_t* days, const double* values,
                                        size_t n, ginn_series** out);
GINN_API void ginn_series_free(ginn_series* series);
GINN_API size_t ginn_series_size(const ginn_series* series);
GINN_API ginn_status ginn_series_get(const ginn_series* series, size_t index,
                                     int32_t* day_out, double* value_out);

/* Two-column CSV: "date,<value_header>", ISO dates, round-trip doubles. */
GINN_API ginn_status ginn_series_save_csv(const ginn_series* series,
                                          const char* path,
                                          const char* value_header);
GINN_API ginn_status ginn_series_load_csv(const char* path, ginn_series** out);

/* ---- data pipeline ------------------------------------------------------ */

/* Reads a "date,close" price CSV (date_format: "iso", "us", or "eu"),
 * computes daily log returns and the rolling autoregression-demeaned squared
 * returns that stand in for true variance. The variance series starts
 * mean_window entries into the returns. */
GINN_API ginn_status ginn_ingest_csv(const char* path, const char* date_format,
                                     size_t mean_window, ginn_series** returns_out,
                                     ginn_series** true_variance_out);

/* Seeded GARCH(1,1) process: returns and the exact conditional variance that
 * generated them. Days are numbered 0,1,2,... after burn_in warmup steps. */
GINN_API ginn_status ginn_simulate(double alpha0, double alpha, double beta,
                                   size_t length, size_t burn_in, uint64_t seed,
                                   ginn_series** returns_out,
                                   ginn_series** true_variance_out);

/* Rolling one-step-ahead classical forecasts over a return series.
 * variant: "garch", "gjr", or "tgarch". fit_json_out (optional, may be NULL)
 * receives a JSON report of the last fit plus rolling diagnostics. */
GINN_API ginn_status ginn_garch_roll(const ginn_series* returns, const char* variant,
                                     size_t window, int refit_every,
                                     ginn_series** forecasts_out, char** fit_json_out);

/* ---- training and prediction -------------------------------------------- */

/* config_json schema (all fields optional, defaults in parentheses):
 * {
 *   "network":  { "num_lstm_layers" (3), "hidden_width" (256),
 *                 "dropout_rate" (0.2), "input_window" (90) },
 *   "training": { "lambda" (0.01), "epochs" (300), "batch_size" (64),
 *                 "learning_rate" (1e-3), "beta1" (0.9), "beta2" (0.999),
 *                 "weight_decay" (1e-2), "epsilon" (1e-8), "seed" (1) }
 * }
 * Unknown keys are rejected. */

typedef struct ginn_model ginn_model;

/* Trains one hybrid forecaster. garch supplies the regularization targets
 * and may be NULL only when lambda is 1. When has_split is nonzero, only
 * targets dated strictly before split_day are trained on and the target
 * normalization is fitted on that range alone. Outputs: a self-describing
 * checkpoint JSON and an "epoch,loss" CSV with one row per epoch. */
GINN_API ginn_status ginn_train(const ginn_series* truth, const ginn_series* garch,
                                const char* config_json, int32_t split_day,
                                int has_split, char** checkpoint_json_out,
                                char** loss_csv_out);

GINN_API ginn_status ginn_model_from_json(const char* checkpoint_json,
                                          ginn_model** out);
GINN_API void ginn_model_free(ginn_model* model);
GINN_API ginn_status ginn_model_to_json(const ginn_model* model, char** json_out);
GINN_API ginn_status ginn_model_input_window(const ginn_model* model,
                                             size_t* window_out);

/* One variance forecast per history date from input_window on, each computed
 * from the preceding input_window values only. */
GINN_API ginn_status ginn_model_predict(const ginn_model* model,
                                        const ginn_series* history,
                                        ginn_series** predictions_out);

/* ---- evaluation --------------------------------------------------------- */

/* Scores pred against truth on their common dates, restricted to days at or
 * after from_day when has_from is nonzero. Returns a JSON report with model
 * name, r2, mse, mae, and the number of scored days. */
GINN_API ginn_status ginn_evaluate(const char* model_name, const ginn_series* truth,
                                   const ginn_series* pred, int32_t from_day,
                                   int has_from, char** report_json_out);

/* One-sided amplitude spectrum of (pred - truth) on the same range, as a
 * "frequency,amplitude" CSV. Needs at least 8 overlapping days. */
GINN_API ginn_status ginn_spectrum_csv(const ginn_series* truth,
                                       const ginn_series* pred, int32_t from_day,
                                       int has_from, char** csv_out);

/* ---- studies ------------------------------------------------------------ */

/* Trains one model per (lambda, seed) pair on the span before split_day and
 * scores the rest. Pass lambdas = NULL to use the built-in study grid
 * (0.01 steps on [0, 0.2], 0.05 steps up to 1). csv_out columns:
 * lambda,seed,r2,mse,mae. best_lambda_out (optional) receives the weight
 * with the best seed-averaged r2. */
GINN_API ginn_status ginn_lambda_sweep(const ginn_series* truth,
                                       const ginn_series* garch, int32_t split_day,
                                       const char* config_json,
                                       const double* lambdas, size_t n_lambdas,
                                       const uint64_t* seeds, size_t n_seeds,
                                       char** csv_out, double* best_lambda_out);

/* Simulates every (alpha, beta) grid cell, scores rolling classical
 * forecasts and per-seed hybrid models against the simulator truth on the
 * last 30%, and reports rows grouped by persistence pi = alpha + beta with
 * the 0.9 regime boundary marked. csv_out columns:
 * pi,regime,model,seed,r2,mse,mae. */
GINN_API ginn_status ginn_persistence(const double* alphas, size_t n_alphas,
                                      const double* betas, size_t n_betas,
                                      double alpha0, size_t length, size_t burn_in,
                                      uint64_t seed_base, const uint64_t* seeds,
                                      size_t n_seeds, const char* config_json,
                                      char** csv_out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* GINN_GINN_H */
