#ifndef CSHOCK_H
#define CSHOCK_H

/* C interface to the common-shock intraday price library.
 *
 * Every function returning cshock_status leaves a message for
 * cshock_last_error() on failure (per thread). Handles are opaque and owned by
 * the caller; release them with the matching *_free function. Passing NULL to
 * a *_free function is a no-op.
 *
 * Units: session hours (t = 0 at 15:00 the day before delivery), EUR/MWh,
 * EUR, MWh. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define CSHOCK_API __declspec(dllexport)
#else
#define CSHOCK_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cshock_status {
    CSHOCK_OK = 0,
    CSHOCK_ERR_INVALID_INPUT = 1,
    CSHOCK_ERR_NUMERICAL = 2,
    CSHOCK_ERR_IO = 3,
    CSHOCK_ERR_INTERNAL = 4
} cshock_status;

typedef enum cshock_generator {
    CSHOCK_GEN_THINNING = 0,
    CSHOCK_GEN_DECOMPOSITION = 1,
    CSHOCK_GEN_DIFFUSION = 2
} cshock_generator;

typedef enum cshock_path_format { CSHOCK_FORMAT_CSV = 0, CSHOCK_FORMAT_BINARY = 1 } cshock_path_format;

typedef enum cshock_feature_timing { CSHOCK_FEATURES_AT_DECISION = 0, CSHOCK_FEATURES_AT_NEXT_DECISION = 1 } cshock_feature_timing;

typedef enum cshock_report_format { CSHOCK_REPORT_CSV = 0, CSHOCK_REPORT_JSON = 1 } cshock_report_format;

typedef struct cshock_params cshock_params;
typedef struct cshock_ticks cshock_ticks;
typedef struct cshock_spot cshock_spot;
typedef struct cshock_fit cshock_fit;
typedef struct cshock_rolling cshock_rolling;
typedef struct cshock_policy cshock_policy;
typedef struct cshock_report cshock_report;

typedef struct cshock_battery {
    double capacity_mwh;
    double power_mw;
    double efficiency;
} cshock_battery;

CSHOCK_API const char* cshock_version(void);
CSHOCK_API const char* cshock_last_error(void);
CSHOCK_API const char* cshock_status_name(cshock_status status);

/* 0 restores the hardware default. Results do not depend on the count. */
CSHOCK_API void cshock_set_threads(size_t n);
CSHOCK_API size_t cshock_threads(void);

CSHOCK_API cshock_status cshock_parse_generator(const char* name, cshock_generator* out);

/* Strings are copied into buf (NUL-terminated, truncated to cap) and the full
 * length excluding the NUL is stored in *len when len is not NULL. */

/* ---- model parameters ---- */
CSHOCK_API cshock_status cshock_params_load(const char* path, cshock_params** out);
CSHOCK_API cshock_status cshock_params_from_json(const char* json, cshock_params** out);
CSHOCK_API cshock_status cshock_params_save(const cshock_params* params, const char* path);
CSHOCK_API cshock_status cshock_params_to_json(const cshock_params* params, char* buf, size_t cap, size_t* len);
CSHOCK_API void cshock_params_free(cshock_params* params);
CSHOCK_API size_t cshock_params_products(const cshock_params* params);
CSHOCK_API uint64_t cshock_params_hash(const cshock_params* params);
/* Trading cutoff of product m (0-based). */
CSHOCK_API double cshock_params_cutoff(const cshock_params* params, size_t m);
CSHOCK_API cshock_status cshock_expected_covariation(const cshock_params* params, size_t k, size_t l, double t_start,
                                                     double t_end, double* out);
CSHOCK_API cshock_status cshock_model_correlation(const cshock_params* params, size_t k, size_t l, double* out);

/* ---- simulation ---- */
/* Writes n_paths paths sampled on times[0..n_times) to path. n_paths = 0
 * writes an empty file. */
CSHOCK_API cshock_status cshock_simulate_to_file(const cshock_params* params, const double* f0, size_t n_f0,
                                                 const double* times, size_t n_times, size_t n_paths, uint64_t seed,
                                                 cshock_generator generator, cshock_path_format format,
                                                 const char* path);
/* prices receives n_paths * M * n_times values, path-major then product-major. */
CSHOCK_API cshock_status cshock_simulate_grid(const cshock_params* params, const double* f0, size_t n_f0,
                                              const double* times, size_t n_times, size_t n_paths, uint64_t seed,
                                              cshock_generator generator, double* prices);
/* Synthetic tick file (one session per day from first_date) and matching
 * spot file holding f0 for every day. spot_path may be NULL. */
CSHOCK_API cshock_status cshock_synthesize_ticks_to_file(const cshock_params* params, const double* f0, size_t n_f0,
                                                         size_t sessions, const char* first_date, uint64_t seed,
                                                         const char* ticks_path, const char* spot_path);

/* ---- tick data ---- */
/* products = 0 selects the standard 24-hour grid. */
CSHOCK_API cshock_status cshock_ticks_load(const char* path, size_t products, cshock_ticks** out);
CSHOCK_API void cshock_ticks_free(cshock_ticks* ticks);
CSHOCK_API size_t cshock_ticks_sessions(const cshock_ticks* ticks);
CSHOCK_API size_t cshock_ticks_products(const cshock_ticks* ticks);

CSHOCK_API cshock_status cshock_spot_load(const char* path, size_t products, cshock_spot** out);
CSHOCK_API void cshock_spot_free(cshock_spot* spot);
CSHOCK_API size_t cshock_spot_days(const cshock_spot* spot);

/* ---- estimation ---- */
/* Window bounds per product; both arrays NULL selects [0, cutoff]. */
typedef struct cshock_windows {
    const double* begin;
    const double* end;
    size_t n;
    double delta;
    double min_overlap;
} cshock_windows;

CSHOCK_API cshock_status cshock_estimate(const cshock_ticks* ticks, const cshock_windows* windows, int clean_first,
                                         cshock_fit** out);
CSHOCK_API void cshock_fit_free(cshock_fit* fit);
CSHOCK_API cshock_status cshock_fit_params(const cshock_fit* fit, cshock_params** out);
CSHOCK_API cshock_status cshock_fit_write_json(const cshock_fit* fit, const char* path);
CSHOCK_API cshock_status cshock_fit_write_cleaning_csv(const cshock_fit* fit, const char* path);
CSHOCK_API size_t cshock_fit_warning_count(const cshock_fit* fit);
CSHOCK_API const char* cshock_fit_warning(const cshock_fit* fit, size_t i);

/* Signature plot of every product: product,delta_h,rv_per_hour. */
CSHOCK_API cshock_status cshock_write_signature_csv(const cshock_ticks* ticks, const double* deltas, size_t n_deltas,
                                                    const char* path);
/* Epps curves for consecutive-product pairs at the given maturity gaps (in
 * products): gap,product_l,product_m,delta_h,correlation. */
CSHOCK_API cshock_status cshock_write_epps_csv(const cshock_ticks* ticks, const cshock_windows* windows,
                                               const double* deltas, size_t n_deltas, const size_t* gaps,
                                               size_t n_gaps, const char* path);

CSHOCK_API cshock_status cshock_rolling_estimate(const cshock_ticks* ticks, const cshock_windows* windows,
                                                 int lookback_days, cshock_rolling** out);
CSHOCK_API cshock_status cshock_rolling_load_json(const char* path, cshock_rolling** out);
CSHOCK_API void cshock_rolling_free(cshock_rolling* rolling);
CSHOCK_API size_t cshock_rolling_rows(const cshock_rolling* rolling);
CSHOCK_API cshock_status cshock_rolling_write_csv(const cshock_rolling* rolling, const char* path);
CSHOCK_API cshock_status cshock_rolling_write_json(const cshock_rolling* rolling, const char* path);
CSHOCK_API size_t cshock_rolling_warning_count(const cshock_rolling* rolling);
CSHOCK_API const char* cshock_rolling_warning(const cshock_rolling* rolling, size_t i);

/* ---- battery valuation ---- */
/* Reads {capacity_mwh, power_mw, efficiency, p, n_paths, seed}. */
CSHOCK_API cshock_status cshock_value_config_load(const char* path, cshock_battery* battery, size_t* p,
                                                  size_t* n_paths, uint64_t* seed);
CSHOCK_API cshock_status cshock_battery_validate(const cshock_battery* battery);
CSHOCK_API cshock_status cshock_spot_strategy(const double* prices, size_t n, const cshock_battery* battery,
                                              int* controls, double* value);
CSHOCK_API cshock_status cshock_optimize(const cshock_params* params, const double* f0, size_t n_f0,
                                         const cshock_battery* battery, size_t p, cshock_generator generator,
                                         size_t n_paths, uint64_t seed, cshock_feature_timing timing,
                                         cshock_policy** out);
CSHOCK_API cshock_status cshock_policy_load(const char* path, cshock_policy** out);
CSHOCK_API cshock_status cshock_policy_save(const cshock_policy* policy, const char* path);
CSHOCK_API void cshock_policy_free(cshock_policy* policy);
CSHOCK_API double cshock_policy_value(const cshock_policy* policy);
/* Standard error of the optimisation value; NaN for a loaded policy. */
CSHOCK_API double cshock_policy_std_error(const cshock_policy* policy);
CSHOCK_API size_t cshock_policy_p(const cshock_policy* policy);
CSHOCK_API size_t cshock_policy_products(const cshock_policy* policy);
CSHOCK_API cshock_generator cshock_policy_generator(const cshock_policy* policy);
CSHOCK_API uint64_t cshock_policy_params_hash(const cshock_policy* policy);
CSHOCK_API size_t cshock_policy_warning_count(const cshock_policy* policy);
CSHOCK_API const char* cshock_policy_warning(const cshock_policy* policy, size_t i);
/* observed[t * M + j]: price of product j at decision time t. controls may be NULL. */
CSHOCK_API cshock_status cshock_policy_backtest(const cshock_policy* policy, const double* observed, size_t n_products,
                                                int* controls, double* gain);

/* ---- campaigns and reports ---- */
CSHOCK_API cshock_status cshock_backtest_policy(const cshock_policy* policy, const cshock_ticks* ticks,
                                                const cshock_spot* spot, int with_spot, cshock_report** out);
CSHOCK_API cshock_status cshock_backtest_campaign(const cshock_ticks* ticks, const cshock_rolling* rolling,
                                                  const cshock_spot* spot, const cshock_battery* battery,
                                                  const size_t* p_list, size_t n_p, const cshock_generator* generators,
                                                  size_t n_generators, size_t n_paths, uint64_t seed,
                                                  cshock_feature_timing timing, int with_spot, cshock_report** out);
/* Empty report, for merging daily-gain files. */
CSHOCK_API cshock_report* cshock_report_new(void);
CSHOCK_API cshock_status cshock_report_add_daily_csv(cshock_report* report, const char* path);
CSHOCK_API void cshock_report_free(cshock_report* report);
CSHOCK_API size_t cshock_report_days(const cshock_report* report);
CSHOCK_API cshock_status cshock_report_write_daily_csv(const cshock_report* report, const char* path);
/* Annual (year, p, spot, poisson, diffusion) table; fails on duplicate days. */
CSHOCK_API cshock_status cshock_report_write_annual(const cshock_report* report, cshock_report_format format,
                                                    const char* path);
CSHOCK_API size_t cshock_report_warning_count(const cshock_report* report);
CSHOCK_API const char* cshock_report_warning(const cshock_report* report, size_t i);
/* Mean optimisation value of the policies trained for (strategy, p). */
CSHOCK_API cshock_status cshock_report_optimisation_value(const cshock_report* report, const char* strategy, size_t p,
                                                          double* out);

#ifdef __cplusplus
}
#endif

#endif
