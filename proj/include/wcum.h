/*
 * C API for the worst-case utility maximization library.
 *
 * All objects are opaque handles created and destroyed through this API.
 * Every fallible call returns a wcum_status; on failure, wcum_last_error()
 * returns a thread-local description of what went wrong.
 *
 * Complex data crosses the boundary as interleaved doubles (re0, im0, re1,
 * im1, ...). Matrices are column-major. A covariance block for one user is
 * 2 * n_tx * n_tx doubles; an all-user covariance buffer is n_users such
 * blocks back to back.
 *
 * Strings returned through char** out-parameters are heap-allocated; release
 * them with wcum_string_free.
 */

#ifndef WCUM_H
#define WCUM_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef struct wcum_config wcum_config;
typedef struct wcum_channels wcum_channels;
typedef struct wcum_result wcum_result;

typedef enum wcum_status {
    WCUM_OK = 0,
    WCUM_ERR_INVALID_ARGUMENT = 1,
    WCUM_ERR_DOMAIN = 2,
    WCUM_ERR_SOLVER = 3,
    WCUM_ERR_BRACKET = 4,
    WCUM_ERR_TOO_LARGE = 5,
    WCUM_ERR_INTERNAL = 6
} wcum_status;

typedef enum wcum_utility_kind {
    WCUM_UTILITY_SUM_RATE = 0,
    WCUM_UTILITY_WEIGHTED_SUM_RATE = 1,
    WCUM_UTILITY_PROPORTIONAL_FAIR = 2
} wcum_utility_kind;

const char* wcum_version(void);
const char* wcum_last_error(void);
void wcum_string_free(char* s);

/* Deterministic stream splitting for derived seeds (trials, users, chunks). */
uint64_t wcum_derive_seed(uint64_t seed, uint64_t stream);

/* ---- system configuration ---------------------------------------------- */

/* noise_powers: n_users entries (linear scale). weights: n_users entries,
 * required for WCUM_UTILITY_WEIGHTED_SUM_RATE, ignored (may be NULL)
 * otherwise. */
wcum_status wcum_config_create(int n_tx, int n_users, double power_budget,
                               const double* noise_powers, wcum_utility_kind utility,
                               const double* weights, wcum_config** out);
void wcum_config_free(wcum_config* config);
int wcum_config_n_tx(const wcum_config* config);
int wcum_config_n_users(const wcum_config* config);

/* ---- channels ----------------------------------------------------------- */

/* estimates: n_users blocks of 2*n_tx interleaved doubles. radii: n_users. */
wcum_status wcum_channels_create(const wcum_config* config, const double* estimates,
                                 const double* radii, wcum_channels** out);
/* i.i.d. standard complex Gaussian estimates, all radii set to `radius`. */
wcum_status wcum_channels_sample(const wcum_config* config, uint64_t seed, double radius,
                                 wcum_channels** out);
wcum_status wcum_channels_set_radii(wcum_channels* channels, const double* radii);
wcum_status wcum_channels_get_estimate(const wcum_channels* channels, int user,
                                       double* estimate_out);
wcum_status wcum_channels_get_radii(const wcum_channels* channels, double* radii_out);
void wcum_channels_free(wcum_channels* channels);

/* ---- the robust design loop -------------------------------------------- */

wcum_status wcum_solve(const wcum_config* config, const wcum_channels* channels,
                       double epsilon, int max_iters, wcum_result** out);
/* Perfect-CSI baseline: the same loop with all radii forced to zero. */
wcum_status wcum_solve_naive(const wcum_config* config, const wcum_channels* channels,
                             double epsilon, int max_iters, wcum_result** out);

int wcum_result_converged(const wcum_result* result);
int wcum_result_iterations(const wcum_result* result);
const char* wcum_result_stop_reason(const wcum_result* result);
double wcum_result_utility(const wcum_result* result);
double wcum_result_psi(const wcum_result* result);
wcum_status wcum_result_targets(const wcum_result* result, double* t_out);
wcum_status wcum_result_multipliers(const wcum_result* result, double* lambda_out);
wcum_status wcum_result_slacks(const wcum_result* result, double* z_out);
/* One user's covariance: 2*n_tx*n_tx interleaved doubles, column-major. */
wcum_status wcum_result_covariance(const wcum_result* result, int user, double* q_out);
/* Full iteration trace as line-delimited JSON records
 * {"m":..,"t":[..],"lambda":[..],"z":[..],"psi":..,"utility":..}. */
wcum_status wcum_result_trace_jsonl(const wcum_result* result, char** out);
void wcum_result_free(wcum_result* result);

/* ---- certification and evaluation --------------------------------------- */

/* Certify a design point (covariances, targets, multipliers, slacks) against
 * the channels it was designed for. `passed` is 1/0; the JSON report carries
 * the individual checks and margins. */
wcum_status wcum_certify(const wcum_config* config, const wcum_channels* channels,
                         const double* covariances, const double* t, const double* lambdas,
                         const double* slacks, int* passed, char** report_json);

/* Worst-case report for a design: exact per-user worst SINR/rate plus the
 * Monte Carlo estimate at mc_samples boundary draws. */
wcum_status wcum_evaluate(const wcum_config* config, const wcum_channels* channels,
                          const double* covariances, int mc_samples, uint64_t seed,
                          char** report_json);

wcum_status wcum_rate(const wcum_config* config, const double* covariances,
                      const double* channel, int user, double* rate_out);
wcum_status wcum_exact_worst_sinr(const wcum_config* config, const wcum_channels* channels,
                                  const double* covariances, int user, double* sinr_out);
wcum_status wcum_mc_worst_rate(const wcum_config* config, const wcum_channels* channels,
                               const double* covariances, int user, int n_samples,
                               uint64_t seed, double* rate_out);

/* Exhaustive rank-one grid search (n_tx <= 2, n_users <= 2 only).
 * covariances_out: n_users blocks of 2*n_tx*n_tx doubles. */
wcum_status wcum_oracle_grid(const wcum_config* config, const wcum_channels* channels,
                             int grid_resolution, double* covariances_out,
                             double* utility_out);

#ifdef __cplusplus
}
#endif

#endif /* WCUM_H */
