/* lossprior - exact-enumeration Bayesian variable selection for normal linear
 * regression: objective model priors (uniform, Scott-Berger, loss-based),
 * model posteriors under the robust parameter prior, a frequentist simulation
 * harness, and a subsampling robustness study.
 *
 * Plain C interface over an opaque-handle core. Every function that can fail
 * returns lp_status; on failure lp_last_error() describes the problem for the
 * calling thread. All outputs are deterministic for fixed inputs and seeds,
 * independent of the thread count.
 */
#ifndef LOSSPRIOR_H
#define LOSSPRIOR_H

#include <stdint.h>

#if defined(_WIN32)
#define LP_API __declspec(dllexport)
#else
#define LP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Nonzero values deliberately match the CLI exit-code contract. */
typedef enum lp_status {
    LP_OK = 0,
    LP_ERR_INVALID = 2, /* bad input: flags, files, preconditions */
    LP_ERR_NUMERIC = 3  /* numerical failure: singular design, quadrature */
} lp_status;

LP_API const char* lp_version(void);

/* Message of the most recent failure on the calling thread. */
LP_API const char* lp_last_error(void);

typedef enum lp_prior_kind {
    LP_PRIOR_UNIFORM = 0,
    LP_PRIOR_SCOTT_BERGER = 1,
    LP_PRIOR_LOSS = 2
} lp_prior_kind;

/* Robust-prior hyperparameters and quadrature settings.
 * rho <= 0 selects the size-dependent default rho = 1/(|model|+1);
 * threads <= 0 uses all hardware threads. */
typedef struct lp_options {
    double a;
    double b;
    double rho;
    int quad_nodes;
    int quad_refine;
    double quad_rtol;
    int threads;
} lp_options;

/* a = 1/2, b = 1, rho auto, 201 refined Gauss-Legendre nodes, rtol 1e-10. */
LP_API void lp_options_default(lp_options* opt);

/* ---------------- datasets ---------------- */

typedef struct lp_dataset lp_dataset;

/* CSV with a mandatory header row; response named by `response`.
 * log_all != 0 applies a log transform to every column. */
LP_API lp_status lp_dataset_load_csv(const char* path, const char* response,
                                     int log_all, lp_dataset** out);

/* name: "uscrime" or "hald". log_variant selects the classic log transform
 * of the US crime data (response and all covariates except the Southern
 * indicator). Files are located via $LOSSPRIOR_DATA_DIR, ./data, or the
 * build-time default, and verified against data/MANIFEST. */
LP_API lp_status lp_dataset_builtin(const char* name, int log_variant, lp_dataset** out);

LP_API void lp_dataset_free(lp_dataset* ds);
LP_API int lp_dataset_n(const lp_dataset* ds);
LP_API int lp_dataset_d(const lp_dataset* ds);
LP_API const char* lp_dataset_name(const lp_dataset* ds);
LP_API const char* lp_dataset_response_name(const lp_dataset* ds);
LP_API const char* lp_dataset_covariate_name(const lp_dataset* ds, int j);
LP_API const char* lp_dataset_covariate_label(const lp_dataset* ds, int j);
LP_API const char* lp_dataset_checksum(const lp_dataset* ds);
LP_API int lp_dataset_log_transformed(const lp_dataset* ds);

/* ---------------- model priors ---------------- */

/* Marginal prior inclusion probability: 1/2, 1/2, or 1/(e^c+1). */
LP_API lp_status lp_prior_inclusion(lp_prior_kind kind, double c, double* out);

/* Per-model log prior mass for one model of each size k = 0..d
 * (`log_mass` must hold d+1 doubles). */
LP_API lp_status lp_prior_curve(lp_prior_kind kind, double c, int d, double* log_mass);

/* Prior distribution of the model size (`pmf` must hold d+1 doubles). */
LP_API lp_status lp_size_prior(lp_prior_kind kind, double c, int d, double* pmf);

/* ---------------- posterior analysis ---------------- */

typedef struct lp_posterior lp_posterior;

/* Scores all 2^d models of the dataset: least squares per submodel, robust
 * Bayes factor by quadrature, prior, and a normalized posterior. */
LP_API lp_status lp_analyze(const lp_dataset* ds, lp_prior_kind prior, double c,
                            const lp_options* opt, lp_posterior** out);

LP_API void lp_posterior_free(lp_posterior* p);
LP_API int lp_posterior_d(const lp_posterior* p);
LP_API uint64_t lp_posterior_model_count(const lp_posterior* p);

/* Posterior inclusion probabilities (`out` holds d doubles). */
LP_API lp_status lp_posterior_inclusion(const lp_posterior* p, double* out);

/* Posterior of the model size (`pmf` holds d+1 doubles). */
LP_API lp_status lp_posterior_size_pmf(const lp_posterior* p, double* pmf);

/* Mean, SD, median and 95% credible interval (CDF quantiles at 0.025/0.975)
 * of the model size. Any output pointer may be NULL. */
LP_API lp_status lp_posterior_size_stats(const lp_posterior* p, double* mean, double* sd,
                                         int* median, int* ci_lo, int* ci_hi);

/* Highest posterior probability model: covariate bitmask and its mass. */
LP_API lp_status lp_posterior_hpm(const lp_posterior* p, uint32_t* bits, double* prob);

/* Median probability model: covariates with inclusion probability >= 1/2. */
LP_API lp_status lp_posterior_mpm(const lp_posterior* p, uint32_t* bits);

/* Model at `rank` (0-based) by decreasing posterior mass; ties prefer the
 * smaller model, then the lower enumeration index. Output pointers optional. */
LP_API lp_status lp_posterior_top_model(const lp_posterior* p, uint64_t rank,
                                        uint32_t* bits, double* post_prob,
                                        double* log_bf, double* log_prior);

/* ---------------- frequentist simulation ---------------- */

typedef struct lp_sim_result lp_sim_result;

/* One grid cell: `replicates` synthetic datasets (X standard normal, truth
 * from Bernoulli(omega) with robust-prior coefficients, unit noise) analyzed
 * under the uniform, Scott-Berger and loss(c) priors. */
LP_API lp_status lp_sim_run(int n, int d, double omega, int replicates, uint64_t seed,
                            double loss_c, const lp_options* opt, lp_sim_result** out);

LP_API void lp_sim_result_free(lp_sim_result* r);

/* prior_index: 0 uniform, 1 Scott-Berger, 2 loss. Coverage of the 95%
 * size credible interval, MSE of the posterior mean / median size, and
 * Monte Carlo standard errors. Output pointers optional. */
LP_API lp_status lp_sim_metric(const lp_sim_result* r, int prior_index,
                               double* coverage, double* mse_mean, double* mse_median,
                               double* se_coverage, double* se_mse_mean,
                               double* se_mse_median);

/* ---------------- subsampling robustness ---------------- */

typedef struct lp_rob_result lp_rob_result;

/* `replicates` subsamples of round(fraction*n) rows without replacement; each
 * is analyzed under the uniform prior, the Scott-Berger prior, and the loss
 * prior at every c in loss_c_list (NULL list => {0.5, 1.0, 1.5, 2.0}). */
LP_API lp_status lp_rob_run(const lp_dataset* ds, double fraction, int replicates,
                            uint64_t seed, const double* loss_c_list, int n_loss_c,
                            const lp_options* opt, lp_rob_result** out);

LP_API void lp_rob_result_free(lp_rob_result* r);
LP_API int lp_rob_num_priors(const lp_rob_result* r);
LP_API lp_status lp_rob_prior(const lp_rob_result* r, int prior_index,
                              lp_prior_kind* kind, double* c);
LP_API int lp_rob_replicates(const lp_rob_result* r);
LP_API int lp_rob_subsample_size(const lp_rob_result* r);
LP_API lp_status lp_rob_mean_size(const lp_rob_result* r, int prior_index, int replicate,
                                  double* out);
LP_API lp_status lp_rob_inclusion(const lp_rob_result* r, int prior_index, int replicate,
                                  double* out);

/* Histogram of the posterior mean model size, fixed bin width 0.25 on [0, d]. */
LP_API int lp_rob_hist_bins(const lp_rob_result* r);
LP_API lp_status lp_rob_hist(const lp_rob_result* r, int prior_index, int* counts);

/* Box-plot summary of covariate j's inclusion probability across replicates:
 * out = {min, q1, median, q3, max, lo_whisker, hi_whisker} (Tukey 1.5 IQR). */
LP_API lp_status lp_rob_box(const lp_rob_result* r, int prior_index, int j, double out[7]);

/* ---------------- KL verification ---------------- */

typedef struct lp_kl_report {
    int trials;
    int passed;
    int hypothesis_violations;
    int grad_checks;
    double max_min_kl;
    double max_grad_rel_err;
    double tol;
} lp_kl_report;

/* Verifies on random instances that the minimized KL divergence between any
 * two regression models vanishes, and that the analytic KL gradient matches
 * finite differences. */
LP_API lp_status lp_verify_kl(int trials, int n, int d, uint64_t seed, double tol,
                              lp_kl_report* out);

#ifdef __cplusplus
}
#endif

#endif /* LOSSPRIOR_H */
