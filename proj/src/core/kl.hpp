#pragma once

#include <cstdint>
#include <functional>

#include <Eigen/Dense>

namespace lossprior {

// A fully specified normal linear regression: y ~ N(Xt * beta, I/phi) with Xt
// the intercept-augmented design [1, X_gamma] and beta = (alpha, beta_gamma).
struct RegressionSpec {
    Eigen::MatrixXd Xt;
    Eigen::VectorXd beta;
    double phi = 1.0;

    void validate() const;
    Eigen::VectorXd mean() const { return Xt * beta; }
};

// KL divergence between two such models with common phi and equal n:
// (phi/2) * || Xt_p beta_p - Xt_q beta_q ||^2.
double kl_divergence(const RegressionSpec& p, const RegressionSpec& q);

// Coefficients of the second design minimizing the divergence from p:
// (Xq' Xq)^-1 Xq' Xt_p beta_p. Throws on singular Xq' Xq.
Eigen::VectorXd kl_minimizer(const RegressionSpec& p, const Eigen::MatrixXd& Xq);

// Divergence at the minimizer; zero (to rounding) for any full-rank Xq.
double min_kl(const RegressionSpec& p, const Eigen::MatrixXd& Xq);

// Analytic gradient of kl_divergence(p, {Xq, beta_q, p.phi}) in beta_q.
Eigen::VectorXd kl_gradient(const RegressionSpec& p, const Eigen::MatrixXd& Xq,
                            const Eigen::VectorXd& beta_q);

struct KlVerifyReport {
    int trials = 0;
    int passed = 0;                 // min_kl below tol
    int hypothesis_violations = 0;  // singular designs (excluded, not failures)
    double max_min_kl = 0;
    int grad_checks = 0;
    double max_grad_rel_err = 0;
    double tol = 0;

    bool all_passed() const { return passed + hypothesis_violations == trials; }
};

// Random-instance verification of the vanishing information loss: each trial
// draws (X, gamma, beta) and a strict superset gamma', the candidate at which
// the minimum over the rest of the model space is attained, and checks that
// the minimized divergence is numerically zero there. The first 50 trials
// also compare the analytic gradient against central differences. `mutate` is
// a test hook that may deform a trial's second design (e.g. to force rank
// deficiency); such trials count as hypothesis violations, not failures.
KlVerifyReport verify_min_kl(
    int trials, int n, int d, std::uint64_t seed, double tol = 1e-8,
    const std::function<void(int, Eigen::MatrixXd&)>& mutate = nullptr);

} // namespace lossprior
