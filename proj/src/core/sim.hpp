#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "posterior.hpp"

namespace lossprior {

// One cell of the frequentist study grid.
struct SimCase {
    int n = 30;
    int d = 5;
    double omega = 0.5;      // truth-generation inclusion probability
    int replicates = 2000;
    std::uint64_t seed = 0;

    void validate() const;
    std::uint64_t case_id() const; // derived from (n, d, omega) only
};

struct Replicate {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    Gamma true_gamma;
};

// Draws replicate `rep_index` of a case: X standard normal, gamma_j ~
// Bernoulli(omega), g from the robust prior of the true model, beta | g ~
// N(0, g (Xg' C Xg)^-1) on the centered realized design, y = Xg beta + eps
// with unit-variance noise and alpha = 0. Bit-identical for a given
// (seed, case, rep_index) regardless of evaluation order.
Replicate generate_replicate(const SimCase& c, int rep_index, const HyperSpec& hyper);

struct SizeStatsLite {
    double mean = 0;
    int median = 0;
    int lo = 0;
    int hi = 0;
};

// Size posterior summary from log scores per size (prior already folded in);
// same CDF-quantile conventions as size_posterior().
SizeStatsLite size_stats_from_log_scores(const std::vector<double>& log_score);

struct PriorMetrics {
    double coverage = 0;
    double mse_mean = 0;
    double mse_median = 0;
    double se_coverage = 0;
    double se_mse_mean = 0;
    double se_mse_median = 0;
};

// Coverage / MSE metrics from per-replicate summaries and true sizes, with
// Monte Carlo standard errors (sample sd / sqrt(replicates)).
PriorMetrics metrics_from_outcomes(const std::vector<SizeStatsLite>& stats,
                                   const std::vector<int>& true_sizes);

inline constexpr int kSimPriors = 3; // uniform, Scott-Berger, loss

struct SimResult {
    SimCase sim_case;
    double loss_c = 1.0;
    std::array<PriorMetrics, kSimPriors> metrics; // 0 uniform, 1 SB, 2 loss
};

SimResult run_case(const SimCase& c, const HyperSpec& hyper, const QuadratureConfig& q,
                   double loss_c = 1.0, int threads = 0);

std::vector<SimResult> run_grid(const std::vector<SimCase>& cases, const HyperSpec& hyper,
                                const QuadratureConfig& q, double loss_c = 1.0,
                                int threads = 0);

// The full study grid in its reporting order: n in {30,50,100} blocks, then
// d in {3,5,10,15}, then omega in {0.15,0.50,0.75} - 36 cases.
std::vector<SimCase> paper_grid(int replicates, std::uint64_t seed);

} // namespace lossprior
