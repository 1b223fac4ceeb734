#pragma once

#include <cstdint>
#include <vector>

#include "posterior.hpp"

namespace lossprior {

struct RobustnessConfig {
    double subsample_fraction = 0.85;
    int replicates = 500;
    std::vector<PriorSpec> priors; // empty => uniform, SB, loss at c in {0.5,1,1.5,2}
    std::uint64_t seed = 0;

    std::vector<PriorSpec> resolved_priors() const;
    int subsample_size(int n) const; // round(fraction * n)
    void validate(int n, int d) const;
};

// One subsample analysis under one prior.
struct RobustnessRecord {
    int replicate = 0;
    PriorSpec prior;
    double mean_size = 0;
    std::vector<double> inclusion;
};

// Each replicate draws rows without replacement (re-drawn on a rank-deficient
// subsample, at most 10 times), scores the model space once, and applies every
// prior. Records are ordered replicate-major then prior. Deterministic for a
// given seed.
std::vector<RobustnessRecord> run_robustness(const Eigen::MatrixXd& X,
                                             const Eigen::VectorXd& y,
                                             const RobustnessConfig& cfg,
                                             const HyperSpec& hyper,
                                             const QuadratureConfig& q, int threads = 0);

struct BoxStats {
    double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
    double lo_whisker = 0, hi_whisker = 0; // Tukey 1.5 IQR
};

struct RobustnessSummary {
    double bin_width = 0.25;
    std::vector<double> bin_edges;               // over [0, d]
    std::vector<std::vector<int>> hist;          // [prior][bin], mean model size
    std::vector<std::vector<BoxStats>> box;      // [prior][covariate], inclusion prob
    std::vector<PriorSpec> priors;
};

RobustnessSummary summarize_robustness(const std::vector<RobustnessRecord>& records,
                                       int d, const std::vector<PriorSpec>& priors);

} // namespace lossprior
