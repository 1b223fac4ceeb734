#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "model_space.hpp"
#include "priors.hpp"
#include "robust_bf.hpp"

namespace lossprior {

// Prior-independent scores of the whole model space for one (X, y): per-model
// size and log Bayes factor against the null model, in enumeration order
// (index == Gamma bits). Several model priors can be applied to one ModelScores.
struct ModelScores {
    int n = 0;
    int d = 0;
    std::vector<std::uint8_t> size;  // |gamma| per model
    std::vector<double> log_bf;

    std::uint64_t model_count() const { return log_bf.size(); }
};

ModelScores compute_scores(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                           const HyperSpec& hyper, const QuadratureConfig& q,
                           int threads = 0);

// Normalized posterior over all 2^d models, enumeration order. The model at
// index i is Gamma{i, d}.
struct ModelPosterior {
    int d = 0;
    std::vector<std::uint8_t> size;
    std::vector<double> log_bf;
    std::vector<double> log_prior;
    std::vector<double> log_post;

    std::uint64_t model_count() const { return log_post.size(); }
    Gamma model(std::uint64_t index) const { return Gamma{static_cast<std::uint32_t>(index), d}; }
};

ModelPosterior apply_prior(const ModelScores& scores, const PriorSpec& prior);

ModelPosterior compute_posterior(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                 const PriorSpec& prior, const HyperSpec& hyper,
                                 const QuadratureConfig& q, int threads = 0);

// Posterior inclusion probability of each covariate.
std::vector<double> inclusion_probabilities(const ModelPosterior& mp);

struct SizePosterior {
    std::vector<double> pmf; // size d+1
    double mean = 0;
    double sd = 0;
    int median = 0;
    int ci_lo = 0;
    int ci_hi = 0; // 95% credible interval by CDF quantiles (0.025 / 0.975)
};

SizePosterior size_posterior(const ModelPosterior& mp);

// Highest posterior probability model; ties broken by smaller size, then
// lower enumeration index.
std::pair<Gamma, double> hpm(const ModelPosterior& mp);

// Median probability model: covariates with inclusion probability >= 1/2
// (the boundary counts as included).
Gamma mpm(const ModelPosterior& mp, const std::vector<double>& inclusion);

struct PosteriorSummary {
    std::vector<double> inclusion;
    Gamma hpm_model;
    double hpm_prob = 0;
    Gamma mpm_model;
    SizePosterior size;
};

PosteriorSummary summarize(const ModelPosterior& mp);

// Model indices ordered by decreasing posterior mass (HPM tie-breaking).
std::vector<std::uint64_t> rank_models(const ModelPosterior& mp, std::uint64_t top_k);

} // namespace lossprior
