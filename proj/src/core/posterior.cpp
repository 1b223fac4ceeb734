#include "posterior.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "errors.hpp"
#include "parallel.hpp"

namespace lossprior {

ModelScores compute_scores(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                           const HyperSpec& hyper, const QuadratureConfig& q,
                           int threads) {
    const int n = static_cast<int>(X.rows());
    const int d = static_cast<int>(X.cols());
    if (d > kMaxCovariates)
        throw ValidationError("compute_scores: d = " + std::to_string(d) +
                              " exceeds the exact-enumeration cap of " +
                              std::to_string(kMaxCovariates));
    if (n <= d + 1)
        throw ValidationError("compute_scores: need n > d + 1 (n = " + std::to_string(n) +
                              ", d = " + std::to_string(d) + ")");

    const SubmodelScorer scorer(X, y);
    const BfEvaluator bf(n, d, hyper, q);

    ModelScores s;
    s.n = n;
    s.d = d;
    const std::uint64_t count = std::uint64_t{1} << d;
    s.size.resize(count);
    s.log_bf.resize(count);

    const int nthreads = resolve_threads(threads);
    std::vector<SubmodelScorer::Workspace> sws(nthreads);
    std::vector<BfEvaluator::Workspace> bws(nthreads);

    parallel_for(static_cast<std::int64_t>(count), nthreads,
                 [&](std::int64_t i, int wid) {
                     const Gamma g{static_cast<std::uint32_t>(i), d};
                     const SufficientStats st = scorer.stats(g, sws[wid]);
                     s.size[i] = static_cast<std::uint8_t>(st.k);
                     s.log_bf[i] = bf.log_bf(st, bws[wid]);
                 });
    return s;
}

ModelPosterior apply_prior(const ModelScores& scores, const PriorSpec& prior) {
    prior.validate();
    ModelPosterior mp;
    mp.d = scores.d;
    mp.size = scores.size;
    mp.log_bf = scores.log_bf;
    const std::uint64_t count = scores.model_count();
    mp.log_prior.resize(count);
    mp.log_post.resize(count);

    // prior mass depends only on the model size
    std::vector<double> by_size(scores.d + 1);
    for (int k = 0; k <= scores.d; ++k)
        by_size[k] = log_prior(prior, Gamma{static_cast<std::uint32_t>((std::uint64_t{1} << k) - 1),
                                            scores.d});

    double mx = -std::numeric_limits<double>::infinity();
    for (std::uint64_t i = 0; i < count; ++i) {
        mp.log_prior[i] = by_size[mp.size[i]];
        mp.log_post[i] = mp.log_bf[i] + mp.log_prior[i];
        mx = std::max(mx, mp.log_post[i]);
    }
    // single fixed-order log-sum-exp pass: bit-reproducible regardless of how
    // the scores were computed
    double sum = 0;
    for (std::uint64_t i = 0; i < count; ++i) sum += std::exp(mp.log_post[i] - mx);
    const double lse = mx + std::log(sum);
    for (std::uint64_t i = 0; i < count; ++i) mp.log_post[i] -= lse;
    return mp;
}

ModelPosterior compute_posterior(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                 const PriorSpec& prior, const HyperSpec& hyper,
                                 const QuadratureConfig& q, int threads) {
    return apply_prior(compute_scores(X, y, hyper, q, threads), prior);
}

std::vector<double> inclusion_probabilities(const ModelPosterior& mp) {
    std::vector<double> incl(mp.d, 0.0);
    const std::uint64_t count = mp.model_count();
    for (std::uint64_t i = 0; i < count; ++i) {
        const double p = std::exp(mp.log_post[i]);
        std::uint64_t bits = i;
        while (bits) {
            const int j = std::countr_zero(bits);
            incl[j] += p;
            bits &= bits - 1;
        }
    }
    for (double& v : incl) v = std::min(v, 1.0);
    return incl;
}

SizePosterior size_posterior(const ModelPosterior& mp) {
    SizePosterior sp;
    sp.pmf.assign(mp.d + 1, 0.0);
    const std::uint64_t count = mp.model_count();
    for (std::uint64_t i = 0; i < count; ++i)
        sp.pmf[mp.size[i]] += std::exp(mp.log_post[i]);

    double mean = 0, m2 = 0;
    for (int k = 0; k <= mp.d; ++k) {
        mean += k * sp.pmf[k];
        m2 += static_cast<double>(k) * k * sp.pmf[k];
    }
    sp.mean = mean;
    sp.sd = std::sqrt(std::max(m2 - mean * mean, 0.0));

    double cdf = 0;
    int median = -1, lo = -1, hi = -1;
    for (int k = 0; k <= mp.d; ++k) {
        cdf += sp.pmf[k];
        if (lo < 0 && cdf >= 0.025) lo = k;
        if (median < 0 && cdf >= 0.5) median = k;
        if (hi < 0 && cdf >= 0.975) hi = k;
    }
    sp.median = median < 0 ? mp.d : median;
    sp.ci_lo = lo < 0 ? mp.d : lo;
    sp.ci_hi = hi < 0 ? mp.d : hi;
    return sp;
}

std::pair<Gamma, double> hpm(const ModelPosterior& mp) {
    const std::uint64_t count = mp.model_count();
    std::uint64_t best = 0;
    for (std::uint64_t i = 1; i < count; ++i) {
        if (mp.log_post[i] > mp.log_post[best] ||
            (mp.log_post[i] == mp.log_post[best] && mp.size[i] < mp.size[best]))
            best = i;
    }
    return {mp.model(best), std::exp(mp.log_post[best])};
}

Gamma mpm(const ModelPosterior& mp, const std::vector<double>& inclusion) {
    std::uint32_t bits = 0;
    for (int j = 0; j < mp.d; ++j)
        if (inclusion[j] >= 0.5) bits |= (1u << j);
    return Gamma{bits, mp.d};
}

PosteriorSummary summarize(const ModelPosterior& mp) {
    PosteriorSummary s;
    s.inclusion = inclusion_probabilities(mp);
    auto [h, p] = hpm(mp);
    s.hpm_model = h;
    s.hpm_prob = p;
    s.mpm_model = mpm(mp, s.inclusion);
    s.size = size_posterior(mp);
    return s;
}

std::vector<std::uint64_t> rank_models(const ModelPosterior& mp, std::uint64_t top_k) {
    const std::uint64_t count = mp.model_count();
    std::vector<std::uint64_t> order(count);
    for (std::uint64_t i = 0; i < count; ++i) order[i] = i;
    const auto better = [&](std::uint64_t a, std::uint64_t b) {
        if (mp.log_post[a] != mp.log_post[b]) return mp.log_post[a] > mp.log_post[b];
        if (mp.size[a] != mp.size[b]) return mp.size[a] < mp.size[b];
        return a < b;
    };
    const std::uint64_t k = std::min(top_k, count);
    std::partial_sort(order.begin(), order.begin() + k, order.end(), better);
    order.resize(k);
    return order;
}

} // namespace lossprior
