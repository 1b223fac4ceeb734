#include "sim.hpp"

#include <cmath>
#include <cstring>
#include <limits>

#include "errors.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace lossprior {

void SimCase::validate() const {
    if (d < 1 || d > kMaxCovariates)
        throw ValidationError("sim case: d must be in [1, " + std::to_string(kMaxCovariates) + "]");
    if (n <= d + 1)
        throw ValidationError("sim case: need n > d + 1 (n = " + std::to_string(n) +
                              ", d = " + std::to_string(d) + ")");
    if (!(omega > 0) || !(omega < 1))
        throw ValidationError("sim case: omega must lie in (0,1)");
    if (replicates < 1) throw ValidationError("sim case: replicates must be positive");
}

std::uint64_t SimCase::case_id() const {
    std::uint64_t h = fnv1a64(&n, sizeof n);
    h = fnv1a64(&d, sizeof d, h);
    std::uint64_t ob;
    std::memcpy(&ob, &omega, sizeof ob);
    h = fnv1a64(&ob, sizeof ob, h);
    return h;
}

namespace {

constexpr std::uint64_t kRetrySalt = 0x52455452ull; // replicate redraw stream

Replicate build_replicate(const SimCase& c, std::uint64_t stream, const HyperSpec& hyper,
                          bool& rank_ok) {
    SplitMix64 rng(stream);
    Replicate r;
    r.X.resize(c.n, c.d);
    for (int i = 0; i < c.n; ++i)
        for (int j = 0; j < c.d; ++j) r.X(i, j) = rng.normal();

    std::uint32_t bits = 0;
    for (int j = 0; j < c.d; ++j)
        if (rng.bernoulli(c.omega)) bits |= (1u << j);
    r.true_gamma = Gamma{bits, c.d};
    const int k = r.true_gamma.size();

    r.y.resize(c.n);
    rank_ok = true;
    Eigen::VectorXd signal = Eigen::VectorXd::Zero(c.n);
    if (k > 0) {
        const double u = rng.uniform_open();
        const RobustHyper h = hyper.resolve(c.n, k);
        const double g = sample_g(u, h);

        Eigen::MatrixXd Xg(c.n, k);
        int col = 0;
        for (int j = 0; j < c.d; ++j)
            if (r.true_gamma.contains(j)) Xg.col(col++) = r.X.col(j);
        Eigen::MatrixXd Xc = Xg.rowwise() - Xg.colwise().mean();

        Eigen::HouseholderQR<Eigen::MatrixXd> qr(Xc);
        Eigen::MatrixXd R = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
        const double tol = c.n * std::numeric_limits<double>::epsilon();
        for (int j = 0; j < k; ++j)
            if (std::abs(R(j, j)) <= tol * Xc.col(j).norm()) rank_ok = false;

        Eigen::VectorXd v(k);
        for (int j = 0; j < k; ++j) v[j] = rng.normal();
        if (rank_ok) {
            const Eigen::VectorXd beta =
                std::sqrt(g) * R.triangularView<Eigen::Upper>().solve(v);
            signal = Xg * beta;
        }
    }
    for (int i = 0; i < c.n; ++i) r.y[i] = signal[i] + rng.normal();
    return r;
}

} // namespace

Replicate generate_replicate(const SimCase& c, int rep_index, const HyperSpec& hyper) {
    c.validate();
    if (rep_index < 0 || rep_index >= c.replicates)
        throw ValidationError("generate_replicate: rep_index out of range");
    bool ok = false;
    Replicate r = build_replicate(c, substream(c.seed, c.case_id(), rep_index), hyper, ok);
    if (ok) return r;
    r = build_replicate(c, substream(c.seed, c.case_id() ^ kRetrySalt, rep_index), hyper, ok);
    if (ok) return r;
    throw NumericError("generate_replicate: replicate " + std::to_string(rep_index) +
                       " drew a rank-deficient truth design twice");
}

SizeStatsLite size_stats_from_log_scores(const std::vector<double>& log_score) {
    const int d = static_cast<int>(log_score.size()) - 1;
    double mx = -std::numeric_limits<double>::infinity();
    for (double v : log_score) mx = std::max(mx, v);
    double sum = 0;
    for (double v : log_score) sum += std::exp(v - mx);

    SizeStatsLite s;
    double cdf = 0;
    int median = -1, lo = -1, hi = -1;
    for (int k = 0; k <= d; ++k) {
        const double p = std::exp(log_score[k] - mx) / sum;
        s.mean += k * p;
        cdf += p;
        if (lo < 0 && cdf >= 0.025) lo = k;
        if (median < 0 && cdf >= 0.5) median = k;
        if (hi < 0 && cdf >= 0.975) hi = k;
    }
    s.median = median < 0 ? d : median;
    s.lo = lo < 0 ? d : lo;
    s.hi = hi < 0 ? d : hi;
    return s;
}

PriorMetrics metrics_from_outcomes(const std::vector<SizeStatsLite>& stats,
                                   const std::vector<int>& true_sizes) {
    const std::size_t reps = stats.size();
    if (reps == 0 || true_sizes.size() != reps)
        throw ValidationError("metrics_from_outcomes: empty or mismatched inputs");

    double sum_cov = 0, sum_mm = 0, sum_md = 0;
    for (std::size_t i = 0; i < reps; ++i) {
        const int kt = true_sizes[i];
        sum_cov += (stats[i].lo <= kt && kt <= stats[i].hi) ? 1.0 : 0.0;
        sum_mm += (stats[i].mean - kt) * (stats[i].mean - kt);
        sum_md += static_cast<double>((stats[i].median - kt) * (stats[i].median - kt));
    }
    PriorMetrics m;
    const double N = static_cast<double>(reps);
    m.coverage = sum_cov / N;
    m.mse_mean = sum_mm / N;
    m.mse_median = sum_md / N;

    if (reps > 1) {
        double v_cov = 0, v_mm = 0, v_md = 0;
        for (std::size_t i = 0; i < reps; ++i) {
            const int kt = true_sizes[i];
            const double c = ((stats[i].lo <= kt && kt <= stats[i].hi) ? 1.0 : 0.0) - m.coverage;
            const double a = (stats[i].mean - kt) * (stats[i].mean - kt) - m.mse_mean;
            const double b =
                static_cast<double>((stats[i].median - kt) * (stats[i].median - kt)) - m.mse_median;
            v_cov += c * c;
            v_mm += a * a;
            v_md += b * b;
        }
        const double inv = 1.0 / (N - 1.0);
        m.se_coverage = std::sqrt(v_cov * inv / N);
        m.se_mse_mean = std::sqrt(v_mm * inv / N);
        m.se_mse_median = std::sqrt(v_md * inv / N);
    }
    return m;
}

SimResult run_case(const SimCase& c, const HyperSpec& hyper, const QuadratureConfig& q,
                   double loss_c, int threads) {
    c.validate();
    hyper.validate();
    q.validate();
    const PriorSpec priors[kSimPriors] = {
        {PriorKind::kUniform, 0.0},
        {PriorKind::kScottBerger, 0.0},
        {PriorKind::kLoss, loss_c},
    };
    priors[2].validate();

    // per-model prior mass depends only on model size for all three kinds
    std::array<std::vector<double>, kSimPriors> log_prior_by_size;
    for (int p = 0; p < kSimPriors; ++p) {
        log_prior_by_size[p].resize(c.d + 1);
        for (int k = 0; k <= c.d; ++k)
            log_prior_by_size[p][k] = log_prior(
                priors[p], Gamma{static_cast<std::uint32_t>((std::uint64_t{1} << k) - 1), c.d});
    }

    const BfEvaluator bf(c.n, c.d, hyper, q);
    const std::uint64_t nmodels = std::uint64_t{1} << c.d;

    std::vector<std::array<SizeStatsLite, kSimPriors>> outcome(c.replicates);
    std::vector<int> true_size(c.replicates);

    const int nthreads = resolve_threads(threads);
    struct Scratch {
        SubmodelScorer::Workspace sws;
        BfEvaluator::Workspace bws;
        std::vector<double> by_size;     // logsumexp accumulators per size
        std::vector<double> by_size_max;
        std::vector<double> score;
    };
    std::vector<Scratch> scratch(nthreads);

    parallel_for(c.replicates, nthreads, [&](std::int64_t rep, int wid) {
        Scratch& sc = scratch[wid];
        const Replicate r = generate_replicate(c, static_cast<int>(rep), hyper);
        true_size[rep] = r.true_gamma.size();

        const SubmodelScorer scorer(r.X, r.y);

        // log of sum of Bayes factors per model size, streamed in enumeration
        // order with a running max-shift per size bucket
        sc.by_size.assign(c.d + 1, 0.0);
        sc.by_size_max.assign(c.d + 1, -std::numeric_limits<double>::infinity());
        for (std::uint64_t m = 0; m < nmodels; ++m) {
            const Gamma gm{static_cast<std::uint32_t>(m), c.d};
            SufficientStats st;
            try {
                st = scorer.stats(gm, sc.sws);
            } catch (const NumericError& e) {
                throw NumericError("replicate " + std::to_string(rep) + ": " + e.what());
            }
            const double lb = bf.log_bf(st, sc.bws);
            const int k = st.k;
            if (lb <= sc.by_size_max[k]) {
                sc.by_size[k] += std::exp(lb - sc.by_size_max[k]);
            } else {
                sc.by_size[k] = sc.by_size[k] * std::exp(sc.by_size_max[k] - lb) + 1.0;
                sc.by_size_max[k] = lb;
            }
        }
        std::vector<double>& score = sc.score;
        score.resize(c.d + 1);
        for (int p = 0; p < kSimPriors; ++p) {
            for (int k = 0; k <= c.d; ++k)
                score[k] = sc.by_size_max[k] + std::log(sc.by_size[k]) + log_prior_by_size[p][k];
            outcome[rep][p] = size_stats_from_log_scores(score);
        }
    });

    SimResult res;
    res.sim_case = c;
    res.loss_c = loss_c;
    std::vector<SizeStatsLite> stats(c.replicates);
    for (int p = 0; p < kSimPriors; ++p) {
        for (int i = 0; i < c.replicates; ++i) stats[i] = outcome[i][p];
        res.metrics[p] = metrics_from_outcomes(stats, true_size);
    }
    return res;
}

std::vector<SimResult> run_grid(const std::vector<SimCase>& cases, const HyperSpec& hyper,
                                const QuadratureConfig& q, double loss_c, int threads) {
    std::vector<SimResult> out;
    out.reserve(cases.size());
    for (const auto& c : cases) out.push_back(run_case(c, hyper, q, loss_c, threads));
    return out;
}

std::vector<SimCase> paper_grid(int replicates, std::uint64_t seed) {
    std::vector<SimCase> cases;
    for (int n : {30, 50, 100})
        for (int d : {3, 5, 10, 15})
            for (double omega : {0.15, 0.50, 0.75})
                cases.push_back(SimCase{n, d, omega, replicates, seed});
    return cases;
}

} // namespace lossprior
