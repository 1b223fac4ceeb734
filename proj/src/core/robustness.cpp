#include "robustness.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>

#include "errors.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace lossprior {

std::vector<PriorSpec> RobustnessConfig::resolved_priors() const {
    if (!priors.empty()) return priors;
    return {
        {PriorKind::kUniform, 0.0},   {PriorKind::kScottBerger, 0.0},
        {PriorKind::kLoss, 0.5},      {PriorKind::kLoss, 1.0},
        {PriorKind::kLoss, 1.5},      {PriorKind::kLoss, 2.0},
    };
}

int RobustnessConfig::subsample_size(int n) const {
    return static_cast<int>(std::lround(subsample_fraction * n));
}

void RobustnessConfig::validate(int n, int d) const {
    if (!(subsample_fraction > 0) || subsample_fraction > 1.0)
        throw ValidationError("subsample fraction must lie in (0, 1]");
    if (replicates < 1) throw ValidationError("robustness replicates must be positive");
    if (subsample_size(n) <= d + 1)
        throw ValidationError("subsample size " + std::to_string(subsample_size(n)) +
                              " is too small for d = " + std::to_string(d) +
                              " (need > d + 1)");
    for (const auto& p : resolved_priors()) p.validate();
}

namespace {

constexpr std::uint64_t kRobustnessTag = 0x524F4253ull;

// m distinct row indices of [0, n) by partial Fisher-Yates, sorted.
std::vector<int> draw_rows(SplitMix64& rng, int n, int m) {
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    for (int i = 0; i < m; ++i) {
        const int j = i + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(n - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(m);
    std::sort(idx.begin(), idx.end());
    return idx;
}

} // namespace

std::vector<RobustnessRecord> run_robustness(const Eigen::MatrixXd& X,
                                             const Eigen::VectorXd& y,
                                             const RobustnessConfig& cfg,
                                             const HyperSpec& hyper,
                                             const QuadratureConfig& q, int threads) {
    const int n = static_cast<int>(X.rows());
    const int d = static_cast<int>(X.cols());
    cfg.validate(n, d);
    hyper.validate();
    q.validate();
    const std::vector<PriorSpec> priors = cfg.resolved_priors();
    const int m = cfg.subsample_size(n);
    const std::uint64_t nmodels = std::uint64_t{1} << d;

    // prior mass by model size, per prior
    std::vector<std::vector<double>> lp_by_size(priors.size());
    for (std::size_t p = 0; p < priors.size(); ++p) {
        lp_by_size[p].resize(d + 1);
        for (int k = 0; k <= d; ++k)
            lp_by_size[p][k] = log_prior(
                priors[p], Gamma{static_cast<std::uint32_t>((std::uint64_t{1} << k) - 1), d});
    }

    const BfEvaluator bf(m, d, hyper, q);

    std::vector<RobustnessRecord> records(cfg.replicates * priors.size());

    const int nthreads = resolve_threads(threads);
    struct Scratch {
        SubmodelScorer::Workspace sws;
        BfEvaluator::Workspace bws;
        std::vector<double> log_bf;
        std::vector<std::uint8_t> size;
    };
    std::vector<Scratch> scratch(nthreads);

    parallel_for(cfg.replicates, nthreads, [&](std::int64_t rep, int wid) {
        Scratch& sc = scratch[wid];

        // draw a subsample; re-draw on rank deficiency, bounded
        Eigen::MatrixXd Xs(m, d);
        Eigen::VectorXd ys(m);
        std::unique_ptr<SubmodelScorer> scorer;
        int attempt = 0;
        for (; attempt < 10; ++attempt) {
            SplitMix64 rng(substream(cfg.seed, kRobustnessTag + attempt, rep));
            const std::vector<int> rows = draw_rows(rng, n, m);
            for (int i = 0; i < m; ++i) {
                Xs.row(i) = X.row(rows[i]);
                ys[i] = y[rows[i]];
            }
            try {
                scorer = std::make_unique<SubmodelScorer>(Xs, ys);
                // the scorer only factors lazily per model; probe the full model
                scorer->stats(Gamma{static_cast<std::uint32_t>(nmodels - 1), d}, sc.sws);
                break;
            } catch (const std::exception&) {
                scorer.reset();
            }
        }
        if (!scorer)
            throw NumericError("robustness replicate " + std::to_string(rep) +
                               ": subsample was rank deficient in 10 consecutive draws");

        sc.log_bf.resize(nmodels);
        sc.size.resize(nmodels);
        for (std::uint64_t mm = 0; mm < nmodels; ++mm) {
            const Gamma gm{static_cast<std::uint32_t>(mm), d};
            const SufficientStats st = scorer->stats(gm, sc.sws);
            sc.size[mm] = static_cast<std::uint8_t>(st.k);
            sc.log_bf[mm] = bf.log_bf(st, sc.bws);
        }

        for (std::size_t p = 0; p < priors.size(); ++p) {
            double mx = -std::numeric_limits<double>::infinity();
            for (std::uint64_t mm = 0; mm < nmodels; ++mm)
                mx = std::max(mx, sc.log_bf[mm] + lp_by_size[p][sc.size[mm]]);
            double sum = 0;
            RobustnessRecord rec;
            rec.replicate = static_cast<int>(rep);
            rec.prior = priors[p];
            rec.inclusion.assign(d, 0.0);
            double mean_size = 0;
            for (std::uint64_t mm = 0; mm < nmodels; ++mm) {
                const double w = std::exp(sc.log_bf[mm] + lp_by_size[p][sc.size[mm]] - mx);
                sum += w;
                mean_size += w * sc.size[mm];
                std::uint64_t bits = mm;
                while (bits) {
                    rec.inclusion[std::countr_zero(bits)] += w;
                    bits &= bits - 1;
                }
            }
            rec.mean_size = mean_size / sum;
            for (double& v : rec.inclusion) v = std::min(v / sum, 1.0);
            records[rep * priors.size() + p] = std::move(rec);
        }
    });

    return records;
}

namespace {

// linear-interpolation quantile (R type 7) of sorted values
double quantile_sorted(const std::vector<double>& v, double p) {
    if (v.empty()) return 0;
    const double h = p * (static_cast<double>(v.size()) - 1.0);
    const std::size_t i = static_cast<std::size_t>(h);
    if (i + 1 >= v.size()) return v.back();
    return v[i] + (h - i) * (v[i + 1] - v[i]);
}

BoxStats box_from(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    BoxStats b;
    b.min = v.front();
    b.max = v.back();
    b.q1 = quantile_sorted(v, 0.25);
    b.median = quantile_sorted(v, 0.5);
    b.q3 = quantile_sorted(v, 0.75);
    const double iqr = b.q3 - b.q1;
    const double lo_fence = b.q1 - 1.5 * iqr;
    const double hi_fence = b.q3 + 1.5 * iqr;
    b.lo_whisker = b.max;
    b.hi_whisker = b.min;
    for (double x : v) {
        if (x >= lo_fence) {
            b.lo_whisker = x;
            break;
        }
    }
    for (auto it = v.rbegin(); it != v.rend(); ++it) {
        if (*it <= hi_fence) {
            b.hi_whisker = *it;
            break;
        }
    }
    return b;
}

} // namespace

RobustnessSummary summarize_robustness(const std::vector<RobustnessRecord>& records,
                                       int d, const std::vector<PriorSpec>& priors) {
    if (records.empty()) throw ValidationError("summarize_robustness: no records");
    RobustnessSummary s;
    s.priors = priors;
    const int nbins = static_cast<int>(std::ceil(d / s.bin_width));
    s.bin_edges.resize(nbins + 1);
    for (int b = 0; b <= nbins; ++b) s.bin_edges[b] = b * s.bin_width;
    s.hist.assign(priors.size(), std::vector<int>(nbins, 0));
    s.box.assign(priors.size(), std::vector<BoxStats>(d));

    for (std::size_t p = 0; p < priors.size(); ++p) {
        std::vector<double> mean_sizes;
        std::vector<std::vector<double>> incl(d);
        for (const auto& rec : records) {
            if (!(rec.prior.kind == priors[p].kind && rec.prior.c == priors[p].c)) continue;
            mean_sizes.push_back(rec.mean_size);
            for (int j = 0; j < d; ++j) incl[j].push_back(rec.inclusion[j]);
        }
        if (mean_sizes.empty())
            throw ValidationError("summarize_robustness: no records for prior " +
                                  priors[p].label());
        for (double v : mean_sizes) {
            int b = static_cast<int>(v / s.bin_width);
            b = std::clamp(b, 0, nbins - 1);
            ++s.hist[p][b];
        }
        for (int j = 0; j < d; ++j) s.box[p][j] = box_from(incl[j]);
    }
    return s;
}

} // namespace lossprior
