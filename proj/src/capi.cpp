#include "lossprior/lossprior.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <memory>
#include <string>
#include <vector>

#include "core/dataset.hpp"
#include "core/errors.hpp"
#include "core/kl.hpp"
#include "core/posterior.hpp"
#include "core/priors.hpp"
#include "core/robustness.hpp"
#include "core/sim.hpp"

using namespace lossprior;

namespace {

thread_local std::string g_last_error;

lp_status fail(lp_status code, const char* what) {
    g_last_error = what;
    return code;
}

template <typename Fn>
lp_status guarded(Fn&& fn) {
    try {
        fn();
        return LP_OK;
    } catch (const ValidationError& e) {
        return fail(LP_ERR_INVALID, e.what());
    } catch (const NumericError& e) {
        return fail(LP_ERR_NUMERIC, e.what());
    } catch (const std::exception& e) {
        return fail(LP_ERR_NUMERIC, e.what());
    }
}

PriorSpec make_prior(lp_prior_kind kind, double c) {
    switch (kind) {
        case LP_PRIOR_UNIFORM: return {PriorKind::kUniform, 0.0};
        case LP_PRIOR_SCOTT_BERGER: return {PriorKind::kScottBerger, 0.0};
        case LP_PRIOR_LOSS: return {PriorKind::kLoss, c};
    }
    throw ValidationError("unknown prior kind");
}

struct Resolved {
    HyperSpec hyper;
    QuadratureConfig quad;
    int threads = 0;
};

Resolved resolve(const lp_options* opt) {
    Resolved r;
    if (!opt) return r;
    r.hyper.a = opt->a;
    r.hyper.b = opt->b;
    if (opt->rho > 0) r.hyper.rho = opt->rho;
    r.quad.nodes = opt->quad_nodes;
    r.quad.refine = opt->quad_refine != 0;
    r.quad.rtol = opt->quad_rtol;
    r.threads = opt->threads;
    return r;
}

} // namespace

struct lp_dataset {
    Dataset ds;
};

struct lp_posterior {
    ModelPosterior mp;
    PosteriorSummary summary;
    std::vector<std::uint64_t> ranked; // lazily grown
};

struct lp_sim_result {
    SimResult res;
};

struct lp_rob_result {
    int d = 0;
    int replicates = 0;
    int subsample = 0;
    std::vector<PriorSpec> priors;
    std::vector<RobustnessRecord> records; // replicate-major, then prior
    RobustnessSummary summary;
};

extern "C" {

const char* lp_version(void) { return "0.1.0"; }

const char* lp_last_error(void) { return g_last_error.c_str(); }

void lp_options_default(lp_options* opt) {
    if (!opt) return;
    opt->a = 0.5;
    opt->b = 1.0;
    opt->rho = 0.0; // auto: 1/(|model|+1)
    opt->quad_nodes = 201;
    opt->quad_refine = 1;
    opt->quad_rtol = 1e-10;
    opt->threads = 0;
}

/* ---------------- datasets ---------------- */

lp_status lp_dataset_load_csv(const char* path, const char* response, int log_all,
                              lp_dataset** out) {
    if (!path || !response || !out) return fail(LP_ERR_INVALID, "null argument");
    return guarded([&] {
        auto handle = std::make_unique<lp_dataset>();
        handle->ds = load_csv(path, response,
                              log_all ? CsvTransform::kLogAll : CsvTransform::kNone);
        *out = handle.release();
    });
}

lp_status lp_dataset_builtin(const char* name, int log_variant, lp_dataset** out) {
    if (!name || !out) return fail(LP_ERR_INVALID, "null argument");
    return guarded([&] {
        auto handle = std::make_unique<lp_dataset>();
        handle->ds = builtin(name, log_variant != 0);
        *out = handle.release();
    });
}

void lp_dataset_free(lp_dataset* ds) { delete ds; }

int lp_dataset_n(const lp_dataset* ds) { return ds ? ds->ds.n() : 0; }
int lp_dataset_d(const lp_dataset* ds) { return ds ? ds->ds.d() : 0; }
const char* lp_dataset_name(const lp_dataset* ds) { return ds ? ds->ds.name.c_str() : ""; }
const char* lp_dataset_response_name(const lp_dataset* ds) {
    return ds ? ds->ds.response_name.c_str() : "";
}
const char* lp_dataset_covariate_name(const lp_dataset* ds, int j) {
    if (!ds || j < 0 || j >= ds->ds.d()) return "";
    return ds->ds.covariate_names[j].c_str();
}
const char* lp_dataset_covariate_label(const lp_dataset* ds, int j) {
    if (!ds || j < 0 || j >= ds->ds.d()) return "";
    return ds->ds.covariate_labels[j].c_str();
}
const char* lp_dataset_checksum(const lp_dataset* ds) {
    return ds ? ds->ds.checksum.c_str() : "";
}
int lp_dataset_log_transformed(const lp_dataset* ds) {
    return ds && ds->ds.transform_log ? 1 : 0;
}

/* ---------------- model priors ---------------- */

lp_status lp_prior_inclusion(lp_prior_kind kind, double c, double* out) {
    if (!out) return fail(LP_ERR_INVALID, "null argument");
    return guarded([&] { *out = prior_inclusion(make_prior(kind, c)); });
}

lp_status lp_prior_curve(lp_prior_kind kind, double c, int d, double* log_mass) {
    if (!log_mass) return fail(LP_ERR_INVALID, "null argument");
    return guarded([&] {
        const auto curve = prior_curve(make_prior(kind, c), d);
        std::memcpy(log_mass, curve.data(), curve.size() * sizeof(double));
    });
}

lp_status lp_size_prior(lp_prior_kind kind, double c, int d, double* pmf) {
    if (!pmf) return fail(LP_ERR_INVALID, "null argument");
    return guarded([&] {
        const auto v = size_prior(make_prior(kind, c), d);
        std::memcpy(pmf, v.data(), v.size() * sizeof(double));
    });
}

/* ---------------- posterior analysis ---------------- */

lp_status lp_analyze(const lp_dataset* ds, lp_prior_kind prior, double c,
                     const lp_options* opt, lp_posterior** out) {
    if (!ds || !out) return fail(LP_ERR_INVALID, "null argument");
    return guarded([&] {
        const Resolved r = resolve(opt);
        auto handle = std::make_unique<lp_posterior>();
        handle->mp = compute_posterior(ds->ds.X, ds->ds.y, make_prior(prior, c), r.hyper,
                                       r.quad, r.threads);
        handle->summary = summarize(handle->mp);
        *out = handle.release();
    });
}

void lp_posterior_free(lp_posterior* p) { delete p; }

int lp_posterior_d(const lp_posterior* p) { return p ? p->mp.d : 0; }

uint64_t lp_posterior_model_count(const lp_posterior* p) {
    return p ? p->mp.model_count() : 0;
}

lp_status lp_posterior_inclusion(const lp_posterior* p, double* out) {
    if (!p || !out) return fail(LP_ERR_INVALID, "null argument");
    std::memcpy(out, p->summary.inclusion.data(), p->summary.inclusion.size() * sizeof(double));
    return LP_OK;
}

lp_status lp_posterior_size_pmf(const lp_posterior* p, double* pmf) {
    if (!p || !pmf) return fail(LP_ERR_INVALID, "null argument");
    std::memcpy(pmf, p->summary.size.pmf.data(), p->summary.size.pmf.size() * sizeof(double));
    return LP_OK;
}

lp_status lp_posterior_size_stats(const lp_posterior* p, double* mean, double* sd,
                                  int* median, int* ci_lo, int* ci_hi) {
    if (!p) return fail(LP_ERR_INVALID, "null argument");
    const SizePosterior& s = p->summary.size;
    if (mean) *mean = s.mean;
    if (sd) *sd = s.sd;
    if (median) *median = s.median;
    if (ci_lo) *ci_lo = s.ci_lo;
    if (ci_hi) *ci_hi = s.ci_hi;
    return LP_OK;
}

lp_status lp_posterior_hpm(const lp_posterior* p, uint32_t* bits, double* prob) {
    if (!p) return fail(LP_ERR_INVALID, "null argument");
    if (bits) *bits = p->summary.hpm_model.bits;
    if (prob) *prob = p->summary.hpm_prob;
    return LP_OK;
}

lp_status lp_posterior_mpm(const lp_posterior* p, uint32_t* bits) {
    if (!p || !bits) return fail(LP_ERR_INVALID, "null argument");
    *bits = p->summary.mpm_model.bits;
    return LP_OK;
}

lp_status lp_posterior_top_model(const lp_posterior* p, uint64_t rank, uint32_t* bits,
                                 double* post_prob, double* log_bf, double* log_prior) {
    if (!p) return fail(LP_ERR_INVALID, "null argument");
    if (rank >= p->mp.model_count()) return fail(LP_ERR_INVALID, "rank out of range");
    auto* self = const_cast<lp_posterior*>(p);
    if (rank >= self->ranked.size()) {
        const std::uint64_t want =
            std::min<std::uint64_t>(std::max<std::uint64_t>(64, (rank + 1) * 2),
                                    p->mp.model_count());
        self->ranked = rank_models(p->mp, want);
    }
    const std::uint64_t idx = self->ranked[rank];
    if (bits) *bits = static_cast<uint32_t>(idx);
    if (post_prob) *post_prob = std::exp(p->mp.log_post[idx]);
    if (log_bf) *log_bf = p->mp.log_bf[idx];
    if (log_prior) *log_prior = p->mp.log_prior[idx];
    return LP_OK;
}

/* ---------------- frequentist simulation ---------------- */

lp_status lp_sim_run(int n, int d, double omega, int replicates, uint64_t seed,
                     double loss_c, const lp_options* opt, lp_sim_result** out) {
    if (!out) return fail(LP_ERR_INVALID, "null argument");
    return guarded([&] {
        const Resolved r = resolve(opt);
        SimCase c{n, d, omega, replicates, seed};
        auto handle = std::make_unique<lp_sim_result>();
        handle->res = run_case(c, r.hyper, r.quad, loss_c, r.threads);
        *out = handle.release();
    });
}

void lp_sim_result_free(lp_sim_result* r) { delete r; }

lp_status lp_sim_metric(const lp_sim_result* r, int prior_index, double* coverage,
                        double* mse_mean, double* mse_median, double* se_coverage,
                        double* se_mse_mean, double* se_mse_median) {
    if (!r) return fail(LP_ERR_INVALID, "null argument");
    if (prior_index < 0 || prior_index >= kSimPriors)
        return fail(LP_ERR_INVALID, "prior_index must be 0, 1 or 2");
    const PriorMetrics& m = r->res.metrics[prior_index];
    if (coverage) *coverage = m.coverage;
    if (mse_mean) *mse_mean = m.mse_mean;
    if (mse_median) *mse_median = m.mse_median;
    if (se_coverage) *se_coverage = m.se_coverage;
    if (se_mse_mean) *se_mse_mean = m.se_mse_mean;
    if (se_mse_median) *se_mse_median = m.se_mse_median;
    return LP_OK;
}

/* ---------------- subsampling robustness ---------------- */

lp_status lp_rob_run(const lp_dataset* ds, double fraction, int replicates, uint64_t seed,
                     const double* loss_c_list, int n_loss_c, const lp_options* opt,
                     lp_rob_result** out) {
    if (!ds || !out) return fail(LP_ERR_INVALID, "null argument");
    if (n_loss_c > 0 && !loss_c_list) return fail(LP_ERR_INVALID, "null loss_c_list");
    return guarded([&] {
        const Resolved r = resolve(opt);
        RobustnessConfig cfg;
        cfg.subsample_fraction = fraction;
        cfg.replicates = replicates;
        cfg.seed = seed;
        if (n_loss_c > 0) {
            cfg.priors = {{PriorKind::kUniform, 0.0}, {PriorKind::kScottBerger, 0.0}};
            for (int i = 0; i < n_loss_c; ++i)
                cfg.priors.push_back({PriorKind::kLoss, loss_c_list[i]});
        }
        auto handle = std::make_unique<lp_rob_result>();
        handle->priors = cfg.resolved_priors();
        handle->records =
            run_robustness(ds->ds.X, ds->ds.y, cfg, r.hyper, r.quad, r.threads);
        handle->d = ds->ds.d();
        handle->replicates = replicates;
        handle->subsample = cfg.subsample_size(ds->ds.n());
        handle->summary = summarize_robustness(handle->records, handle->d, handle->priors);
        *out = handle.release();
    });
}

void lp_rob_result_free(lp_rob_result* r) { delete r; }

int lp_rob_num_priors(const lp_rob_result* r) {
    return r ? static_cast<int>(r->priors.size()) : 0;
}

lp_status lp_rob_prior(const lp_rob_result* r, int prior_index, lp_prior_kind* kind,
                       double* c) {
    if (!r) return fail(LP_ERR_INVALID, "null argument");
    if (prior_index < 0 || prior_index >= static_cast<int>(r->priors.size()))
        return fail(LP_ERR_INVALID, "prior_index out of range");
    const PriorSpec& p = r->priors[prior_index];
    if (kind) {
        *kind = p.kind == PriorKind::kUniform        ? LP_PRIOR_UNIFORM
                : p.kind == PriorKind::kScottBerger  ? LP_PRIOR_SCOTT_BERGER
                                                     : LP_PRIOR_LOSS;
    }
    if (c) *c = p.c;
    return LP_OK;
}

int lp_rob_replicates(const lp_rob_result* r) { return r ? r->replicates : 0; }
int lp_rob_subsample_size(const lp_rob_result* r) { return r ? r->subsample : 0; }

lp_status lp_rob_mean_size(const lp_rob_result* r, int prior_index, int replicate,
                           double* out) {
    if (!r || !out) return fail(LP_ERR_INVALID, "null argument");
    if (prior_index < 0 || prior_index >= static_cast<int>(r->priors.size()) ||
        replicate < 0 || replicate >= r->replicates)
        return fail(LP_ERR_INVALID, "index out of range");
    *out = r->records[static_cast<std::size_t>(replicate) * r->priors.size() + prior_index]
               .mean_size;
    return LP_OK;
}

lp_status lp_rob_inclusion(const lp_rob_result* r, int prior_index, int replicate,
                           double* out) {
    if (!r || !out) return fail(LP_ERR_INVALID, "null argument");
    if (prior_index < 0 || prior_index >= static_cast<int>(r->priors.size()) ||
        replicate < 0 || replicate >= r->replicates)
        return fail(LP_ERR_INVALID, "index out of range");
    const auto& rec =
        r->records[static_cast<std::size_t>(replicate) * r->priors.size() + prior_index];
    std::memcpy(out, rec.inclusion.data(), rec.inclusion.size() * sizeof(double));
    return LP_OK;
}

int lp_rob_hist_bins(const lp_rob_result* r) {
    return r ? static_cast<int>(r->summary.hist.front().size()) : 0;
}

lp_status lp_rob_hist(const lp_rob_result* r, int prior_index, int* counts) {
    if (!r || !counts) return fail(LP_ERR_INVALID, "null argument");
    if (prior_index < 0 || prior_index >= static_cast<int>(r->priors.size()))
        return fail(LP_ERR_INVALID, "prior_index out of range");
    const auto& h = r->summary.hist[prior_index];
    std::memcpy(counts, h.data(), h.size() * sizeof(int));
    return LP_OK;
}

lp_status lp_rob_box(const lp_rob_result* r, int prior_index, int j, double out[7]) {
    if (!r || !out) return fail(LP_ERR_INVALID, "null argument");
    if (prior_index < 0 || prior_index >= static_cast<int>(r->priors.size()) || j < 0 ||
        j >= r->d)
        return fail(LP_ERR_INVALID, "index out of range");
    const BoxStats& b = r->summary.box[prior_index][j];
    out[0] = b.min;
    out[1] = b.q1;
    out[2] = b.median;
    out[3] = b.q3;
    out[4] = b.max;
    out[5] = b.lo_whisker;
    out[6] = b.hi_whisker;
    return LP_OK;
}

/* ---------------- KL verification ---------------- */

lp_status lp_verify_kl(int trials, int n, int d, uint64_t seed, double tol,
                       lp_kl_report* out) {
    if (!out) return fail(LP_ERR_INVALID, "null argument");
    return guarded([&] {
        const KlVerifyReport rep = verify_min_kl(trials, n, d, seed, tol);
        out->trials = rep.trials;
        out->passed = rep.passed;
        out->hypothesis_violations = rep.hypothesis_violations;
        out->grad_checks = rep.grad_checks;
        out->max_min_kl = rep.max_min_kl;
        out->max_grad_rel_err = rep.max_grad_rel_err;
        out->tol = rep.tol;
    });
}

} // extern "C"
