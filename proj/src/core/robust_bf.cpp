#include "robust_bf.hpp"

#include <array>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>

#include "errors.hpp"

namespace lossprior {

void RobustHyper::validate() const {
    if (!(a > 0) || !(b > 0)) throw ValidationError("robust prior requires a > 0 and b > 0");
    if (n <= 0) throw ValidationError("robust prior hyperparameters are bound to a sample size n > 0");
    if (rho < b / (b + n) - 1e-12)
        throw ValidationError("robust prior requires rho >= b/(b+n)");
}

void HyperSpec::validate() const {
    if (!(a > 0) || !(b > 0)) throw ValidationError("robust prior requires a > 0 and b > 0");
    if (rho && !(*rho > 0)) throw ValidationError("fixed rho must be positive");
}

RobustHyper HyperSpec::resolve(int n, int k) const {
    validate();
    RobustHyper h{a, b, rho ? *rho : 1.0 / (k + 1.0), n};
    h.validate();
    return h;
}

void QuadratureConfig::validate() const {
    if (nodes < 15) throw ValidationError("quadrature needs at least 15 nodes");
    if (!(rtol > 0)) throw ValidationError("quadrature rtol must be positive");
}

double g_log_density(double g, const RobustHyper& h) {
    h.validate();
    const double L = h.support_lower();
    if (g < L) return -std::numeric_limits<double>::infinity();
    const double scale = h.rho * (h.b + h.n);
    return std::log(h.a) + h.a * std::log(scale) - (h.a + 1.0) * std::log(g + h.b);
}

double sample_g(double u, const RobustHyper& h) {
    h.validate();
    if (!(u > 0.0) || u > 1.0)
        throw ValidationError("sample_g: u must lie in (0,1]");
    const double scale = h.rho * (h.b + h.n);
    return scale * std::pow(u, -1.0 / h.a) - h.b;
}

double conditional_log_bf(const SufficientStats& s, double g) {
    if (!(g >= 0)) throw ValidationError("conditional_log_bf: g must be nonnegative");
    if (s.k == 0) return 0.0;
    return 0.5 * (s.n - 1 - s.k) * std::log1p(g) -
           0.5 * (s.n - 1) * std::log1p(g * s.one_minus_r2());
}

const GaussLegendre& GaussLegendre::unit(int nodes) {
    static std::map<int, std::unique_ptr<GaussLegendre>> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(nodes);
    if (it != cache.end()) return *it->second;

    auto rule = std::make_unique<GaussLegendre>();
    rule->x.resize(nodes);
    rule->w.resize(nodes);
    const int m = (nodes + 1) / 2;
    for (int i = 0; i < m; ++i) {
        // Newton iteration for the i-th root of P_nodes on (-1,1)
        double x = std::cos(std::numbers::pi * (i + 0.75) / (nodes + 0.5));
        double dp = 0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int j = 2; j <= nodes; ++j) {
                const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            dp = nodes * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        // map to (0,1)
        rule->x[i] = 0.5 * (1.0 - x);
        rule->w[i] = 0.5 * w;
        rule->x[nodes - 1 - i] = 0.5 * (1.0 + x);
        rule->w[nodes - 1 - i] = 0.5 * w;
    }
    const auto* ptr = rule.get();
    cache.emplace(nodes, std::move(rule));
    return *ptr;
}

namespace {

double logsumexp(const std::vector<double>& vals) {
    double m = -std::numeric_limits<double>::infinity();
    for (double v : vals) m = std::max(m, v);
    if (!std::isfinite(m)) return m;
    double s = 0;
    for (double v : vals) s += std::exp(v - m);
    return m + std::log(s);
}

// One composite level: 2^level panels of the base rule over s in (0,1).
double eval_level(int level, const GaussLegendre& gl, double inv_a, double scale, double b,
                  double cf1, double cf2, double omr, std::vector<double>& vals) {
    const int nodes = static_cast<int>(gl.x.size());
    const int panels = 1 << level;
    const double inv_p = 1.0 / panels;
    vals.resize(static_cast<std::size_t>(nodes) * panels);
    std::size_t idx = 0;
    for (int p = 0; p < panels; ++p) {
        for (int i = 0; i < nodes; ++i, ++idx) {
            const double s = (p + gl.x[i]) * inv_p;
            const double g =
                (inv_a == 2.0 ? scale / (s * s) : scale * std::pow(s, -inv_a)) - b;
            vals[idx] = std::log(gl.w[i] * inv_p) + cf1 * std::log1p(g) -
                        cf2 * std::log1p(g * omr);
        }
    }
    return logsumexp(vals);
}

std::string format_estimates(double a, double b) {
    std::ostringstream os;
    os.precision(17);
    os << a << " and " << b;
    return os.str();
}

constexpr int kMaxHalvings = 12;

} // namespace

double robust_log_bf(const SufficientStats& s, const RobustHyper& h,
                     const QuadratureConfig& q) {
    h.validate();
    q.validate();
    if (s.n != h.n)
        throw ValidationError("robust_log_bf: stats have n = " + std::to_string(s.n) +
                              " but hyperparameters are bound to n = " + std::to_string(h.n));
    if (s.k == 0) return 0.0;

    const GaussLegendre& gl = GaussLegendre::unit(q.nodes);
    const double inv_a = 1.0 / h.a;
    const double scale = h.rho * (h.b + h.n);
    const double cf1 = 0.5 * (s.n - 1 - s.k);
    const double cf2 = 0.5 * (s.n - 1);
    const double omr = s.one_minus_r2();

    std::vector<double> vals;
    double prev = eval_level(0, gl, inv_a, scale, h.b, cf1, cf2, omr, vals);
    if (!q.refine) return prev;
    double cur = prev;
    for (int level = 1; level <= kMaxHalvings; ++level) {
        cur = eval_level(level, gl, inv_a, scale, h.b, cf1, cf2, omr, vals);
        if (std::abs(std::expm1(prev - cur)) < q.rtol) return cur;
        if (level < kMaxHalvings) prev = cur;
    }
    throw NumericError("robust_log_bf: quadrature did not converge after " +
                       std::to_string(kMaxHalvings) + " halvings (last estimates " +
                       format_estimates(prev, cur) + ")");
}

// ---------------------------------------------------------------------------

struct BfEvaluator::Impl {
    int n = 0, d = 0;
    HyperSpec hyper;
    QuadratureConfig q;

    struct Level {
        std::vector<double> logw;               // log(w/P), panel-major
        std::vector<std::vector<double>> g;     // [k-1][point]
        std::vector<std::vector<double>> l1g;   // log1p(g)
    };

    mutable std::array<std::atomic<Level*>, kMaxHalvings + 1> levels{};
    mutable std::mutex grow_mu;

    ~Impl() {
        for (auto& l : levels) delete l.load();
    }

    const Level& ensure(int level) const {
        Level* got = levels[level].load(std::memory_order_acquire);
        if (got) return *got;
        std::lock_guard<std::mutex> lock(grow_mu);
        got = levels[level].load(std::memory_order_relaxed);
        if (got) return *got;

        const GaussLegendre& gl = GaussLegendre::unit(q.nodes);
        auto lv = std::make_unique<Level>();
        const int nodes = q.nodes;
        const int panels = 1 << level;
        const double inv_p = 1.0 / panels;
        const std::size_t total = static_cast<std::size_t>(nodes) * panels;
        lv->logw.resize(total);
        std::vector<double> svals(total);
        std::size_t idx = 0;
        for (int p = 0; p < panels; ++p)
            for (int i = 0; i < nodes; ++i, ++idx) {
                svals[idx] = (p + gl.x[i]) * inv_p;
                lv->logw[idx] = std::log(gl.w[i] * inv_p);
            }
        lv->g.resize(d);
        lv->l1g.resize(d);
        for (int k = 1; k <= d; ++k) {
            const RobustHyper h = hyper.resolve(n, k);
            const double inv_a = 1.0 / h.a;
            const double scale = h.rho * (h.b + h.n);
            auto& gk = lv->g[k - 1];
            auto& lk = lv->l1g[k - 1];
            gk.resize(total);
            lk.resize(total);
            for (std::size_t t = 0; t < total; ++t) {
                const double s = svals[t];
                gk[t] = (inv_a == 2.0 ? scale / (s * s) : scale * std::pow(s, -inv_a)) - h.b;
                lk[t] = std::log1p(gk[t]);
            }
        }
        got = lv.release();
        levels[level].store(got, std::memory_order_release);
        return *got;
    }

    double eval(int level, int k, double cf1, double cf2, double omr,
                std::vector<double>& vals) const {
        const Level& lv = ensure(level);
        const auto& gk = lv.g[k - 1];
        const auto& lk = lv.l1g[k - 1];
        const std::size_t total = gk.size();
        vals.resize(total);
        for (std::size_t t = 0; t < total; ++t)
            vals[t] = lv.logw[t] + cf1 * lk[t] - cf2 * std::log1p(gk[t] * omr);
        return logsumexp(vals);
    }
};

BfEvaluator::BfEvaluator(int n, int d, const HyperSpec& hyper, const QuadratureConfig& q)
    : impl_(std::make_unique<Impl>()) {
    hyper.validate();
    q.validate();
    if (n <= 1) throw ValidationError("BfEvaluator: need n > 1");
    if (d < 0 || d > kMaxCovariates) throw ValidationError("BfEvaluator: d out of range");
    impl_->n = n;
    impl_->d = d;
    impl_->hyper = hyper;
    impl_->q = q;
    impl_->ensure(0);
    if (q.refine) impl_->ensure(1);
}

BfEvaluator::~BfEvaluator() = default;

double BfEvaluator::log_bf(const SufficientStats& s, Workspace& ws) const {
    if (s.k == 0) return 0.0;
    if (s.n != impl_->n)
        throw ValidationError("BfEvaluator: stats bound to a different sample size");
    if (s.k > impl_->d) throw ValidationError("BfEvaluator: model size exceeds d");
    const double cf1 = 0.5 * (s.n - 1 - s.k);
    const double cf2 = 0.5 * (s.n - 1);
    const double omr = s.one_minus_r2();

    double prev = impl_->eval(0, s.k, cf1, cf2, omr, ws.vals);
    if (!impl_->q.refine) return prev;
    for (int level = 1; level <= kMaxHalvings; ++level) {
        const double cur = impl_->eval(level, s.k, cf1, cf2, omr, ws.vals);
        if (std::abs(std::expm1(prev - cur)) < impl_->q.rtol) return cur;
        prev = cur;
    }
    throw NumericError("BfEvaluator: quadrature did not converge after " +
                       std::to_string(kMaxHalvings) + " halvings");
}

double BfEvaluator::log_bf(const SufficientStats& s) const {
    Workspace ws;
    return log_bf(s, ws);
}

} // namespace lossprior
