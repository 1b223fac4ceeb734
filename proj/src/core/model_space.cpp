#include "model_space.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "errors.hpp"

namespace lossprior {

std::vector<int> Gamma::indices() const {
    std::vector<int> out;
    out.reserve(size());
    for (int j = 0; j < d; ++j)
        if (contains(j)) out.push_back(j);
    return out;
}

std::string Gamma::to_string() const {
    std::ostringstream os;
    os << '{';
    bool first = true;
    for (int j = 0; j < d; ++j) {
        if (!contains(j)) continue;
        if (!first) os << ',';
        os << j;
        first = false;
    }
    os << '}';
    return os.str();
}

std::vector<Gamma> enumerate_models(int d) {
    if (d < 0) throw ValidationError("enumerate_models: d must be nonnegative");
    if (d > kMaxCovariates)
        throw ValidationError("enumerate_models: d = " + std::to_string(d) +
                              " exceeds the exact-enumeration cap of " +
                              std::to_string(kMaxCovariates));
    const std::uint64_t count = std::uint64_t{1} << d;
    std::vector<Gamma> out(count);
    for (std::uint64_t m = 0; m < count; ++m)
        out[m] = Gamma{static_cast<std::uint32_t>(m), d};
    return out;
}

namespace {

// In-place Householder QR of the m-by-k column-major panel A, applying the
// same reflections to z. Returns sum of squares of z[0..k) afterwards, i.e.
// the explained sum of squares of the submodel. col_tol[j] is the rank
// threshold for panel column j.
double householder_ess(double* A, double* z, int m, int k, const double* col_tol,
                       const Gamma& gamma) {
    for (int j = 0; j < k; ++j) {
        double* col = A + static_cast<std::size_t>(j) * m;
        double sigma2 = 0;
        for (int i = j; i < m; ++i) sigma2 += col[i] * col[i];
        const double sigma = std::sqrt(sigma2);
        if (sigma <= col_tol[j])
            throw NumericError("singular design for model " + gamma.to_string() +
                               ": selected columns are rank deficient");
        const double xj = col[j];
        const double alpha = xj > 0 ? -sigma : sigma;
        col[j] = xj - alpha;                   // col[j..m) now holds v = x - alpha*e1
        const double vtv = sigma2 - 2.0 * alpha * xj + alpha * alpha;
        if (vtv > 0) {
            const double inv = 2.0 / vtv;
            for (int c = j + 1; c < k; ++c) {
                double* cc = A + static_cast<std::size_t>(c) * m;
                double dot = 0;
                for (int i = j; i < m; ++i) dot += col[i] * cc[i];
                const double f = inv * dot;
                for (int i = j; i < m; ++i) cc[i] -= f * col[i];
            }
            double dot = 0;
            for (int i = j; i < m; ++i) dot += col[i] * z[i];
            const double f = inv * dot;
            for (int i = j; i < m; ++i) z[i] -= f * col[i];
        }
        col[j] = alpha; // diagonal of R; the rest of the column is spent
    }
    double ess = 0;
    for (int i = 0; i < k; ++i) ess += z[i] * z[i];
    return ess;
}

double column_rank_tol(double col_norm, int m) {
    return static_cast<double>(m) * std::numeric_limits<double>::epsilon() * col_norm;
}

} // namespace

SufficientStats fit_submodel(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                             const Gamma& gamma) {
    const int n = static_cast<int>(X.rows());
    const int d = static_cast<int>(X.cols());
    const int k = gamma.size();
    if (y.size() != n)
        throw ValidationError("fit_submodel: X and y disagree on the sample size");
    if (gamma.d != d)
        throw ValidationError("fit_submodel: gamma is bound to d = " + std::to_string(gamma.d) +
                              " but X has " + std::to_string(d) + " columns");
    if (n <= k + 1)
        throw ValidationError("fit_submodel: need n > |gamma| + 1 (n = " + std::to_string(n) +
                              ", |gamma| = " + std::to_string(k) + ")");

    const double ybar = y.mean();
    Eigen::VectorXd yc = y.array() - ybar;
    const double sst = yc.squaredNorm();
    if (!(sst > 0))
        throw ValidationError("fit_submodel: response is constant (sst = 0)");

    SufficientStats s;
    s.n = n;
    s.k = k;
    s.sst = sst;
    if (k == 0) {
        s.sse = sst;
        s.r2 = 0.0;
        return s;
    }

    std::vector<double> panel(static_cast<std::size_t>(n) * k);
    std::vector<double> tol(k);
    int c = 0;
    for (int j = 0; j < d; ++j) {
        if (!gamma.contains(j)) continue;
        const double mean = X.col(j).mean();
        double norm2 = 0;
        for (int i = 0; i < n; ++i) {
            const double v = X(i, j) - mean;
            panel[static_cast<std::size_t>(c) * n + i] = v;
            norm2 += v * v;
        }
        tol[c] = column_rank_tol(std::sqrt(norm2), n);
        ++c;
    }
    std::vector<double> z(yc.data(), yc.data() + n);
    const double ess = householder_ess(panel.data(), z.data(), n, k, tol.data(), gamma);
    s.sse = std::max(sst - ess, 0.0);
    s.r2 = std::min(std::max(ess / sst, 0.0), 1.0);
    return s;
}

SubmodelScorer::SubmodelScorer(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    n_ = static_cast<int>(X.rows());
    d_ = static_cast<int>(X.cols());
    if (y.size() != n_)
        throw ValidationError("SubmodelScorer: X and y disagree on the sample size");
    if (n_ <= d_)
        throw ValidationError("SubmodelScorer: need n > d (n = " + std::to_string(n_) +
                              ", d = " + std::to_string(d_) + ")");

    Eigen::MatrixXd Xc = X.rowwise() - X.colwise().mean();
    Eigen::VectorXd yc = y.array() - y.mean();
    sst_ = yc.squaredNorm();
    if (!(sst_ > 0))
        throw ValidationError("SubmodelScorer: response is constant (sst = 0)");

    col_tol_.resize(d_);
    for (int j = 0; j < d_; ++j)
        col_tol_[j] = column_rank_tol(Xc.col(j).norm(), d_ > n_ ? d_ : n_);

    Eigen::HouseholderQR<Eigen::MatrixXd> qr(Xc);
    R_ = qr.matrixQR().topRows(d_).triangularView<Eigen::Upper>();
    z_ = (qr.householderQ().transpose() * yc).head(d_);
}

SufficientStats SubmodelScorer::stats(const Gamma& gamma, Workspace& ws) const {
    if (gamma.d != d_)
        throw ValidationError("SubmodelScorer: gamma bound to wrong d");
    const int k = gamma.size();
    SufficientStats s;
    s.n = n_;
    s.k = k;
    s.sst = sst_;
    if (k == 0) {
        s.sse = sst_;
        s.r2 = 0.0;
        return s;
    }
    if (n_ <= k + 1)
        throw ValidationError("SubmodelScorer: need n > |gamma| + 1 for model " + gamma.to_string());

    ws.panel.resize(static_cast<std::size_t>(d_) * k);
    ws.z.assign(z_.data(), z_.data() + d_);
    double tol[kMaxCovariates];
    int c = 0;
    for (int j = 0; j < d_; ++j) {
        if (!gamma.contains(j)) continue;
        // column j of R_ (rows 0..j hold the data; below is zero)
        double* dst = ws.panel.data() + static_cast<std::size_t>(c) * d_;
        for (int i = 0; i < d_; ++i) dst[i] = i <= j ? R_(i, j) : 0.0;
        tol[c] = col_tol_[j];
        ++c;
    }
    const double ess = householder_ess(ws.panel.data(), ws.z.data(), d_, k, tol, gamma);
    s.sse = std::max(sst_ - ess, 0.0);
    s.r2 = std::min(std::max(ess / sst_, 0.0), 1.0);
    return s;
}

SufficientStats SubmodelScorer::stats(const Gamma& gamma) const {
    Workspace ws;
    return stats(gamma, ws);
}

} // namespace lossprior
