#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace lossprior {

// One regression model: the subset of the d candidate covariates it includes.
// Bit j of `bits` set <=> covariate j included; the intercept is always in.
// The enumeration index of a model equals its `bits` value.
struct Gamma {
    std::uint32_t bits = 0;
    int d = 0;

    int size() const { return __builtin_popcount(bits); }
    bool contains(int j) const { return (bits >> j) & 1u; }
    std::vector<int> indices() const;
    std::string to_string() const;// "{}" for the null model, "{0,2,5}" otherwise

    friend bool operator==(const Gamma&, const Gamma&) = default;
};

// Enumeration is 2^d; anything beyond this is out of scope for an
// exact-enumeration engine.
inline constexpr int kMaxCovariates = 30;

// All 2^d models in binary-counter order (bit j = covariate j); the null
// model comes first.
std::vector<Gamma> enumerate_models(int d);

// Least-squares summary of one submodel: everything the Bayes factor needs.
struct SufficientStats {
    int n = 0;       // sample size
    int k = 0;       // model size |gamma|
    double sst = 0;  // total sum of squares of the centered response
    double sse = 0;  // residual sum of squares of the fitted submodel
    double r2 = 0;   // 1 - sse/sst

    // 1 - r2 without cancellation; the Bayes factor uses this near r2 = 1.
    double one_minus_r2() const { return sst > 0 ? sse / sst : 1.0; }
};

// Fits the intercept-augmented submodel selected by gamma: centers y and the
// selected columns of X (the intercept is handled implicitly and orthogonally)
// and runs a Householder QR. Normal equations are never formed.
//
// Throws ValidationError on dimension/precondition violations, NumericError
// when the selected columns are rank deficient or y is constant.
SufficientStats fit_submodel(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                             const Gamma& gamma);

// Scores many submodels of one (X, y) cheaply: a single thin QR of the
// centered design up front, then per-model stats from a fresh Householder QR
// of the corresponding column subset of the d-by-d R factor (O(d k^2) per
// model instead of O(n k^2); agrees with fit_submodel to ~1e-12 in r2).
class SubmodelScorer {
public:
    SubmodelScorer(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

    int n() const { return n_; }
    int d() const { return d_; }
    double sst() const { return sst_; }

    // Scratch space so the hot loop never allocates; one per thread.
    struct Workspace {
        std::vector<double> panel;
        std::vector<double> z;
    };

    SufficientStats stats(const Gamma& gamma, Workspace& ws) const;
    SufficientStats stats(const Gamma& gamma) const;

private:
    int n_ = 0, d_ = 0;
    double sst_ = 0;
    Eigen::MatrixXd R_;          // d x d upper-triangular factor of centered X
    Eigen::VectorXd z_;          // Q' * centered y
    std::vector<double> col_tol_;// per-column rank thresholds
};

} // namespace lossprior
